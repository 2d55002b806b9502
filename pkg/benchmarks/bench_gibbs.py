#!/usr/bin/env python3
"""Benchmark the collapsed-Gibbs sweep kernel: numba backend vs numpy fallback.

Both backends run the same source (see newstm._kernels) on identical inputs,
so outputs are bitwise-equal; only throughput differs. Numbers are printed as
tokens/second per full sweep, after a warmup that absorbs JIT compilation.
"""

import argparse
import time

import numpy as np

from newstm._kernels import _gibbs_sweep_py

try:
    import numba
except ImportError:
    numba = None


def build_state(n_tokens: int, n_docs: int, vocab_size: int, k: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    doc_ids = np.sort(rng.integers(0, n_docs, n_tokens)).astype(np.int64)
    word_ids = rng.integers(0, vocab_size, n_tokens).astype(np.int64)
    z = rng.integers(0, k, n_tokens).astype(np.int64)
    n_dk = np.zeros((n_docs, k), np.int64)
    n_kw = np.zeros((k, vocab_size), np.int64)
    n_k = np.zeros(k, np.int64)
    np.add.at(n_dk, (doc_ids, z), 1)
    np.add.at(n_kw, (z, word_ids), 1)
    np.add.at(n_k, z, 1)
    eta_kw = np.full((k, vocab_size), 0.01)
    return doc_ids, word_ids, z, n_dk, n_kw, n_k, eta_kw, eta_kw.sum(axis=1), rng


def run_backend(name, sweep_fn, n_tokens, n_docs, vocab_size, k, n_sweeps, n_warmup):
    doc_ids, word_ids, z, n_dk, n_kw, n_k, eta_kw, eta_sum, rng = build_state(
        n_tokens, n_docs, vocab_size, k
    )
    probs = np.empty(k)
    for _ in range(n_warmup):
        uniforms = rng.random(n_tokens)
        sweep_fn(doc_ids, word_ids, z, n_dk, n_kw, n_k, 0.5, eta_kw, eta_sum, uniforms, probs)
    started = time.perf_counter()
    for _ in range(n_sweeps):
        uniforms = rng.random(n_tokens)
        sweep_fn(doc_ids, word_ids, z, n_dk, n_kw, n_k, 0.5, eta_kw, eta_sum, uniforms, probs)
    elapsed = time.perf_counter() - started
    rate = n_tokens * n_sweeps / elapsed
    print(
        f"  {name:<6} {elapsed:8.3f} s for {n_sweeps} sweeps "
        f"({elapsed / n_sweeps * 1000:8.2f} ms/sweep, {rate / 1e6:7.2f} M tokens/s)"
    )
    return elapsed


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--tokens", type=int, default=200_000)
    parser.add_argument("--docs", type=int, default=2_000)
    parser.add_argument("--vocab", type=int, default=5_000)
    parser.add_argument("--topics", type=int, default=20)
    parser.add_argument("--sweeps", type=int, default=20)
    parser.add_argument("--numpy-sweeps", type=int, default=2, help="fallback is ~100x slower")
    args = parser.parse_args()

    print(
        f"corpus: {args.tokens} tokens, {args.docs} docs, "
        f"V={args.vocab}, K={args.topics}"
    )

    numpy_time = run_backend(
        "numpy",
        _gibbs_sweep_py,
        args.tokens,
        args.docs,
        args.vocab,
        args.topics,
        args.numpy_sweeps,
        n_warmup=0,
    )
    if numba is None:
        print("  numba  not installed; fallback only")
        return
    jit_sweep = numba.njit(cache=True)(_gibbs_sweep_py)
    numba_time = run_backend(
        "numba",
        jit_sweep,
        args.tokens,
        args.docs,
        args.vocab,
        args.topics,
        args.sweeps,
        n_warmup=1,
    )
    speedup = (numpy_time / args.numpy_sweeps) / (numba_time / args.sweeps)
    print(f"  speedup: numba is {speedup:.0f}x faster per sweep")


if __name__ == "__main__":
    main()
