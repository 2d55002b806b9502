"""Static LDA trained with collapsed Gibbs sampling.

The sampler integrates out the topic-word and document-topic Dirichlet
parameters and resamples one token's topic at a time from

    p(z_i = k | z_-i, w)  ~  (n_dk + alpha) * (n_kw + eta) / (n_k + V*eta)

where the counts exclude the current token. Point estimates are posterior
means averaged over thinned post-burn-in sweeps. All randomness flows
through one seeded PCG64 generator (initial assignments, then one uniform
per token per sweep), so runs are reproducible across platforms and across
the numba/numpy kernel backends.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from newstm._kernels import gibbs_sweep, infer_sweep
from newstm.preprocess import BowDoc, Vocabulary

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LdaHyperparams:
    """Collapsed-Gibbs settings; alpha=None resolves to the 50/k default."""

    k: int
    alpha: float | None = None
    eta: float = 0.01
    iterations: int = 1000
    burn_in: int = 200
    thin: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", 50.0 / self.k)
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.eta <= 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if not self.iterations > self.burn_in >= 0:
            raise ValueError(
                f"need iterations > burn_in >= 0, got {self.iterations} and {self.burn_in}"
            )
        if self.thin < 1:
            raise ValueError(f"thin must be >= 1, got {self.thin}")


@dataclass
class LdaModel:
    """Trained model state: estimates, final assignments and count matrices."""

    beta: np.ndarray  # (k, V) row-stochastic topic-word estimate
    theta: np.ndarray  # (D, k) row-stochastic doc-topic estimate
    assignments: list[np.ndarray] | None  # per-document final z
    n_dk: np.ndarray | None
    n_kw: np.ndarray | None
    n_k: np.ndarray | None
    hyper: LdaHyperparams
    vocab_size: int
    doc_lengths: np.ndarray
    word_ids: np.ndarray | None = None  # concatenated token stream backing assignments

    @property
    def n_topics(self) -> int:
        return self.beta.shape[0]

    @property
    def n_docs(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class TopicSummary:
    """Top terms of one topic, probabilities descending."""

    topic_id: int
    terms: tuple[tuple[str, float], ...]


def _expand_bows(bows: Sequence[BowDoc], vocab_size: int):
    """Flatten bag-of-words docs into parallel doc-index/word-id token arrays.

    Within a document tokens are laid out in ascending word-id order, making
    the expansion (and everything downstream) deterministic.
    """
    per_doc: list[np.ndarray] = []
    for bow in bows:
        if bow.counts:
            ids = np.fromiter(bow.counts.keys(), dtype=np.int64, count=len(bow.counts))
            cnt = np.fromiter(bow.counts.values(), dtype=np.int64, count=len(bow.counts))
            order = np.argsort(ids, kind="stable")
            ids, cnt = ids[order], cnt[order]
            if ids[0] < 0 or ids[-1] >= vocab_size:
                raise ValueError(
                    f"document {bow.doc_id!r}: word id out of range for vocab_size={vocab_size}"
                )
            if (cnt < 1).any():
                raise ValueError(f"document {bow.doc_id!r}: counts must be >= 1")
            per_doc.append(np.repeat(ids, cnt))
        else:
            per_doc.append(np.zeros(0, dtype=np.int64))
    lengths = np.array([arr.size for arr in per_doc], dtype=np.int64)
    word_ids = np.concatenate(per_doc) if per_doc else np.zeros(0, dtype=np.int64)
    doc_ids = np.repeat(np.arange(len(per_doc), dtype=np.int64), lengths)
    return doc_ids, word_ids, lengths


def _sample_topics_from_beta(beta: np.ndarray, word_ids: np.ndarray, rng) -> np.ndarray:
    """Draw one topic per token with p(k) proportional to beta[k, word]."""
    k = beta.shape[0]
    n = word_ids.size
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    cols = beta[:, word_ids]
    cum = np.cumsum(cols / cols.sum(axis=0, keepdims=True), axis=0)
    u = rng.random(n)
    z = (u[None, :] < cum).argmax(axis=0).astype(np.int64)
    z[u >= cum[-1, :]] = k - 1  # guard against cumulative sums just below 1
    return z


def _run_chain(
    doc_ids: np.ndarray,
    word_ids: np.ndarray,
    n_docs: int,
    vocab_size: int,
    hyper: LdaHyperparams,
    eta_kw: np.ndarray | None,
    init_beta: np.ndarray | None,
    collect_z: bool,
):
    k = hyper.k
    n_tokens = word_ids.size
    rng = np.random.default_rng(hyper.seed)

    if eta_kw is None:
        eta_kw = np.full((k, vocab_size), hyper.eta, dtype=np.float64)
    else:
        eta_kw = np.ascontiguousarray(eta_kw, dtype=np.float64)
        if eta_kw.shape != (k, vocab_size):
            raise ValueError(f"eta_kw must have shape {(k, vocab_size)}, got {eta_kw.shape}")
        if (eta_kw <= 0).any():
            raise ValueError("eta_kw entries must be > 0")
    eta_sum = eta_kw.sum(axis=1)

    if init_beta is None:
        z = rng.integers(0, k, n_tokens, dtype=np.int64)
    else:
        z = _sample_topics_from_beta(np.asarray(init_beta, dtype=np.float64), word_ids, rng)

    n_dk = np.zeros((n_docs, k), dtype=np.int64)
    n_kw = np.zeros((k, vocab_size), dtype=np.int64)
    n_k = np.zeros(k, dtype=np.int64)
    np.add.at(n_dk, (doc_ids, z), 1)
    np.add.at(n_kw, (z, word_ids), 1)
    np.add.at(n_k, z, 1)

    doc_lengths = np.bincount(doc_ids, minlength=n_docs).astype(np.int64)
    alpha = float(hyper.alpha)
    probs = np.empty(k, dtype=np.float64)
    beta_acc = np.zeros((k, vocab_size), dtype=np.float64)
    theta_acc = np.zeros((n_docs, k), dtype=np.float64)
    retained = 0
    z_samples: list[np.ndarray] = []

    for sweep in range(hyper.iterations):
        uniforms = rng.random(n_tokens)
        gibbs_sweep(doc_ids, word_ids, z, n_dk, n_kw, n_k, alpha, eta_kw, eta_sum, uniforms, probs)
        if sweep >= hyper.burn_in and (sweep - hyper.burn_in) % hyper.thin == 0:
            beta_acc += (n_kw + eta_kw) / (n_k + eta_sum)[:, None]
            theta_acc += (n_dk + alpha) / (doc_lengths + k * alpha)[:, None]
            retained += 1
            if collect_z:
                z_samples.append(z.copy())

    beta = beta_acc / retained
    theta = theta_acc / retained
    return z, n_dk, n_kw, n_k, beta, theta, doc_lengths, z_samples


def train_lda(
    corpus: Iterable[BowDoc],
    vocab_size: int,
    hyper: LdaHyperparams,
    *,
    eta_kw: np.ndarray | None = None,
    init_beta: np.ndarray | None = None,
) -> LdaModel:
    """Run collapsed Gibbs sampling over the corpus and return the trained model.

    `eta_kw` overrides the symmetric word prior with a per-topic-per-word
    pseudo-count matrix, and `init_beta` seeds the initial assignments from
    an existing topic-word estimate instead of the uniform draw; both hooks
    exist for chained dynamic training and leave the default behaviour
    untouched when None.
    """
    bows = list(corpus)
    if not bows:
        raise ValueError("cannot train on an empty corpus")
    if vocab_size < 1:
        raise ValueError(f"vocab_size must be >= 1, got {vocab_size}")
    doc_ids, word_ids, lengths = _expand_bows(bows, vocab_size)
    z, n_dk, n_kw, n_k, beta, theta, doc_lengths, _ = _run_chain(
        doc_ids, word_ids, len(bows), vocab_size, hyper, eta_kw, init_beta, collect_z=False
    )
    offsets = np.concatenate([[0], np.cumsum(lengths)])
    assignments = [z[offsets[d] : offsets[d + 1]].copy() for d in range(len(bows))]
    logger.info(
        "trained LDA: k=%d docs=%d tokens=%d iterations=%d",
        hyper.k,
        len(bows),
        word_ids.size,
        hyper.iterations,
    )
    return LdaModel(
        beta=beta,
        theta=theta,
        assignments=assignments,
        n_dk=n_dk,
        n_kw=n_kw,
        n_k=n_k,
        hyper=hyper,
        vocab_size=vocab_size,
        doc_lengths=doc_lengths,
        word_ids=word_ids,
    )


def posterior_assignment_samples(
    corpus: Iterable[BowDoc], vocab_size: int, hyper: LdaHyperparams
):
    """Collect retained post-burn-in assignment sweeps for diagnostics.

    Returns (samples, doc_ids, word_ids) where samples has shape
    (n_retained, n_tokens). Intended for small corpora: every retained sweep
    stores a full copy of z.
    """
    bows = list(corpus)
    if not bows:
        raise ValueError("cannot sample on an empty corpus")
    doc_ids, word_ids, _ = _expand_bows(bows, vocab_size)
    *_, z_samples = _run_chain(
        doc_ids, word_ids, len(bows), vocab_size, hyper, None, None, collect_z=True
    )
    return np.stack(z_samples), doc_ids, word_ids


def infer_theta(model: LdaModel, doc: BowDoc, sweeps: int = 200, seed: int = 0) -> np.ndarray:
    """Topic proportions for a held-out document, beta frozen at the trained estimate.

    Gibbs runs over the new document's assignments only; the returned vector
    averages the per-sweep posterior-mean estimates and sums to 1. An empty
    document yields the uniform vector.
    """
    k = model.n_topics
    if not doc.counts:
        return np.full(k, 1.0 / k)
    if sweeps < 1:
        raise ValueError(f"sweeps must be >= 1, got {sweeps}")
    ids = np.fromiter(doc.counts.keys(), dtype=np.int64, count=len(doc.counts))
    cnt = np.fromiter(doc.counts.values(), dtype=np.int64, count=len(doc.counts))
    order = np.argsort(ids, kind="stable")
    ids, cnt = ids[order], cnt[order]
    if ids[0] < 0 or ids[-1] >= model.vocab_size:
        raise ValueError(f"document {doc.doc_id!r}: word id out of range")
    word_ids = np.repeat(ids, cnt)
    n = word_ids.size

    rng = np.random.default_rng(seed)
    z = rng.integers(0, k, n, dtype=np.int64)
    m_k = np.bincount(z, minlength=k).astype(np.int64)
    alpha = float(model.hyper.alpha)
    probs = np.empty(k, dtype=np.float64)
    acc = np.zeros(k, dtype=np.float64)
    for _ in range(sweeps):
        uniforms = rng.random(n)
        infer_sweep(word_ids, z, m_k, model.beta, alpha, uniforms, probs)
        acc += (m_k + alpha) / (n + k * alpha)
    return acc / sweeps


def _top_order(beta_row: np.ndarray, n: int) -> np.ndarray:
    """Indices of the n largest entries, ties broken by ascending word id."""
    v = beta_row.size
    order = np.lexsort((np.arange(v), -beta_row))
    return order[:n]


def top_words(
    model: LdaModel, topic_id: int, n: int, vocab: Vocabulary | None = None
) -> TopicSummary:
    """The n highest-probability terms of one topic.

    Terms are tokens when `vocab` is given, else decimal word-id strings.
    """
    if not 0 <= topic_id < model.n_topics:
        raise ValueError(f"topic_id {topic_id} out of range for k={model.n_topics}")
    if not 1 <= n <= model.vocab_size:
        raise ValueError(f"n must be in 1..{model.vocab_size}, got {n}")
    row = model.beta[topic_id]
    picks = _top_order(row, n)
    terms = tuple(
        (vocab.decode(int(i)) if vocab is not None else str(int(i)), float(row[i]))
        for i in picks
    )
    return TopicSummary(topic_id=topic_id, terms=terms)


def perplexity(
    model: LdaModel, corpus: Iterable[BowDoc], theta: np.ndarray | None = None
) -> float:
    """exp of the negative mean per-token log-likelihood under the mixture.

    `theta` defaults to the training estimate and must then match the corpus
    by position; pass explicit rows (e.g. from infer_theta) for held-out docs.
    """
    bows = list(corpus)
    theta = model.theta if theta is None else np.asarray(theta, dtype=np.float64)
    if theta.shape != (len(bows), model.n_topics):
        raise ValueError(
            f"theta shape {theta.shape} does not match {len(bows)} docs x {model.n_topics} topics"
        )
    log_lik = 0.0
    total = 0
    for d, bow in enumerate(bows):
        if not bow.counts:
            continue
        ids = np.fromiter(bow.counts.keys(), dtype=np.int64, count=len(bow.counts))
        cnt = np.fromiter(bow.counts.values(), dtype=np.float64, count=len(bow.counts))
        p = theta[d] @ model.beta[:, ids]
        if (p <= 0).any():
            raise ValueError(
                "word with zero probability under every topic; impossible for "
                "trained models since eta > 0"
            )
        log_lik += float(cnt @ np.log(p))
        total += int(cnt.sum())
    if total == 0:
        raise ValueError("perplexity is undefined for a corpus with no tokens")
    return float(np.exp(-log_lik / total))


def audit_counts(model: LdaModel, atol: float = 1e-9) -> None:
    """Recompute the count matrices from stored assignments and verify invariants.

    Raises ValueError on any inconsistency; intended as a debug/test hook.
    """
    if model.assignments is None or model.word_ids is None:
        raise ValueError("model carries no assignments to audit")
    z = np.concatenate(model.assignments) if model.assignments else np.zeros(0, np.int64)
    lengths = np.array([a.size for a in model.assignments], dtype=np.int64)
    doc_ids = np.repeat(np.arange(len(model.assignments), dtype=np.int64), lengths)
    k, v = model.n_topics, model.vocab_size
    n_dk = np.zeros((len(model.assignments), k), dtype=np.int64)
    n_kw = np.zeros((k, v), dtype=np.int64)
    n_k = np.zeros(k, dtype=np.int64)
    np.add.at(n_dk, (doc_ids, z), 1)
    np.add.at(n_kw, (z, model.word_ids), 1)
    np.add.at(n_k, z, 1)
    if not np.array_equal(n_dk, model.n_dk):
        raise ValueError("n_dk is inconsistent with the stored assignments")
    if not np.array_equal(n_kw, model.n_kw):
        raise ValueError("n_kw is inconsistent with the stored assignments")
    if not np.array_equal(n_k, model.n_k):
        raise ValueError("n_k is inconsistent with the stored assignments")
    if int(n_k.sum()) != int(model.word_ids.size):
        raise ValueError("topic totals do not sum to the token count")
    if not np.allclose(model.beta.sum(axis=1), 1.0, atol=atol):
        raise ValueError("beta rows do not sum to 1")
    if not np.allclose(model.theta.sum(axis=1), 1.0, atol=atol):
        raise ValueError("theta rows do not sum to 1")


def save_lda(model: LdaModel, path: str | Path, include_assignments: bool = True) -> None:
    """Serialize as versioned JSON; floats keep full precision via repr round-trip."""
    payload = {
        "format": "newstm-lda",
        "version": 1,
        "vocab_size": model.vocab_size,
        "hyper": {
            "k": model.hyper.k,
            "alpha": model.hyper.alpha,
            "eta": model.hyper.eta,
            "iterations": model.hyper.iterations,
            "burn_in": model.hyper.burn_in,
            "thin": model.hyper.thin,
            "seed": model.hyper.seed,
        },
        "doc_lengths": model.doc_lengths.tolist(),
        "beta": model.beta.tolist(),
        "theta": model.theta.tolist(),
        "assignments": (
            [a.tolist() for a in model.assignments]
            if include_assignments and model.assignments is not None
            else None
        ),
        "word_ids": (
            model.word_ids.tolist()
            if include_assignments and model.word_ids is not None
            else None
        ),
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def load_lda(path: str | Path) -> LdaModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != "newstm-lda":
        raise ValueError(f"{path}: not an LDA model export")
    hyper = LdaHyperparams(**payload["hyper"])
    beta = np.asarray(payload["beta"], dtype=np.float64)
    theta = np.asarray(payload["theta"], dtype=np.float64)
    doc_lengths = np.asarray(payload["doc_lengths"], dtype=np.int64)
    vocab_size = int(payload["vocab_size"])
    assignments = None
    word_ids = None
    n_dk = n_kw = n_k = None
    if payload.get("assignments") is not None:
        assignments = [np.asarray(a, dtype=np.int64) for a in payload["assignments"]]
        word_ids = np.asarray(payload["word_ids"], dtype=np.int64)
        z = np.concatenate(assignments) if assignments else np.zeros(0, np.int64)
        lengths = np.array([a.size for a in assignments], dtype=np.int64)
        doc_ids = np.repeat(np.arange(len(assignments), dtype=np.int64), lengths)
        k = hyper.k
        n_dk = np.zeros((len(assignments), k), dtype=np.int64)
        n_kw = np.zeros((k, vocab_size), dtype=np.int64)
        n_k = np.zeros(k, dtype=np.int64)
        np.add.at(n_dk, (doc_ids, z), 1)
        np.add.at(n_kw, (z, word_ids), 1)
        np.add.at(n_k, z, 1)
    return LdaModel(
        beta=beta,
        theta=theta,
        assignments=assignments,
        n_dk=n_dk,
        n_kw=n_kw,
        n_k=n_k,
        hyper=hyper,
        vocab_size=vocab_size,
        doc_lengths=doc_lengths,
        word_ids=word_ids,
    )
