"""Gibbs-sampling inner loops.

The sweep kernels are plain Python over NumPy arrays so that one source
serves two backends: compiled with numba's @njit when available, or run
uncompiled as the fallback. Both paths consume pre-drawn uniforms and
produce bitwise-identical results. Set NEWSTM_NO_NUMBA=1 to force the
fallback; `BACKEND` reports which path is active.
"""

import os


def _gibbs_sweep_py(doc_ids, word_ids, z, n_dk, n_kw, n_k, alpha, eta_kw, eta_sum, uniforms, probs):
    # One full collapsed-Gibbs sweep over all tokens; z and the count
    # matrices are updated in place. For each token the full conditional is
    #   p(k) ~ (n_dk[d,k] + alpha) * (n_kw[k,w] + eta_kw[k,w]) / (n_k[k] + eta_sum[k])
    # with the token's own contribution removed from the counts first.
    n_tokens = doc_ids.shape[0]
    n_topics = n_kw.shape[0]
    for i in range(n_tokens):
        d = doc_ids[i]
        w = word_ids[i]
        k_old = z[i]
        n_dk[d, k_old] -= 1
        n_kw[k_old, w] -= 1
        n_k[k_old] -= 1

        total = 0.0
        for k in range(n_topics):
            p = (n_dk[d, k] + alpha) * (n_kw[k, w] + eta_kw[k, w]) / (n_k[k] + eta_sum[k])
            probs[k] = p
            total += p

        # Inverse-CDF draw on the unnormalised weights; the final bucket
        # absorbs any floating-point shortfall.
        r = uniforms[i] * total
        acc = 0.0
        k_new = n_topics - 1
        for k in range(n_topics):
            acc += probs[k]
            if r < acc:
                k_new = k
                break

        z[i] = k_new
        n_dk[d, k_new] += 1
        n_kw[k_new, w] += 1
        n_k[k_new] += 1


def _infer_sweep_py(word_ids, z, m_k, beta, alpha, uniforms, probs):
    # Gibbs sweep for a single held-out document with the topic-word rows
    # frozen: p(k) ~ (m_k[k] + alpha) * beta[k, w].
    n_tokens = word_ids.shape[0]
    n_topics = m_k.shape[0]
    for i in range(n_tokens):
        w = word_ids[i]
        m_k[z[i]] -= 1

        total = 0.0
        for k in range(n_topics):
            p = (m_k[k] + alpha) * beta[k, w]
            probs[k] = p
            total += p

        if total <= 0.0:
            # Word has zero mass under every topic (possible for hand-built
            # beta); fall back to a uniform draw.
            k_new = int(uniforms[i] * n_topics)
            if k_new >= n_topics:
                k_new = n_topics - 1
        else:
            r = uniforms[i] * total
            acc = 0.0
            k_new = n_topics - 1
            for k in range(n_topics):
                acc += probs[k]
                if r < acc:
                    k_new = k
                    break

        z[i] = k_new
        m_k[k_new] += 1


def _numba_enabled() -> bool:
    return os.environ.get("NEWSTM_NO_NUMBA", "").strip().lower() not in {"1", "true", "yes", "on"}


BACKEND = "numpy"
gibbs_sweep = _gibbs_sweep_py
infer_sweep = _infer_sweep_py

if _numba_enabled():
    try:
        import numba
    except ImportError:
        pass
    else:
        gibbs_sweep = numba.njit(cache=True)(_gibbs_sweep_py)
        infer_sweep = numba.njit(cache=True)(_infer_sweep_py)
        BACKEND = "numba"
