"""Dynamic topics over time slices via chained collapsed-Gibbs LDA.

Slice 0 trains as plain LDA; each later slice reuses the previous slice's
topic-word estimate in two ways: as word-prior pseudo-counts
(eta_t = eta + kappa * V * beta_prev, prior scale constant 1) and, when
warm_start is on, as the distribution the initial assignments are sampled
from. Topic identity across slices therefore comes from the chain itself;
there is no post-hoc alignment step. With kappa=0 and warm_start=False the
chain degenerates into independent per-slice LDA runs, bitwise.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from newstm.corpus import TimeSlice
from newstm.lda import LdaHyperparams, TopicSummary, top_words, train_lda
from newstm.preprocess import BowDoc, Vocabulary

logger = logging.getLogger(__name__)

# Scale applied to the carried-over pseudo-counts; documented and fixed.
ETA_SCALE = 1.0


@dataclass
class DtmModel:
    """Per-slice topic-word estimates chained over an ordered slice sequence."""

    slices: list[TimeSlice]
    per_slice_beta: np.ndarray  # (T, k, V), each [t, k] row sums to 1
    per_slice_theta: list[np.ndarray]
    kappa: float
    base_hyper: LdaHyperparams
    slice_seeds: list[int]
    vocab_size: int

    @property
    def n_slices(self) -> int:
        return self.per_slice_beta.shape[0]


@dataclass(frozen=True)
class TrajectorySeries:
    """p(word | topic, t) curves for a tracked word list of one topic."""

    topic_id: int
    words: tuple[str, ...]
    series: dict[str, np.ndarray]
    slice_labels: tuple[str, ...]

    def __post_init__(self) -> None:
        t = len(self.slice_labels)
        for word in self.words:
            values = self.series[word]
            if len(values) != t:
                raise ValueError(f"series for {word!r} has length {len(values)}, expected {t}")
            if ((values < 0) | (values > 1)).any():
                raise ValueError(f"series for {word!r} leaves [0, 1]")


def slice_seeds_for(base_seed: int, n_slices: int) -> list[int]:
    """Deterministic per-slice seeds: slice 0 keeps the base seed, later
    slices draw from the spawned SeedSequence stream."""
    seeds = [int(base_seed)]
    if n_slices > 1:
        state = np.random.SeedSequence(base_seed).generate_state(n_slices - 1, dtype=np.uint32)
        seeds.extend(int(s) for s in state)
    return seeds


def train_dtm(
    sliced_corpus: Sequence[tuple[TimeSlice, Sequence[BowDoc]]],
    k: int,
    base_hyper: LdaHyperparams,
    kappa: float = 1.0,
    *,
    vocab_size: int,
    warm_start: bool = True,
) -> DtmModel:
    """Train the chained per-slice model over an ordered sliced corpus.

    Empty slices (no documents) inherit the previous slice's topic-word
    rows verbatim; an empty slice 0 starts from the uniform distribution.
    warm_start=False disables assignment initialization from the previous
    slice (the equivalence mode used to compare against independent runs).
    """
    slices_in = list(sliced_corpus)
    if not slices_in:
        raise ValueError("need at least one time slice")
    if k != base_hyper.k:
        raise ValueError(f"K mismatch: requested k={k} but hyperparameters carry k={base_hyper.k}")
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    if vocab_size < 1:
        raise ValueError(f"vocab_size must be >= 1, got {vocab_size}")

    seeds = slice_seeds_for(base_hyper.seed, len(slices_in))
    betas = np.empty((len(slices_in), k, vocab_size), dtype=np.float64)
    thetas: list[np.ndarray] = []
    metas: list[TimeSlice] = []
    prev_beta: np.ndarray | None = None

    for t, (meta, bows) in enumerate(slices_in):
        bows = list(bows)
        hyper_t = dataclasses.replace(base_hyper, seed=seeds[t])
        if not bows:
            beta_t = (
                prev_beta.copy()
                if prev_beta is not None
                else np.full((k, vocab_size), 1.0 / vocab_size)
            )
            theta_t = np.zeros((0, k), dtype=np.float64)
            logger.info("slice %d is empty; carrying topic-word rows forward", t)
        else:
            if t == 0 or prev_beta is None:
                eta_kw = None
                init_beta = None
            else:
                eta_kw = base_hyper.eta + kappa * vocab_size * ETA_SCALE * prev_beta
                init_beta = prev_beta if warm_start else None
            model_t = train_lda(bows, vocab_size, hyper_t, eta_kw=eta_kw, init_beta=init_beta)
            beta_t, theta_t = model_t.beta, model_t.theta
        betas[t] = beta_t
        thetas.append(theta_t)
        metas.append(meta)
        prev_beta = beta_t

    return DtmModel(
        slices=metas,
        per_slice_beta=betas,
        per_slice_theta=thetas,
        kappa=kappa,
        base_hyper=base_hyper,
        slice_seeds=seeds,
        vocab_size=vocab_size,
    )


def trajectory(
    model: DtmModel, topic_id: int, words: Sequence[str], vocab: Vocabulary
) -> TrajectorySeries:
    """Extract p(word | topic, t) across all slices for the given words.

    Values are raw per-slice topic-word entries, never renormalized.
    Out-of-vocabulary words raise instead of being dropped.
    """
    if not 0 <= topic_id < model.base_hyper.k:
        raise ValueError(f"topic_id {topic_id} out of range for k={model.base_hyper.k}")
    missing = [w for w in words if vocab.encode(w) is None]
    if missing:
        raise ValueError(f"words not in vocabulary: {missing}")
    series = {
        w: model.per_slice_beta[:, topic_id, vocab.encode(w)].copy() for w in words
    }
    labels = tuple(s.start.isoformat() for s in model.slices)
    return TrajectorySeries(
        topic_id=topic_id, words=tuple(words), series=series, slice_labels=labels
    )


def top_words_at(
    model: DtmModel, topic_id: int, t: int, n: int, vocab: Vocabulary | None = None
) -> TopicSummary:
    """Top terms of one topic at slice t; same contract as the static top_words."""
    if not 0 <= t < model.n_slices:
        raise ValueError(f"slice index {t} out of range for {model.n_slices} slices")
    # Reuse the static extractor by viewing slice t as a one-off model.
    from newstm.lda import LdaModel

    view = LdaModel(
        beta=model.per_slice_beta[t],
        theta=model.per_slice_theta[t],
        assignments=None,
        n_dk=None,
        n_kw=None,
        n_k=None,
        hyper=model.base_hyper,
        vocab_size=model.vocab_size,
        doc_lengths=np.zeros(0, dtype=np.int64),
    )
    return top_words(view, topic_id, n, vocab)


def write_trajectory_csv(series_list: Iterable[TrajectorySeries], path: str | Path) -> None:
    """CSV export, one row per (word, slice): topic,word,slice_start,probability."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["topic", "word", "slice_start", "probability"])
        for ts in series_list:
            for word in ts.words:
                for label, prob in zip(ts.slice_labels, ts.series[word]):
                    writer.writerow([ts.topic_id, word, label, repr(float(prob))])


def read_trajectory_csv(path: str | Path) -> list[TrajectorySeries]:
    rows: list[tuple[int, str, str, float]] = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["topic", "word", "slice_start", "probability"]:
            raise ValueError(f"{path}: unexpected trajectory header {header}")
        for row in reader:
            rows.append((int(row[0]), row[1], row[2], float(row[3])))
    out: list[TrajectorySeries] = []
    topic_order: list[int] = []
    grouped: dict[int, dict[str, list[tuple[str, float]]]] = {}
    for topic, word, label, prob in rows:
        if topic not in grouped:
            grouped[topic] = {}
            topic_order.append(topic)
        grouped[topic].setdefault(word, []).append((label, prob))
    for topic in topic_order:
        words = tuple(grouped[topic].keys())
        labels = tuple(label for label, _ in grouped[topic][words[0]])
        series = {
            w: np.array([p for _, p in grouped[topic][w]], dtype=np.float64) for w in words
        }
        out.append(
            TrajectorySeries(topic_id=topic, words=words, series=series, slice_labels=labels)
        )
    return out


def save_dtm(model: DtmModel, path: str | Path) -> None:
    """Versioned JSON export mirroring the static model format."""
    payload = {
        "format": "newstm-dtm",
        "version": 1,
        "vocab_size": model.vocab_size,
        "kappa": model.kappa,
        "slice_seeds": model.slice_seeds,
        "base_hyper": {
            "k": model.base_hyper.k,
            "alpha": model.base_hyper.alpha,
            "eta": model.base_hyper.eta,
            "iterations": model.base_hyper.iterations,
            "burn_in": model.base_hyper.burn_in,
            "thin": model.base_hyper.thin,
            "seed": model.base_hyper.seed,
        },
        "slices": [
            {
                "index": s.index,
                "start": s.start.isoformat(),
                "end": s.end.isoformat(),
                "doc_ids": list(s.doc_ids),
            }
            for s in model.slices
        ],
        "per_slice_beta": model.per_slice_beta.tolist(),
        "per_slice_theta": [theta.tolist() for theta in model.per_slice_theta],
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def load_dtm(path: str | Path) -> DtmModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != "newstm-dtm":
        raise ValueError(f"{path}: not a DTM model export")
    slices = [
        TimeSlice(
            index=int(s["index"]),
            start=datetime.date.fromisoformat(s["start"]),
            end=datetime.date.fromisoformat(s["end"]),
            doc_ids=tuple(s["doc_ids"]),
        )
        for s in payload["slices"]
    ]
    k = int(payload["base_hyper"]["k"])
    return DtmModel(
        slices=slices,
        per_slice_beta=np.asarray(payload["per_slice_beta"], dtype=np.float64),
        per_slice_theta=[
            np.asarray(theta, dtype=np.float64).reshape(-1, k)
            for theta in payload["per_slice_theta"]
        ],
        kappa=float(payload["kappa"]),
        base_hyper=LdaHyperparams(**payload["base_hyper"]),
        slice_seeds=[int(s) for s in payload["slice_seeds"]],
        vocab_size=int(payload["vocab_size"]),
    )
