"""Pipeline command line: ingest -> preprocess -> train -> report -> plot.

Every stage reads and writes named artifacts inside a workspace directory.
A manifest records each artifact's content hash plus the hashes of the
inputs it was built from, so stale intermediates are detected instead of
silently reused. One config plus one corpus reruns to byte-identical
artifacts.

Exit codes: 0 success, 1 validation error (bad config or missing/stale
prerequisite), 2 runtime error.
"""

from __future__ import annotations

import argparse
import configparser
import datetime
import hashlib
import json
import logging
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from newstm import __version__
from newstm.corpus import (
    _anchor_in_month,
    articles_per_day,
    filter_by_category,
    load_corpus,
    read_timeline_csv,
    save_corpus,
    slice_monthly,
    write_timeline_csv,
)
from newstm.dtm import (
    load_dtm,
    read_trajectory_csv,
    save_dtm,
    top_words_at,
    train_dtm,
    trajectory,
    write_trajectory_csv,
)
from newstm.evaluate import (
    intertopic_map,
    read_intertopic_csv,
    topic_overlap,
    umass_coherence,
    write_coherence_json,
    write_intertopic_csv,
    write_overlap_json,
)
from newstm.lda import LdaHyperparams, load_lda, save_lda, train_lda
from newstm.preprocess import (
    TokenStream,
    apply_phrases,
    build_vocabulary,
    fit_phrases,
    load_stopwords,
    read_bows,
    read_vocabulary,
    remove_stopwords,
    to_bow,
    tokenize,
    write_bows,
    write_vocabulary,
)

logger = logging.getLogger(__name__)


class ValidationError(ValueError):
    """Bad configuration or an unmet stage precondition; maps to exit code 1."""


_DEFAULTS: dict[str, dict[str, str]] = {
    "corpus": {
        "path": "",
        "keep_categories": "inrikes,utrikes",
        "anchor_day": "17",
        "first_start": "2020-01-17",
        "n_slices": "12",
    },
    "preprocess": {
        "stoplist": "",
        "min_count": "5",
        "threshold": "10.0",
        "no_below": "2",
        "no_above": "0.5",
    },
    "lda": {
        "k": "20",
        "alpha": "",
        "eta": "0.01",
        "iterations": "1000",
        "burn_in": "200",
        "thin": "10",
        "seed": "0",
    },
    "dtm": {"kappa": "1.0"},
    "report": {"top_n": "10", "trajectory_words": "5"},
    "figures": {"width": "800", "height": "480"},
}


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters for every stage; built before any stage runs."""

    corpus_path: Path
    keep_categories: tuple[str, ...]
    anchor_day: int
    first_start: datetime.date
    n_slices: int
    stoplist: Path | None
    min_count: int
    threshold: float
    no_below: int
    no_above: float
    hyper: LdaHyperparams
    kappa: float
    top_n: int
    trajectory_words: int
    fig_width: int
    fig_height: int


def _coerce(section: str, key: str, raw: str, kind: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "date":
            return datetime.date.fromisoformat(raw)
        raise AssertionError(kind)
    except ValueError as exc:
        raise ValidationError(f"config {section}.{key}: cannot parse {raw!r} as {kind}") from exc


def load_config(
    config_path: str | Path | None,
    overrides: list[str] | None = None,
    seed: int | None = None,
) -> RunConfig:
    """Merge defaults, the optional INI file, --set overrides and --seed, then
    validate every stage's parameters up front."""
    raw = {section: dict(values) for section, values in _DEFAULTS.items()}

    if config_path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        read = parser.read(config_path, encoding="utf-8")
        if not read:
            raise ValidationError(f"config file not found: {config_path}")
        for section in parser.sections():
            if section not in raw:
                raise ValidationError(f"config: unknown section [{section}]")
            for key, value in parser.items(section):
                if key not in raw[section]:
                    raise ValidationError(f"config: unknown key {section}.{key}")
                raw[section][key] = value

    for item in overrides or []:
        head, sep, value = item.partition("=")
        if not sep or "." not in head:
            raise ValidationError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        section, _, key = head.partition(".")
        if section not in raw or key not in raw[section]:
            raise ValidationError(f"--set: unknown key {section}.{key}")
        raw[section][key] = value

    if seed is not None:
        raw["lda"]["seed"] = str(seed)

    corpus_path = raw["corpus"]["path"].strip()
    if not corpus_path:
        raise ValidationError(
            "corpus.path is required (set it in the config file or with --set corpus.path=...)"
        )
    keep = tuple(
        tag.strip() for tag in raw["corpus"]["keep_categories"].split(",") if tag.strip()
    )
    if not keep:
        raise ValidationError("corpus.keep_categories must name at least one category")

    anchor_day = _coerce("corpus", "anchor_day", raw["corpus"]["anchor_day"], "int")
    if not 1 <= anchor_day <= 31:
        raise ValidationError(f"corpus.anchor_day must be in 1..31, got {anchor_day}")
    first_start = _coerce("corpus", "first_start", raw["corpus"]["first_start"], "date")
    if first_start != _anchor_in_month(first_start.year, first_start.month, anchor_day):
        raise ValidationError(
            f"corpus.first_start {first_start} does not fall on anchor day {anchor_day}"
        )
    n_slices = _coerce("corpus", "n_slices", raw["corpus"]["n_slices"], "int")
    if n_slices < 1:
        raise ValidationError(f"corpus.n_slices must be >= 1, got {n_slices}")

    min_count = _coerce("preprocess", "min_count", raw["preprocess"]["min_count"], "int")
    if min_count < 1:
        raise ValidationError(f"preprocess.min_count must be >= 1, got {min_count}")
    threshold = _coerce("preprocess", "threshold", raw["preprocess"]["threshold"], "float")
    no_below = _coerce("preprocess", "no_below", raw["preprocess"]["no_below"], "int")
    if no_below < 1:
        raise ValidationError(f"preprocess.no_below must be >= 1, got {no_below}")
    no_above = _coerce("preprocess", "no_above", raw["preprocess"]["no_above"], "float")
    if not 0 < no_above <= 1:
        raise ValidationError(f"preprocess.no_above must be in (0, 1], got {no_above}")

    alpha_raw = raw["lda"]["alpha"].strip()
    try:
        hyper = LdaHyperparams(
            k=_coerce("lda", "k", raw["lda"]["k"], "int"),
            alpha=_coerce("lda", "alpha", alpha_raw, "float") if alpha_raw else None,
            eta=_coerce("lda", "eta", raw["lda"]["eta"], "float"),
            iterations=_coerce("lda", "iterations", raw["lda"]["iterations"], "int"),
            burn_in=_coerce("lda", "burn_in", raw["lda"]["burn_in"], "int"),
            thin=_coerce("lda", "thin", raw["lda"]["thin"], "int"),
            seed=_coerce("lda", "seed", raw["lda"]["seed"], "int"),
        )
    except ValueError as exc:
        raise ValidationError(f"config [lda]: {exc}") from exc

    kappa = _coerce("dtm", "kappa", raw["dtm"]["kappa"], "float")
    if kappa < 0:
        raise ValidationError(f"dtm.kappa must be >= 0, got {kappa}")
    top_n = _coerce("report", "top_n", raw["report"]["top_n"], "int")
    if top_n < 2:
        raise ValidationError(f"report.top_n must be >= 2, got {top_n}")
    trajectory_words = _coerce(
        "report", "trajectory_words", raw["report"]["trajectory_words"], "int"
    )
    if trajectory_words < 1:
        raise ValidationError(f"report.trajectory_words must be >= 1, got {trajectory_words}")
    fig_width = _coerce("figures", "width", raw["figures"]["width"], "int")
    fig_height = _coerce("figures", "height", raw["figures"]["height"], "int")
    if fig_width <= 0 or fig_height <= 0:
        raise ValidationError("figures.width and figures.height must be positive")

    stoplist_raw = raw["preprocess"]["stoplist"].strip()
    return RunConfig(
        corpus_path=Path(corpus_path),
        keep_categories=keep,
        anchor_day=anchor_day,
        first_start=first_start,
        n_slices=n_slices,
        stoplist=Path(stoplist_raw) if stoplist_raw else None,
        min_count=min_count,
        threshold=threshold,
        no_below=no_below,
        no_above=no_above,
        hyper=hyper,
        kappa=kappa,
        top_n=top_n,
        trajectory_words=trajectory_words,
        fig_width=fig_width,
        fig_height=fig_height,
    )


# Artifact name -> (workspace-relative path, producing subcommand).
_ARTIFACTS: dict[str, tuple[str, str]] = {
    "corpus": ("corpus.jsonl", "ingest"),
    "timeline": ("timeline.csv", "ingest"),
    "vocab": ("vocab.json", "preprocess"),
    "bows": ("bows.jsonl", "preprocess"),
    "model_static": ("model_static.json", "train --mode static"),
    "model_dtm": ("model_dtm.json", "train --mode dtm"),
    "coherence": ("coherence.json", "report"),
    "overlap": ("overlap.json", "report"),
    "intertopic": ("intertopic.csv", "report"),
    "trajectories": ("trajectories.csv", "report"),
}


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


class Workspace:
    """Artifact directory with a hashed manifest and a coarse command lock."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.manifest_path = self.root / "manifest.json"

    def load_manifest(self) -> dict:
        if not self.manifest_path.exists():
            return {"format": "newstm-workspace", "version": 1, "artifacts": {}}
        return json.loads(self.manifest_path.read_text(encoding="utf-8"))

    def save_manifest(self, manifest: dict) -> None:
        self.manifest_path.write_text(
            json.dumps(manifest, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )

    def path_for(self, name: str) -> Path:
        relpath, _ = _ARTIFACTS[name]
        return self.root / relpath

    def record(self, manifest: dict, name: str, inputs: dict[str, str]) -> None:
        """Hash the freshly written artifact and remember its input hashes."""
        path = self.path_for(name)
        relpath, _ = _ARTIFACTS[name]
        manifest["artifacts"][name] = {
            "path": relpath,
            "sha256": _sha256(path),
            "inputs": dict(sorted(inputs.items())),
        }

    def require(self, manifest: dict, name: str) -> Path:
        """Path of a prerequisite artifact, verified present, unmodified and not stale."""
        _, producer = _ARTIFACTS[name]
        entry = manifest["artifacts"].get(name)
        if entry is None:
            raise ValidationError(f"missing artifact {name!r}: run `newstm {producer}` first")
        path = self.root / entry["path"]
        if not path.exists():
            raise ValidationError(
                f"artifact file {path} has been removed: re-run `newstm {producer}`"
            )
        if _sha256(path) != entry["sha256"]:
            raise ValidationError(
                f"artifact {name!r} was modified outside the pipeline: re-run `newstm {producer}`"
            )
        for input_name, input_hash in entry.get("inputs", {}).items():
            current = manifest["artifacts"].get(input_name, {}).get("sha256")
            if current != input_hash:
                raise ValidationError(
                    f"artifact {name!r} is stale: its input {input_name!r} changed; "
                    f"re-run `newstm {producer}`"
                )
        return path

    def input_hashes(self, manifest: dict, names: list[str]) -> dict[str, str]:
        return {name: manifest["artifacts"][name]["sha256"] for name in names}

    @contextmanager
    def lock(self):
        self.root.mkdir(parents=True, exist_ok=True)
        lock_path = self.root / ".lock"
        try:
            fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise RuntimeError(
                f"workspace {self.root} is locked by another command "
                f"(remove {lock_path} if stale)"
            ) from None
        try:
            os.write(fd, f"{os.getpid()}\n".encode())
            os.close(fd)
            yield
        finally:
            lock_path.unlink(missing_ok=True)


def cmd_ingest(config: RunConfig, ws: Workspace) -> None:
    corpus = load_corpus(config.corpus_path)
    series = articles_per_day(corpus)  # publication timeline over the full load
    filtered = filter_by_category(corpus, config.keep_categories)
    slices = slice_monthly(filtered, config.anchor_day, config.first_start, config.n_slices)
    logger.info(
        "slice sizes: %s (total %d)",
        [len(s) for s in slices],
        sum(len(s) for s in slices),
    )
    manifest = ws.load_manifest()
    save_corpus(filtered, ws.path_for("corpus"))
    write_timeline_csv(series, ws.path_for("timeline"))
    ws.record(manifest, "corpus", inputs={})
    ws.record(manifest, "timeline", inputs={})
    ws.save_manifest(manifest)


def cmd_preprocess(config: RunConfig, ws: Workspace) -> None:
    manifest = ws.load_manifest()
    corpus = load_corpus(ws.require(manifest, "corpus"))
    stopwords = load_stopwords(config.stoplist)
    streams = [
        TokenStream(doc.id, remove_stopwords(tokenize(doc.title + " " + doc.body), stopwords))
        for doc in corpus
    ]
    phrases = fit_phrases(streams, config.min_count, config.threshold)
    merged = [TokenStream(s.doc_id, apply_phrases(phrases, s.tokens)) for s in streams]
    vocab = build_vocabulary(merged, config.no_below, config.no_above)
    bows = [to_bow(s, vocab) for s in merged]
    write_vocabulary(vocab, ws.path_for("vocab"))
    write_bows(bows, ws.path_for("bows"))
    inputs = ws.input_hashes(manifest, ["corpus"])
    ws.record(manifest, "vocab", inputs=inputs)
    ws.record(manifest, "bows", inputs=inputs)
    ws.save_manifest(manifest)


def cmd_train(config: RunConfig, ws: Workspace, mode: str) -> None:
    manifest = ws.load_manifest()
    bows = read_bows(ws.require(manifest, "bows"))
    vocab = read_vocabulary(ws.require(manifest, "vocab"))
    if mode == "static":
        model = train_lda(bows, len(vocab), config.hyper)
        save_lda(model, ws.path_for("model_static"))
        ws.record(manifest, "model_static", inputs=ws.input_hashes(manifest, ["vocab", "bows"]))
    else:
        corpus = load_corpus(ws.require(manifest, "corpus"))
        slices = slice_monthly(
            corpus, config.anchor_day, config.first_start, config.n_slices
        )
        by_id = {bow.doc_id: bow for bow in bows}
        try:
            sliced = [(s, [by_id[doc_id] for doc_id in s.doc_ids]) for s in slices]
        except KeyError as exc:
            raise RuntimeError(
                f"document {exc.args[0]!r} has no bag-of-words vector; "
                "re-run `newstm preprocess`"
            ) from exc
        model = train_dtm(
            sliced, config.hyper.k, config.hyper, config.kappa, vocab_size=len(vocab)
        )
        save_dtm(model, ws.path_for("model_dtm"))
        ws.record(
            manifest,
            "model_dtm",
            inputs=ws.input_hashes(manifest, ["corpus", "vocab", "bows"]),
        )
    ws.save_manifest(manifest)


def cmd_report(config: RunConfig, ws: Workspace) -> None:
    manifest = ws.load_manifest()
    model = load_lda(ws.require(manifest, "model_static"))
    bows = read_bows(ws.require(manifest, "bows"))
    vocab = read_vocabulary(ws.require(manifest, "vocab"))
    dtm_model = load_dtm(ws.require(manifest, "model_dtm"))

    report = umass_coherence(model, bows, config.top_n)
    logger.info("mean UMass coherence over %d topics: %.4f", model.n_topics, report.mean)
    write_coherence_json(report, ws.path_for("coherence"))
    write_overlap_json(topic_overlap(model, config.top_n), config.top_n, ws.path_for("overlap"))
    write_intertopic_csv(intertopic_map(model), ws.path_for("intertopic"))

    final_slice = dtm_model.n_slices - 1
    all_series = []
    for topic in range(dtm_model.base_hyper.k):
        summary = top_words_at(
            dtm_model, topic, final_slice, config.trajectory_words, vocab
        )
        words = [term for term, _ in summary.terms]
        all_series.append(trajectory(dtm_model, topic, words, vocab))
    write_trajectory_csv(all_series, ws.path_for("trajectories"))

    eval_inputs = ws.input_hashes(manifest, ["model_static", "bows"])
    ws.record(manifest, "coherence", inputs=eval_inputs)
    ws.record(manifest, "overlap", inputs=eval_inputs)
    ws.record(manifest, "intertopic", inputs=eval_inputs)
    ws.record(
        manifest, "trajectories", inputs=ws.input_hashes(manifest, ["model_dtm", "vocab"])
    )
    ws.save_manifest(manifest)


def cmd_plot(config: RunConfig, ws: Workspace) -> None:
    from newstm.viz import FigureSpec, plot_intertopic, plot_timeline, plot_trajectories

    manifest = ws.load_manifest()
    figures_dir = ws.root / "figures"

    series = read_timeline_csv(ws.require(manifest, "timeline"))
    plot_timeline(
        series,
        FigureSpec(
            title="Articles per day",
            width=config.fig_width,
            height=config.fig_height,
            path=figures_dir / "timeline.svg",
        ),
    )

    topic_map = read_intertopic_csv(ws.require(manifest, "intertopic"))
    plot_intertopic(
        topic_map,
        FigureSpec(
            title="Intertopic distance map",
            width=config.fig_width,
            height=config.fig_height,
            path=figures_dir / "intertopic.svg",
        ),
    )

    for ts in read_trajectory_csv(ws.require(manifest, "trajectories")):
        plot_trajectories(
            ts,
            FigureSpec(
                title=f"Topic {ts.topic_id} keyword trajectories",
                width=config.fig_width,
                height=config.fig_height,
                path=figures_dir / f"trajectory_topic_{ts.topic_id}.svg",
            ),
        )
    logger.info("figures written to %s", figures_dir)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--workspace", default=argparse.SUPPRESS, help="workspace directory (default: ./workspace)"
    )
    common.add_argument(
        "--config", default=argparse.SUPPRESS, help="INI config file; flags win over the file"
    )
    common.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS, help="override lda.seed"
    )
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        metavar="SECTION.KEY=VALUE",
        default=argparse.SUPPRESS,
        help="override any config key (repeatable)",
    )

    parser = argparse.ArgumentParser(
        prog="newstm",
        description="Topic-modelling pipeline over a dated news corpus.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="load, filter and summarise the corpus")
    sub.add_parser("preprocess", parents=[common], help="tokenise and build vocab + bows")
    train = sub.add_parser("train", parents=[common], help="train a topic model")
    train.add_argument("--mode", choices=("static", "dtm"), required=True)
    sub.add_parser("report", parents=[common], help="coherence/overlap/map/trajectory exports")
    sub.add_parser("plot", parents=[common], help="render SVG figures from the exports")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )
    workspace = Workspace(getattr(args, "workspace", "workspace"))
    try:
        config = load_config(
            getattr(args, "config", None),
            getattr(args, "overrides", None),
            getattr(args, "seed", None),
        )
        with workspace.lock():
            if args.command == "ingest":
                cmd_ingest(config, workspace)
            elif args.command == "preprocess":
                cmd_preprocess(config, workspace)
            elif args.command == "train":
                cmd_train(config, workspace, args.mode)
            elif args.command == "report":
                cmd_report(config, workspace)
            elif args.command == "plot":
                cmd_plot(config, workspace)
        return 0
    except ValidationError as exc:
        logger.error("%s", exc)
        return 1
    except (OSError, ValueError, RuntimeError) as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
