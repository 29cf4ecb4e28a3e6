"""Command-line surface tying the pipeline together.

Subcommands::

    threadmine stats       CONFIG   corpus summary + CCDF export
    threadmine train-embed CONFIG   train and save the word embedding
    threadmine identify    CONFIG   keyword seeding + similarity expansion
    threadmine train       CONFIG   train the per-class forest ensemble
    threadmine predict     CONFIG   classify threads with a trained model
    threadmine evaluate    CONFIG   stratified cross-validation report

Artifacts land in the configured output directory under fixed names
(``embedding.bin``, ``selection.csv``, ``model.bin``, ...), so later
subcommands find what earlier ones produced.  Every output file carries a
header with the tool version, a hash of the effective config, and the
master seed; with ``embedding.workers = 1`` a rerun of any subcommand
reproduces its CSV outputs byte for byte.

On failure the process exits nonzero after printing a single line
``error: <message>`` to stderr and removing any partially written
artifacts.  A lock file guards the output directory against concurrent
runs.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .classify import load_model, predict, save_model, train_ensemble
from .config import PipelineConfig, load_config
from .corpus import ForumCorpus, corpus_stats, load_corpus, load_labels
from .embedding import load_embedding, save_embedding, train_skipgram
from .errors import ConfigError, ThreadMineError
from .identify import KeywordSet, identify_threads, load_keyword_set
from .metrics import ConfusionMatrix, evaluation_report, stratified_kfold
from .preprocess import build_vocabulary, load_stopwords, tokenize_thread
from .threadspace import project_corpus

logger = logging.getLogger(__name__)

_LOCK_NAME = ".threadmine.lock"

EMBEDDING_FILE = "embedding.bin"
EMBEDDING_TEXT_FILE = "embedding.txt"
SELECTION_FILE = "selection.csv"
MODEL_FILE = "model.bin"


class Workspace:
    """Locked output directory that cleans up partial artifacts on failure."""

    def __init__(self, cfg: PipelineConfig):
        self.dir = cfg.output_dir
        self.header = f"# threadmine {__version__} config={cfg.config_hash} seed={cfg.seed}"
        self.meta = {
            "tool": "threadmine",
            "version": __version__,
            "config": cfg.config_hash,
            "seed": cfg.seed,
        }
        self._lock = self.dir / _LOCK_NAME
        self._written: list[Path] = []

    def __enter__(self) -> "Workspace":
        self.dir.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self._lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(
                f"output directory {self.dir} is locked by another run "
                f"(remove {self._lock} if that run is dead)"
            ) from None
        with os.fdopen(fd, "w") as fh:
            fh.write(f"{os.getpid()}\n")
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is not None:
            for path in self._written:
                try:
                    path.unlink()
                except OSError:
                    pass
        try:
            self._lock.unlink()
        except OSError:
            pass

    def path(self, name: str) -> Path:
        path = self.dir / name
        self._written.append(path)
        return path

    def write_csv(self, name: str, columns: Sequence[str], rows: Sequence[Sequence[object]]) -> Path:
        path = self.path(name)
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(self.header + "\n")
            writer = csv.writer(fh)
            writer.writerow(columns)
            writer.writerows(rows)
        return path

    def write_json(self, name: str, payload: dict) -> Path:
        path = self.path(name)
        document = {"meta": self.meta, **payload}
        path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _load_inputs(cfg: PipelineConfig):
    corpus = load_corpus(cfg.corpus_path)
    stopwords = load_stopwords(cfg.stopwords_path)
    docs = [tokenize_thread(t, stopwords) for t in corpus]
    return corpus, stopwords, docs


def _load_keyword_sets(cfg: PipelineConfig, stopwords: frozenset[str]) -> list[KeywordSet]:
    if not cfg.keyword_files:
        raise ConfigError("no keyword sets configured (add keywords.<name> = <path>)")
    return [
        load_keyword_set(path, name=name, threshold=threshold, stopwords=stopwords)
        for name, path, threshold in cfg.keyword_files
    ]


def _require_embedding(cfg: PipelineConfig):
    path = cfg.output_dir / EMBEDDING_FILE
    if not path.is_file():
        raise ConfigError(f"missing {path}; run 'threadmine train-embed' first")
    return load_embedding(path)


def _require_labels(cfg: PipelineConfig, corpus: ForumCorpus):
    if cfg.labels_path is None:
        raise ConfigError("config key 'labels' is required for this subcommand")
    if not cfg.class_specs:
        raise ConfigError("no classes configured (add class.<Name> = <words>)")
    classes = [s.name for s in cfg.class_specs]
    return load_labels(cfg.labels_path, corpus, classes)


def cmd_stats(cfg: PipelineConfig, ws: Workspace) -> None:
    corpus = load_corpus(cfg.corpus_path)
    report = corpus_stats(corpus)
    ws.write_json("stats.json", report.to_dict())
    ws.write_csv(
        "ccdf.csv",
        ["k", "p_ge_k"],
        [[k, _fmt(p)] for k, p in report.ccdf],
    )
    print(
        f"{corpus.name}: {report.thread_count} threads, {report.post_count} posts, "
        f"{report.author_count} authors; {report.frac_one_post:.1%} single-post, "
        f"{report.frac_le_two_posts:.1%} with <= 2 posts"
    )


def cmd_train_embed(cfg: PipelineConfig, ws: Workspace) -> None:
    _, _, docs = _load_inputs(cfg)
    vocab = build_vocabulary(docs, min_count=cfg.min_count)
    if vocab.d == 0:
        raise ConfigError(
            f"vocabulary is empty at embedding.min_count={cfg.min_count}; lower it"
        )
    emb = train_skipgram(docs, vocab, cfg.train_params)
    save_embedding(emb, ws.path(EMBEDDING_FILE), format="binary")
    if cfg.save_text:
        save_embedding(emb, ws.path(EMBEDDING_TEXT_FILE), format="text")
    losses = ", ".join(f"{x:.4f}" for x in emb.epoch_losses)
    print(f"trained {emb.d} words x {emb.m} dims; epoch losses: {losses}")


def cmd_identify(cfg: PipelineConfig, ws: Workspace) -> None:
    emb = _require_embedding(cfg)
    corpus, stopwords, docs = _load_inputs(cfg)
    sets = _load_keyword_sets(cfg, stopwords)
    vectors, skipped = project_corpus(docs, emb)
    result = identify_threads(docs, sets, vectors, cfg.t_sim)

    rows = []
    for tid in sorted(result.selected):
        provenance = result.provenance[tid]
        score = _fmt(result.scores[tid]) if tid in result.scores else ""
        rows.append([tid, provenance, score])
    ws.write_csv(SELECTION_FILE, ["thread_id", "provenance", "score"], rows)

    total = len(corpus)
    selected = len(result.selected)
    fraction = selected / total if total else 0.0
    ws.write_json(
        "identify_summary.json",
        {
            "threads": total,
            "keyword_selected": len(result.seeds),
            "similarity_selected": len(result.expanded),
            "selected": selected,
            "selected_fraction": fraction,
            "unprojectable": len(skipped),
            "t_sim": cfg.t_sim,
        },
    )
    print(
        f"selected {selected} of {total} threads ({fraction:.1%}): "
        f"{len(result.seeds)} by keyword + {len(result.expanded)} by similarity; "
        f"{len(skipped)} unprojectable"
    )


def _labeled_items(corpus, docs, labels, vectors):
    by_id = {doc.thread_id: doc for doc in docs}
    items = []
    dropped = 0
    for thread in corpus:
        tid = thread.thread_id
        if tid not in labels.labels:
            continue
        if tid in vectors:
            items.append((thread, by_id[tid], labels.labels[tid]))
        else:
            dropped += 1
    if dropped:
        logger.warning("%d labeled threads have no in-vocabulary tokens; dropped", dropped)
    if not items:
        raise ConfigError("no labeled thread is projectable; cannot continue")
    return items


def cmd_train(cfg: PipelineConfig, ws: Workspace) -> None:
    emb = _require_embedding(cfg)
    corpus, stopwords, docs = _load_inputs(cfg)
    labels = _require_labels(cfg, corpus)
    sets = _load_keyword_sets(cfg, stopwords) if cfg.keyword_files else []
    vectors, _ = project_corpus(docs, emb)
    items = _labeled_items(corpus, docs, labels, vectors)

    model = train_ensemble(items, cfg.class_specs, emb, sets, cfg.ensemble_params)
    save_model(model, ws.path(MODEL_FILE))
    counts = {c: sum(1 for _, _, y in items if y == c) for c in model.classes}
    summary = ", ".join(f"{c}={n}" for c, n in counts.items())
    print(f"trained ensemble on {len(items)} labeled threads ({summary})")


def _selection_targets(cfg: PipelineConfig) -> set[str] | None:
    path = cfg.output_dir / SELECTION_FILE
    if not path.is_file():
        return None
    targets = set()
    with path.open("r", encoding="utf-8", newline="") as fh:
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(rows, None)
        if header is None or header[0] != "thread_id":
            raise ConfigError(f"{path}: not a selection file")
        for row in rows:
            if row:
                targets.add(row[0])
    return targets


def cmd_predict(cfg: PipelineConfig, ws: Workspace) -> None:
    emb = _require_embedding(cfg)
    model_path = cfg.output_dir / MODEL_FILE
    if not model_path.is_file():
        raise ConfigError(f"missing {model_path}; run 'threadmine train' first")
    model = load_model(model_path, emb)

    corpus, _, docs = _load_inputs(cfg)
    vectors, _ = project_corpus(docs, emb)
    targets = _selection_targets(cfg)
    if targets is None:
        logger.warning("no %s found; predicting over the whole corpus", SELECTION_FILE)
        targets = {t.thread_id for t in corpus}

    by_id = {doc.thread_id: doc for doc in docs}
    rows = []
    skipped = 0
    per_class: dict[str, int] = {c: 0 for c in model.classes}
    for tid in sorted(targets):
        if tid not in vectors:
            skipped += 1
            continue
        result = predict(model, corpus[tid], by_id[tid])
        per_class[result.label] += 1
        rows.append([tid, result.label] + [_fmt(result.scores[c]) for c in model.classes])

    columns = ["thread_id", "predicted_class"] + [f"vote_{c}" for c in model.classes]
    ws.write_csv("predictions.csv", columns, rows)
    summary = ", ".join(f"{c}={n}" for c, n in per_class.items())
    print(f"predicted {len(rows)} threads ({summary}); {skipped} unprojectable skipped")


def cmd_evaluate(cfg: PipelineConfig, ws: Workspace) -> None:
    emb = _require_embedding(cfg)
    corpus, stopwords, docs = _load_inputs(cfg)
    labels = _require_labels(cfg, corpus)
    sets = _load_keyword_sets(cfg, stopwords) if cfg.keyword_files else []
    vectors, _ = project_corpus(docs, emb)
    items = _labeled_items(corpus, docs, labels, vectors)

    y = [label for _, _, label in items]
    folds = stratified_kfold(y, cfg.folds, seed=cfg.seed)
    classes = [s.name for s in cfg.class_specs]

    fold_cms = []
    for fold_no, test_idx in enumerate(folds):
        test = set(int(i) for i in test_idx)
        train_items = [it for i, it in enumerate(items) if i not in test]
        fold_forest = dataclasses.replace(
            cfg.ensemble_params.forest, seed=cfg.seed + fold_no + 1
        )
        fold_params = dataclasses.replace(cfg.ensemble_params, forest=fold_forest)
        model = train_ensemble(train_items, cfg.class_specs, emb, sets, fold_params)
        y_true = [items[i][2] for i in sorted(test)]
        y_pred = [predict(model, items[i][0], items[i][1]).label for i in sorted(test)]
        fold_cms.append(ConfusionMatrix.from_predictions(y_true, y_pred, classes))

    report = evaluation_report(fold_cms)
    ws.write_json("evaluation.json", report.to_dict())
    ws.write_csv(
        "folds.csv",
        ["fold", "n_test", "accuracy", "weighted_f1"],
        [
            [i, int(cm.total), _fmt(a), _fmt(f)]
            for i, (cm, a, f) in enumerate(
                zip(fold_cms, report.fold_accuracy, report.fold_weighted_f1)
            )
        ],
    )
    print(report.format_table())


_COMMANDS: dict[str, Callable[[PipelineConfig, Workspace], None]] = {
    "stats": cmd_stats,
    "train-embed": cmd_train_embed,
    "identify": cmd_identify,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threadmine",
        description="Mine forum dumps: train embeddings, identify threads of "
        "interest, and classify them into user-defined classes.",
    )
    parser.add_argument("--version", action="version", version=f"threadmine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("config", type=Path, help="path to the pipeline config file")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config key (repeatable); beats file and environment",
        )
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument(
            "--output-dir", type=Path, default=None, help="override the output directory"
        )
        p.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.output_dir is not None:
        overrides.append(f"output_dir={args.output_dir}")

    try:
        cfg = load_config(args.config, overrides=overrides)
        with Workspace(cfg) as ws:
            _COMMANDS[args.command](cfg, ws)
    except ThreadMineError as exc:
        message = " ".join(str(exc).split())
        print(f"error: {message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
