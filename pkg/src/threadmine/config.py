"""Flat key-value pipeline configuration.

A config file is UTF-8 text with one ``key = value`` per line; ``#``
starts a comment and blank lines are ignored.  Relative paths are
resolved against the directory containing the config file.  Unknown keys
are rejected so typos fail loudly.

Input paths are resolved against the config file directory; ``output_dir``
is resolved against the working directory.

Recognized keys (defaults in parentheses):

    corpus                       path to the JSONL forum dump (required)
    stopwords                    path to a stopword file (bundled list)
    labels                       path to the thread_id,label CSV
    output_dir                   artifact directory ("out")
    seed                         master seed for all randomness (42)

    keywords.<name>              path to a keyword file, one per set
    keywords.<name>.threshold    per-set occurrence threshold (1)
    class.<Name>                 space-separated class-defining words

    embedding.dims (100)         embedding.window (10)
    embedding.epochs (5)         embedding.negatives (5)
    embedding.min_count (5)      embedding.subsample (1e-3)
    embedding.learning_rate (0.025)
    embedding.min_learning_rate (1e-4)
    embedding.workers (1)        embedding.save_text (false)

    identify.t_sim (0.96)
    classify.trees (100)         classify.max_depth (0 = unlimited)
    classify.min_leaf (1)        classify.boost (2.0)
    classify.contextual (true)
    evaluate.folds (10)

Overrides are ``key=value`` strings (the CLI's ``--set``); they replace
file values before validation, so an override behaves exactly like
editing the file.  The environment variable ``THREADMINE_OUTPUT_DIR``
overrides ``output_dir`` only, and explicit flags beat it.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .classify import ClassSpec, EnsembleParams
from .embedding import TrainParams
from .errors import ConfigError
from .forest import ForestParams

__all__ = ["PipelineConfig", "load_config", "parse_config_text", "canonical_text"]

_SIMPLE_KEYS = {
    "corpus",
    "stopwords",
    "labels",
    "output_dir",
    "seed",
    "embedding.dims",
    "embedding.window",
    "embedding.epochs",
    "embedding.negatives",
    "embedding.min_count",
    "embedding.subsample",
    "embedding.learning_rate",
    "embedding.min_learning_rate",
    "embedding.workers",
    "embedding.save_text",
    "identify.t_sim",
    "classify.trees",
    "classify.max_depth",
    "classify.min_leaf",
    "classify.boost",
    "classify.contextual",
    "evaluate.folds",
}

_KEYWORD_PATH_RE = re.compile(r"keywords\.([A-Za-z0-9_-]+)$")
_KEYWORD_THRESHOLD_RE = re.compile(r"keywords\.([A-Za-z0-9_-]+)\.threshold$")
_CLASS_RE = re.compile(r"class\.([A-Za-z0-9_-]+)$")


def _known_key(key: str) -> bool:
    return (
        key in _SIMPLE_KEYS
        or _KEYWORD_PATH_RE.fullmatch(key) is not None
        or _KEYWORD_THRESHOLD_RE.fullmatch(key) is not None
        or _CLASS_RE.fullmatch(key) is not None
    )


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse flat ``key = value`` text into an ordered dict."""
    items: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if not _known_key(key):
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        if key in items:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        items[key] = value
    return items


def canonical_text(items: Mapping[str, str]) -> str:
    """Stable serialization of an effective config, used for hashing."""
    return "\n".join(f"{k} = {items[k]}" for k in sorted(items))


def _get_int(items: Mapping[str, str], key: str, default: int) -> int:
    if key not in items:
        return default
    try:
        return int(items[key])
    except ValueError:
        raise ConfigError(f"config key {key!r}: expected an integer, got {items[key]!r}") from None


def _get_float(items: Mapping[str, str], key: str, default: float) -> float:
    if key not in items:
        return default
    try:
        return float(items[key])
    except ValueError:
        raise ConfigError(f"config key {key!r}: expected a number, got {items[key]!r}") from None


def _get_bool(items: Mapping[str, str], key: str, default: bool) -> bool:
    if key not in items:
        return default
    value = items[key].lower()
    if value in ("true", "yes", "1", "on"):
        return True
    if value in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"config key {key!r}: expected true/false, got {items[key]!r}")


@dataclass(frozen=True)
class PipelineConfig:
    """Validated configuration for one pipeline run."""

    base_dir: Path
    corpus_path: Path
    stopwords_path: Path | None
    labels_path: Path | None
    output_dir: Path
    seed: int
    keyword_files: tuple[tuple[str, Path, int], ...]  # (set name, path, threshold)
    class_specs: tuple[ClassSpec, ...]
    train_params: TrainParams
    min_count: int
    save_text: bool
    t_sim: float
    ensemble_params: EnsembleParams
    folds: int
    config_hash: str
    items: dict[str, str]


def _build(items: Mapping[str, str], base_dir: Path) -> PipelineConfig:
    def path_of(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else base_dir / p

    if "corpus" not in items:
        raise ConfigError("config is missing required key 'corpus'")
    corpus_path = path_of(items["corpus"])
    stopwords_path = path_of(items["stopwords"]) if "stopwords" in items else None
    labels_path = path_of(items["labels"]) if "labels" in items else None
    # input paths resolve against the config file; outputs against the cwd,
    # so a config bundled inside an installed package stays read-only
    output_dir = Path(items.get("output_dir", "out"))

    seed = _get_int(items, "seed", 42)

    keyword_files = []
    for key, value in items.items():
        match = _KEYWORD_PATH_RE.fullmatch(key)
        if match:
            name = match.group(1)
            threshold = _get_int(items, f"keywords.{name}.threshold", 1)
            if threshold < 1:
                raise ConfigError(f"keywords.{name}.threshold must be >= 1")
            keyword_files.append((name, path_of(value), threshold))
    for key in items:
        match = _KEYWORD_THRESHOLD_RE.fullmatch(key)
        if match and f"keywords.{match.group(1)}" not in items:
            raise ConfigError(
                f"config key {key!r} has no matching keywords.{match.group(1)} path"
            )

    class_specs = []
    for key, value in items.items():
        match = _CLASS_RE.fullmatch(key)
        if match:
            words = tuple(value.split())
            if not words:
                raise ConfigError(f"config key {key!r}: class has no words")
            class_specs.append(ClassSpec(name=match.group(1), words=words))

    dims = _get_int(items, "embedding.dims", 100)
    window = _get_int(items, "embedding.window", 10)
    if dims < 1:
        raise ConfigError("embedding.dims must be >= 1")
    if window < 1:
        raise ConfigError("embedding.window must be >= 1")
    train_params = TrainParams(
        dims=dims,
        window=window,
        epochs=_get_int(items, "embedding.epochs", 5),
        negatives=_get_int(items, "embedding.negatives", 5),
        learning_rate=_get_float(items, "embedding.learning_rate", 0.025),
        min_learning_rate=_get_float(items, "embedding.min_learning_rate", 1e-4),
        subsample=_get_float(items, "embedding.subsample", 1e-3),
        seed=seed,
        workers=_get_int(items, "embedding.workers", 1),
    )

    t_sim = _get_float(items, "identify.t_sim", 0.96)
    if not 0.0 < t_sim <= 1.0:
        raise ConfigError(f"identify.t_sim must be in (0, 1], got {t_sim}")

    max_depth = _get_int(items, "classify.max_depth", 0)
    forest = ForestParams(
        n_trees=_get_int(items, "classify.trees", 100),
        max_depth=None if max_depth == 0 else max_depth,
        min_leaf=_get_int(items, "classify.min_leaf", 1),
        seed=seed,
    )
    ensemble = EnsembleParams(
        boost=_get_float(items, "classify.boost", 2.0),
        use_contextual=_get_bool(items, "classify.contextual", True),
        forest=forest,
    )

    folds = _get_int(items, "evaluate.folds", 10)
    if folds < 2:
        raise ConfigError("evaluate.folds must be >= 2")

    digest = hashlib.sha256(canonical_text(items).encode("utf-8")).hexdigest()[:12]
    return PipelineConfig(
        base_dir=base_dir,
        corpus_path=corpus_path,
        stopwords_path=stopwords_path,
        labels_path=labels_path,
        output_dir=output_dir,
        seed=seed,
        keyword_files=tuple(keyword_files),
        class_specs=tuple(class_specs),
        train_params=train_params,
        min_count=_get_int(items, "embedding.min_count", 5),
        save_text=_get_bool(items, "embedding.save_text", False),
        t_sim=t_sim,
        ensemble_params=ensemble,
        folds=folds,
        config_hash=digest,
        items=dict(items),
    )


def load_config(
    path: str | Path,
    overrides: Sequence[str] = (),
    env: Mapping[str, str] | None = None,
) -> PipelineConfig:
    """Load, override, and validate a config file.

    ``overrides`` are ``key=value`` strings applied on top of the file;
    ``THREADMINE_OUTPUT_DIR`` (if set) overrides ``output_dir`` but loses
    to an explicit override.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    items = parse_config_text(path.read_text(encoding="utf-8"), source=str(path))

    env = os.environ if env is None else env
    env_out = env.get("THREADMINE_OUTPUT_DIR")
    if env_out:
        items["output_dir"] = env_out

    for override in overrides:
        if "=" not in override:
            raise ConfigError(f"override must be key=value, got {override!r}")
        key, value = (part.strip() for part in override.split("=", 1))
        if not _known_key(key):
            raise ConfigError(f"unknown config key in override: {key!r}")
        items[key] = value

    return _build(items, base_dir=path.parent)
