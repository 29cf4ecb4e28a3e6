"""Class-affinity weighted thread classification.

The classifier builds one view of the corpus per user-defined class:

1. Each class is placed in word space as the mean vector of its defining
   words (its center of gravity).
2. Every vocabulary word gets an affinity for the class: the softmax over
   the whole vocabulary of its cosine similarity to the class vector.
   Affinities are positive and sum to one.
3. The word matrix is rescaled column-by-column with those affinities,
   and threads are projected (avg ‖ max) through the rescaled matrix,
   yielding class-specific thread features.
4. For each class, a random forest is trained on all labeled threads
   using that class's features, with the class's own examples upweighted
   by ``boost``.  At prediction time every per-class forest casts one
   vote and the plurality wins.

Optionally, contextual features (first-post shape, reply statistics, and
keyword-set hit counts) are appended to the embedding features; they
carry signal that the words alone do not.
"""

from __future__ import annotations

import hashlib
import logging
import pickle
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import Thread
from .embedding import EmbeddingMatrix
from .errors import ClassificationError
from .forest import ForestParams, RandomForest, train_forest
from .identify import KeywordSet, set_occurrences
from .preprocess import TokenizedDoc
from .threadspace import _token_indices

__all__ = [
    "ClassSpec",
    "ContextualFeatures",
    "FeatureLayout",
    "EnsembleParams",
    "EnsembleModel",
    "Prediction",
    "class_vector",
    "affinity_from_similarities",
    "affinity_vector",
    "weighted_thread_projection",
    "contextual_features",
    "train_ensemble",
    "predict",
    "max_vote",
    "save_model",
    "load_model",
    "embedding_fingerprint",
]

logger = logging.getLogger(__name__)

_BUNDLE_VERSION = 1


@dataclass(frozen=True)
class ClassSpec:
    """A user-defined class: a name and the words that characterize it."""

    name: str
    words: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.words:
            raise ClassificationError(f"class {self.name!r} has no defining words")


@dataclass(frozen=True)
class ContextualFeatures:
    """Non-lexical thread signals appended to the embedding features."""

    newlines_first_post: int
    length_first_post: int
    reply_count: int
    avg_reply_newlines: float
    avg_reply_length: float
    keyword_set_counts: tuple[int, ...]

    def to_vector(self) -> np.ndarray:
        return np.asarray(
            [
                self.newlines_first_post,
                self.length_first_post,
                self.reply_count,
                self.avg_reply_newlines,
                self.avg_reply_length,
                *self.keyword_set_counts,
            ],
            dtype=np.float64,
        )


@dataclass(frozen=True)
class FeatureLayout:
    """Describes the feature vector fed to every forest."""

    m: int
    n_keyword_sets: int
    use_contextual: bool

    @property
    def length(self) -> int:
        n = 2 * self.m
        if self.use_contextual:
            n += 5 + self.n_keyword_sets
        return n


@dataclass(frozen=True)
class EnsembleParams:
    """Training knobs for the per-class forest ensemble.

    ``boost`` is the sample weight given to a class's own examples in its
    forest (all other examples weigh 1).
    """

    boost: float = 2.0
    use_contextual: bool = True
    forest: ForestParams = field(default_factory=ForestParams)

    def __post_init__(self) -> None:
        if self.boost <= 0:
            raise ClassificationError("boost must be positive")


@dataclass
class EnsembleModel:
    """One affinity vector and one forest per class, plus shared context."""

    classes: tuple[str, ...]
    affinities: dict[str, np.ndarray]
    forests: dict[str, RandomForest]
    layout: FeatureLayout
    keyword_sets: tuple[KeywordSet, ...]
    embedding_hash: str
    params: EnsembleParams
    embedding: EmbeddingMatrix | None = None


@dataclass(frozen=True)
class Prediction:
    """Final label plus the per-forest votes and summed vote fractions."""

    label: str
    forest_votes: dict[str, str]
    scores: dict[str, float]


def class_vector(spec: ClassSpec, emb: EmbeddingMatrix) -> np.ndarray:
    """Mean embedding of the class's in-vocabulary words.

    Out-of-vocabulary defining words are logged as warnings; if none of
    the words is known the class cannot be represented and this raises.
    """
    ids = []
    for word in spec.words:
        if word in emb.vocab:
            ids.append(emb.vocab[word])
        else:
            logger.warning("class %s: defining word %r not in vocabulary", spec.name, word)
    if not ids:
        raise ClassificationError(
            f"class {spec.name!r}: none of its defining words is in the vocabulary"
        )
    vec = emb.vectors[:, ids].mean(axis=1)
    if not np.isfinite(vec).all() or np.linalg.norm(vec) == 0.0:
        raise ClassificationError(f"class {spec.name!r} has a degenerate class vector")
    return vec


def affinity_from_similarities(sims: np.ndarray) -> np.ndarray:
    """Softmax of a similarity vector, computed with max-subtraction.

    Shifting all similarities by a constant leaves the result unchanged.
    """
    sims = np.asarray(sims, dtype=np.float64)
    shifted = np.exp(sims - sims.max())
    return shifted / shifted.sum()


def affinity_vector(emb: EmbeddingMatrix, cvec: np.ndarray) -> np.ndarray:
    """Per-word affinity for a class: softmax over the whole vocabulary of
    cosine(word vector, class vector)."""
    norms = np.linalg.norm(emb.vectors, axis=0)
    if (norms == 0.0).any():
        bad = emb.vocab.word_at(int(np.nonzero(norms == 0.0)[0][0]))
        raise ClassificationError(f"word {bad!r} has a zero-norm vector")
    cnorm = np.linalg.norm(cvec)
    if cnorm == 0.0:
        raise ClassificationError("class vector has zero norm")
    sims = (emb.vectors.T @ cvec) / (norms * cnorm)
    return affinity_from_similarities(sims)


def weighted_thread_projection(
    doc: TokenizedDoc, emb: EmbeddingMatrix, beta: np.ndarray
) -> np.ndarray:
    """avg ‖ max projection of the doc through affinity-scaled word vectors.

    Column ``i`` of the effective matrix is ``beta[i] * v_i``.
    """
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (emb.d,):
        raise ClassificationError(
            f"affinity vector has length {beta.shape}, vocabulary has {emb.d} words"
        )
    ids = _token_indices(doc, emb)
    scaled = emb.vectors[:, ids] * beta[ids]
    return np.concatenate((scaled.mean(axis=1), scaled.max(axis=1)))


def contextual_features(
    thread: Thread, doc: TokenizedDoc, sets: Sequence[KeywordSet]
) -> ContextualFeatures:
    """Shape statistics of the thread plus keyword-set hit counts."""
    first = thread.first_post
    replies = thread.replies
    if replies:
        avg_nl = sum(p.body.count("\n") for p in replies) / len(replies)
        avg_len = sum(len(p.body) for p in replies) / len(replies)
    else:
        avg_nl = 0.0
        avg_len = 0.0
    return ContextualFeatures(
        newlines_first_post=first.body.count("\n"),
        length_first_post=len(first.body),
        reply_count=len(replies),
        avg_reply_newlines=avg_nl,
        avg_reply_length=avg_len,
        keyword_set_counts=tuple(set_occurrences(doc, ks) for ks in sets),
    )


def _class_sample_weights(y: np.ndarray, favored: int, boost: float) -> np.ndarray:
    w = np.ones(len(y))
    w[y == favored] = boost
    return w


def _feature_matrix(
    items: Sequence[tuple[Thread, TokenizedDoc]],
    emb: EmbeddingMatrix,
    beta: np.ndarray,
    sets: Sequence[KeywordSet],
    context: np.ndarray | None,
) -> np.ndarray:
    rows = [weighted_thread_projection(doc, emb, beta) for _, doc in items]
    X = np.stack(rows)
    if context is not None:
        X = np.hstack((X, context))
    return X


def train_ensemble(
    labeled: Sequence[tuple[Thread, TokenizedDoc, str]],
    specs: Sequence[ClassSpec],
    emb: EmbeddingMatrix,
    sets: Sequence[KeywordSet],
    params: EnsembleParams | None = None,
) -> EnsembleModel:
    """Train one affinity-weighted forest per declared class.

    Every declared class needs at least one labeled example; every label
    must be a declared class.  Threads must be projectable (at least one
    in-vocabulary token).
    """
    params = params or EnsembleParams()
    if not specs:
        raise ClassificationError("at least one class spec is required")
    if not labeled:
        raise ClassificationError("no labeled examples")

    classes = tuple(s.name for s in specs)
    class_index = {name: i for i, name in enumerate(classes)}
    if len(class_index) != len(classes):
        raise ClassificationError("duplicate class name in specs")

    y = np.empty(len(labeled), dtype=np.int64)
    for row, (_, _, label) in enumerate(labeled):
        if label not in class_index:
            raise ClassificationError(f"label {label!r} is not a declared class")
        y[row] = class_index[label]
    missing = [c for i, c in enumerate(classes) if not (y == i).any()]
    if missing:
        raise ClassificationError(f"classes with no labeled examples: {', '.join(missing)}")

    items = [(thread, doc) for thread, doc, _ in labeled]
    if params.use_contextual:
        context = np.stack(
            [contextual_features(t, d, sets).to_vector() for t, d in items]
        )
    else:
        context = None

    affinities: dict[str, np.ndarray] = {}
    forests: dict[str, RandomForest] = {}
    for spec in specs:
        beta = affinity_vector(emb, class_vector(spec, emb))
        X = _feature_matrix(items, emb, beta, sets, context)
        weights = _class_sample_weights(y, class_index[spec.name], params.boost)
        affinities[spec.name] = beta
        forests[spec.name] = train_forest(
            X, y, params.forest, sample_weight=weights, n_classes=len(classes)
        )

    layout = FeatureLayout(
        m=emb.m, n_keyword_sets=len(sets), use_contextual=params.use_contextual
    )
    return EnsembleModel(
        classes=classes,
        affinities=affinities,
        forests=forests,
        layout=layout,
        keyword_sets=tuple(sets),
        embedding_hash=embedding_fingerprint(emb),
        params=params,
        embedding=emb,
    )


def max_vote(
    classes: Sequence[str], fractions_by_forest: Mapping[str, np.ndarray]
) -> tuple[str, dict[str, str], dict[str, float]]:
    """Combine per-forest vote fractions into a final label.

    Each forest votes its argmax class; the plurality wins.  Ties are
    broken by the highest vote fraction summed across all forests, then
    by declared class order.
    """
    votes: dict[str, str] = {}
    tally = np.zeros(len(classes))
    summed = np.zeros(len(classes))
    for forest_class in classes:
        fractions = np.asarray(fractions_by_forest[forest_class], dtype=np.float64)
        voted = int(np.argmax(fractions))
        votes[forest_class] = classes[voted]
        tally[voted] += 1
        summed += fractions

    top = tally.max()
    tied = [i for i in range(len(classes)) if tally[i] == top]
    if len(tied) > 1:
        best_sum = max(summed[i] for i in tied)
        tied = [i for i in tied if summed[i] == best_sum]
    winner = classes[tied[0]]
    scores = {c: float(summed[i]) for i, c in enumerate(classes)}
    return winner, votes, scores


def predict(model: EnsembleModel, thread: Thread, doc: TokenizedDoc) -> Prediction:
    """Classify one thread with the max-voting ensemble."""
    emb = model.embedding
    if emb is None:
        raise ClassificationError("model has no attached embedding; use load_model(path, emb)")
    if model.layout.use_contextual:
        ctx = contextual_features(thread, doc, model.keyword_sets).to_vector()[None, :]
    else:
        ctx = None

    fractions: dict[str, np.ndarray] = {}
    for name in model.classes:
        x = weighted_thread_projection(doc, emb, model.affinities[name])[None, :]
        if ctx is not None:
            x = np.hstack((x, ctx))
        fractions[name] = model.forests[name].vote_fractions(x)[0]

    label, votes, scores = max_vote(model.classes, fractions)
    return Prediction(label=label, forest_votes=votes, scores=scores)


def embedding_fingerprint(emb: EmbeddingMatrix) -> str:
    """Stable digest of an embedding's vocabulary and vectors."""
    h = hashlib.sha256()
    h.update("\n".join(emb.vocab.words).encode("utf-8"))
    h.update(np.ascontiguousarray(emb.vectors, dtype="<f8").tobytes())
    return h.hexdigest()


def save_model(model: EnsembleModel, path: str | Path) -> None:
    """Write a versioned model bundle; the embedding itself is not included,
    only its fingerprint."""
    bundle = {
        "format_version": _BUNDLE_VERSION,
        "classes": model.classes,
        "affinities": model.affinities,
        "forests": model.forests,
        "layout": model.layout,
        "keyword_sets": model.keyword_sets,
        "embedding_hash": model.embedding_hash,
        "params": model.params,
    }
    with Path(path).open("wb") as fh:
        pickle.dump(bundle, fh, protocol=4)


def load_model(path: str | Path, emb: EmbeddingMatrix) -> EnsembleModel:
    """Load a bundle and attach the embedding it was trained with.

    The embedding fingerprint must match; predicting through a different
    matrix would silently produce garbage.
    """
    path = Path(path)
    if not path.is_file():
        raise ClassificationError(f"model file not found: {path}")
    with path.open("rb") as fh:
        bundle = pickle.load(fh)
    if not isinstance(bundle, dict) or bundle.get("format_version") != _BUNDLE_VERSION:
        raise ClassificationError(f"{path}: unsupported model bundle")
    if bundle["embedding_hash"] != embedding_fingerprint(emb):
        raise ClassificationError(
            f"{path}: model was trained with a different embedding (fingerprint mismatch)"
        )
    return EnsembleModel(
        classes=bundle["classes"],
        affinities=bundle["affinities"],
        forests=bundle["forests"],
        layout=bundle["layout"],
        keyword_sets=bundle["keyword_sets"],
        embedding_hash=bundle["embedding_hash"],
        params=bundle["params"],
        embedding=emb,
    )
