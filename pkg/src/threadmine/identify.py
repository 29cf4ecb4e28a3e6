"""Finding threads of interest: keyword seeding plus similarity expansion.

Selection runs in two phases.  Phase one scans token streams for
user-supplied keyword sets and keeps every thread that meets the
occurrence threshold of *each* set.  Phase two projects the remaining
threads into the thread-embedding space and adopts any candidate whose
cosine similarity to its nearest seed reaches ``t_sim``.  Expansion is a
single pass: threads adopted by similarity do not recruit further, which
keeps the result stable at tight thresholds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import IdentificationError
from .preprocess import TokenizedDoc, preprocess_document
from .threadspace import ThreadVector

__all__ = [
    "KeywordSet",
    "SelectionResult",
    "load_keyword_set",
    "set_occurrences",
    "keyword_select",
    "similarity_expand",
    "identify_threads",
]

logger = logging.getLogger(__name__)

PROVENANCE_KEYWORD = "keyword"
PROVENANCE_SIMILARITY = "similarity"


@dataclass(frozen=True)
class KeywordSet:
    """A named bag of keywords with a per-thread occurrence threshold.

    Words must be in preprocessed form: lowercase unigrams or
    ``_``-joined bigrams.
    """

    name: str
    words: frozenset[str]
    threshold: int = 1

    def __post_init__(self) -> None:
        if not self.words:
            raise IdentificationError(f"keyword set {self.name!r} is empty")
        if self.threshold < 1:
            raise IdentificationError(
                f"keyword set {self.name!r}: threshold must be >= 1"
            )


@dataclass(frozen=True)
class SelectionResult:
    """Seeds (keyword-selected) and expansion (similarity-selected) threads.

    ``provenance`` covers exactly ``seeds | expanded``.  ``scores`` and
    ``best_seed`` record, for each expanded thread, its best seed
    similarity and which seed achieved it.
    """

    seeds: frozenset[str]
    expanded: frozenset[str]
    provenance: dict[str, str] = field(default_factory=dict)
    scores: dict[str, float] = field(default_factory=dict)
    best_seed: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.seeds & self.expanded:
            raise IdentificationError("seed and expanded sets must be disjoint")

    @property
    def selected(self) -> frozenset[str]:
        return self.seeds | self.expanded


def load_keyword_set(
    path: str | Path,
    name: str | None = None,
    threshold: int = 1,
    stopwords: frozenset[str] | set[str] = frozenset(),
) -> KeywordSet:
    """Read one keyword per line (``#`` comments) into a KeywordSet.

    Each keyword is lowercased and checked against the tokenizer: a keyword
    that preprocessing would destroy (a pure number, a stopword, punctuation
    only) can never match a token, so it is dropped with a warning.
    """
    path = Path(path)
    if not path.is_file():
        raise IdentificationError(f"keyword file not found: {path}")
    kept: set[str] = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        word = line.split("#", 1)[0].strip().lower()
        if not word:
            continue
        survived = preprocess_document(word, stopwords).tokens
        if word not in survived:
            logger.warning(
                "%s:%d: keyword %r would be destroyed by preprocessing; ignored",
                path,
                lineno,
                word,
            )
            continue
        kept.add(word)
    if not kept:
        raise IdentificationError(f"{path}: no usable keywords")
    return KeywordSet(name=name or path.stem, words=frozenset(kept), threshold=threshold)


def set_occurrences(doc: TokenizedDoc, keyword_set: KeywordSet) -> int:
    """Multiset count of the doc's tokens that belong to the keyword set."""
    words = keyword_set.words
    return sum(1 for t in doc.tokens if t in words)


def keyword_select(
    docs: Iterable[TokenizedDoc], sets: Sequence[KeywordSet]
) -> set[str]:
    """Threads whose occurrence count meets the threshold of every set."""
    if not sets:
        raise IdentificationError("at least one keyword set is required")
    selected: set[str] = set()
    for doc in docs:
        if all(set_occurrences(doc, ks) >= ks.threshold for ks in sets):
            selected.add(doc.thread_id)
    return selected


def _stack_full(vectors: Mapping[str, ThreadVector]) -> tuple[list[str], np.ndarray]:
    ids = sorted(vectors)
    mat = np.stack([vectors[i].full for i in ids])
    norms = np.linalg.norm(mat, axis=1)
    zero = norms == 0.0
    if zero.any():
        bad = ids[int(np.nonzero(zero)[0][0])]
        raise IdentificationError(f"thread {bad!r} has a zero-norm projection")
    return ids, mat / norms[:, None]


def similarity_expand(
    seed_vectors: Mapping[str, ThreadVector],
    candidate_vectors: Mapping[str, ThreadVector],
    t_sim: float,
) -> SelectionResult:
    """Adopt candidates whose best cosine similarity to any seed is >= ``t_sim``.

    One pass only; adopted candidates are never used as new anchors.
    """
    if not 0.0 < t_sim <= 1.0:
        raise IdentificationError(f"t_sim must be in (0, 1], got {t_sim}")
    if not seed_vectors:
        raise IdentificationError("similarity expansion requires at least one seed")
    overlap = seed_vectors.keys() & candidate_vectors.keys()
    if overlap:
        raise IdentificationError(
            f"seed and candidate sets overlap: {sorted(overlap)[:3]}"
        )

    seeds = frozenset(seed_vectors)
    provenance = {tid: PROVENANCE_KEYWORD for tid in seeds}
    if not candidate_vectors:
        return SelectionResult(seeds=seeds, expanded=frozenset(), provenance=provenance)

    seed_ids, seed_mat = _stack_full(seed_vectors)
    cand_ids, cand_mat = _stack_full(candidate_vectors)
    sims = cand_mat @ seed_mat.T  # (candidates, seeds)
    best_idx = np.argmax(sims, axis=1)
    best = sims[np.arange(len(cand_ids)), best_idx]

    expanded: set[str] = set()
    scores: dict[str, float] = {}
    best_seed: dict[str, str] = {}
    for pos, tid in enumerate(cand_ids):
        if best[pos] >= t_sim:
            expanded.add(tid)
            scores[tid] = float(best[pos])
            best_seed[tid] = seed_ids[int(best_idx[pos])]
            provenance[tid] = PROVENANCE_SIMILARITY

    return SelectionResult(
        seeds=seeds,
        expanded=frozenset(expanded),
        provenance=provenance,
        scores=scores,
        best_seed=best_seed,
    )


def identify_threads(
    docs: Sequence[TokenizedDoc],
    sets: Sequence[KeywordSet],
    vectors: Mapping[str, ThreadVector],
    t_sim: float,
) -> SelectionResult:
    """Run both selection phases over the projectable threads.

    ``vectors`` holds the thread projections; docs without one are excluded
    from selection entirely (callers get them from
    :func:`threadspace.project_corpus` and report them separately).
    """
    projectable = [doc for doc in docs if doc.thread_id in vectors]
    seed_ids = keyword_select(projectable, sets)
    candidates = {tid: vec for tid, vec in vectors.items() if tid not in seed_ids}
    if not seed_ids:
        logger.warning("keyword selection matched no threads; nothing to expand")
        return SelectionResult(seeds=frozenset(), expanded=frozenset())
    return similarity_expand(
        {tid: vectors[tid] for tid in seed_ids}, candidates, t_sim
    )
