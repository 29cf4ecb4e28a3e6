"""Projecting threads into the doubled embedding space.

A thread's projection concatenates two pools over the vectors of its
in-vocabulary tokens: the componentwise mean (which captures the typical
direction) and the componentwise maximum (which preserves outlier
activations the mean would wash out).  With an m-dimensional word space
the thread therefore lives in 2m dimensions.

Tokens are treated as a multiset: a word occurring three times pulls the
mean three times as hard.  Out-of-vocabulary tokens are skipped silently;
a thread with no in-vocabulary tokens at all cannot be projected and
raises :class:`ProjectionError` carrying the thread id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .embedding import EmbeddingMatrix
from .errors import ProjectionError
from .preprocess import TokenizedDoc

__all__ = [
    "ThreadVector",
    "project_avg",
    "project_max",
    "project_thread",
    "project_corpus",
    "cosine_similarity",
]


@dataclass(frozen=True)
class ThreadVector:
    """avg ‖ max projection of one thread; ``full`` is the 2m concatenation."""

    avg: np.ndarray
    max: np.ndarray
    full: np.ndarray
    in_vocab_count: int


def _token_indices(doc: TokenizedDoc, emb: EmbeddingMatrix) -> np.ndarray:
    index = emb.vocab.index
    ids = [index[t] for t in doc.tokens if t in index]
    if not ids:
        raise ProjectionError(
            f"thread {doc.thread_id!r} has no in-vocabulary tokens",
            thread_id=doc.thread_id,
        )
    return np.asarray(ids, dtype=np.int64)


def project_avg(doc: TokenizedDoc, emb: EmbeddingMatrix) -> np.ndarray:
    """Componentwise mean over the doc's in-vocabulary token vectors."""
    ids = _token_indices(doc, emb)
    return emb.vectors[:, ids].mean(axis=1)


def project_max(doc: TokenizedDoc, emb: EmbeddingMatrix) -> np.ndarray:
    """Componentwise maximum over the doc's in-vocabulary token vectors."""
    ids = _token_indices(doc, emb)
    return emb.vectors[:, ids].max(axis=1)


def project_thread(doc: TokenizedDoc, emb: EmbeddingMatrix) -> ThreadVector:
    """Full avg ‖ max projection; ``full`` has length ``2 * emb.m``."""
    ids = _token_indices(doc, emb)
    token_vecs = emb.vectors[:, ids]
    avg = token_vecs.mean(axis=1)
    mx = token_vecs.max(axis=1)
    return ThreadVector(
        avg=avg,
        max=mx,
        full=np.concatenate((avg, mx)),
        in_vocab_count=len(ids),
    )


def project_corpus(
    docs: Iterable[TokenizedDoc], emb: EmbeddingMatrix
) -> tuple[dict[str, ThreadVector], list[str]]:
    """Project every projectable doc; unprojectable ids are returned, not raised."""
    vectors: dict[str, ThreadVector] = {}
    skipped: list[str] = []
    for doc in docs:
        try:
            vectors[doc.thread_id] = project_thread(doc, emb)
        except ProjectionError:
            skipped.append(doc.thread_id)
    return vectors, skipped


def save_projections(
    vectors: Mapping[str, ThreadVector], path: str | Path, header: str | None = None
) -> None:
    """Dump projections as CSV ``thread_id, c1..c2m``, sorted by thread id.

    ``header`` (if given) is written first as a ``#`` comment line.
    """
    ids = sorted(vectors)
    if not ids:
        raise ProjectionError("no projections to save")
    width = len(vectors[ids[0]].full)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        if header:
            fh.write(header + "\n")
        writer = csv.writer(fh)
        writer.writerow(["thread_id"] + [f"c{i + 1}" for i in range(width)])
        for tid in ids:
            full = vectors[tid].full
            if len(full) != width:
                raise ProjectionError(f"thread {tid!r} has projection width {len(full)}, expected {width}")
            writer.writerow([tid] + [f"{x:.10g}" for x in full])


def cosine_similarity(a: np.ndarray | Sequence[float], b: np.ndarray | Sequence[float]) -> float:
    """a·b / (‖a‖‖b‖); requires equal lengths and nonzero norms."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ProjectionError(f"vector length mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ProjectionError("cosine similarity is undefined for zero-norm vectors")
    return float(np.dot(a, b) / (na * nb))
