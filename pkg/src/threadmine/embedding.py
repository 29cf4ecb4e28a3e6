"""Skip-gram word embeddings with negative sampling, trained in numpy.

The trainer learns one input vector per vocabulary word by sliding a
dynamic window over each document: for every center word it treats the
surrounding words as positive targets and a handful of words drawn from
the unigram^0.75 noise distribution as negatives, nudging vectors with
logistic-loss gradients.  Pre-trained vectors are deliberately not
supported; forum slang is too far from general-purpose corpora for them
to help.

Two training modes are offered:

* ``workers=1`` (default): fully sequential updates.  Given the same seed
  and parameters the resulting matrix is bit-reproducible.
* ``workers>1``: documents are sharded across threads which update the
  shared weight matrices without synchronization.  Faster on large
  corpora, but the result is nondeterministic.

After training, the matrix is read-only and safe to share across threads.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmbeddingError
from .preprocess import TokenizedDoc, Vocabulary

__all__ = [
    "TrainParams",
    "EmbeddingMatrix",
    "train_skipgram",
    "nearest_neighbors",
    "save_embedding",
    "load_embedding",
]

_BINARY_MAGIC = b"TMEMB"
_BINARY_VERSION = 1


@dataclass(frozen=True)
class TrainParams:
    """Skip-gram training hyperparameters.

    ``window`` is the maximum one-sided context width; the effective width
    of each center is drawn uniformly from ``1..window``.  The learning
    rate decays linearly from ``learning_rate`` to ``min_learning_rate``
    over the whole run.  ``subsample`` is the frequent-word downsampling
    threshold (0 disables it).
    """

    dims: int = 100
    window: int = 10
    epochs: int = 5
    negatives: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    subsample: float = 1e-3
    seed: int = 1
    workers: int = 1

    def __post_init__(self) -> None:
        if self.dims < 1:
            raise EmbeddingError("dims must be >= 1")
        if self.window < 1:
            raise EmbeddingError("window must be >= 1")
        if self.epochs < 1:
            raise EmbeddingError("epochs must be >= 1")
        if self.negatives < 0:
            raise EmbeddingError("negatives must be >= 0")
        if self.workers < 1:
            raise EmbeddingError("workers must be >= 1")
        if not 0 < self.learning_rate:
            raise EmbeddingError("learning_rate must be positive")


@dataclass
class EmbeddingMatrix:
    """Dense word vectors: column ``i`` of ``vectors`` belongs to word ``i``.

    ``epoch_losses`` records the mean negative-sampling loss per training
    epoch (empty for matrices that were loaded rather than trained).
    """

    vectors: np.ndarray  # shape (m, d), float64
    vocab: Vocabulary
    epoch_losses: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2:
            raise EmbeddingError("vectors must be a 2-d matrix")
        if self.vectors.shape[1] != self.vocab.d:
            raise EmbeddingError(
                f"matrix has {self.vectors.shape[1]} columns but vocabulary has {self.vocab.d} words"
            )
        if self.vectors.shape[0] < 1:
            raise EmbeddingError("embedding dimension must be >= 1")
        if not np.isfinite(self.vectors).all():
            raise EmbeddingError("embedding contains non-finite components")

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, word: str) -> bool:
        return word in self.vocab

    def vector(self, word: str) -> np.ndarray:
        """The vector for ``word``; raises for out-of-vocabulary queries."""
        if word not in self.vocab:
            raise EmbeddingError(f"word not in vocabulary: {word!r}")
        return self.vectors[:, self.vocab[word]].copy()

    def unit_columns(self) -> np.ndarray:
        """Columns scaled to unit norm (zero columns are left untouched)."""
        norms = np.linalg.norm(self.vectors, axis=0)
        safe = np.where(norms == 0.0, 1.0, norms)
        return self.vectors / safe


def _index_documents(
    docs: Sequence[TokenizedDoc], vocab: Vocabulary
) -> list[np.ndarray]:
    indexed = []
    for doc in docs:
        ids = [vocab.index[t] for t in doc.tokens if t in vocab.index]
        if ids:
            indexed.append(np.asarray(ids, dtype=np.int64))
    return indexed


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class _Trainer:
    """Shared state for one training run."""

    def __init__(self, docs: list[np.ndarray], vocab: Vocabulary, params: TrainParams):
        self.params = params
        self.docs = docs
        d, m = vocab.d, params.dims
        counts = np.asarray(vocab.counts, dtype=np.float64)
        total = counts.sum()

        noise = counts**0.75
        self.noise_cdf = np.cumsum(noise / noise.sum())

        if params.subsample > 0:
            freq = counts / total
            self.keep_prob = np.minimum(1.0, np.sqrt(params.subsample / freq))
        else:
            self.keep_prob = np.ones(d)

        root = np.random.SeedSequence(params.seed)
        init_rng = np.random.Generator(np.random.PCG64(root.spawn(1)[0]))
        # Input vectors start uniform in [-0.5/m, 0.5/m]; output vectors at
        # zero so every pair begins at sigmoid(0) = 0.5.
        self.w_in = (init_rng.random((d, m)) - 0.5) / m
        self.w_out = np.zeros((d, m))

        self.tokens_per_pass = sum(len(a) for a in docs)
        self.total_schedule = max(1, self.tokens_per_pass * params.epochs)
        self.epoch_loss = np.zeros(params.epochs)
        self.epoch_pairs = np.zeros(params.epochs, dtype=np.int64)
        self._loss_lock = threading.Lock()
        self._worker_seeds = root.spawn(params.workers)

    def _train_docs(
        self,
        docs: list[np.ndarray],
        rng: np.random.Generator,
        epoch: int,
        consumed_base: int,
        shard_tokens: int,
    ) -> None:
        p = self.params
        w_in, w_out = self.w_in, self.w_out
        lr0, lr_min = p.learning_rate, p.min_learning_rate
        negatives = p.negatives
        loss_sum = 0.0
        pairs = 0
        consumed = consumed_base + epoch * shard_tokens

        for ids in docs:
            kept_mask = rng.random(len(ids)) < self.keep_prob[ids]
            kept = ids[kept_mask]
            positions = np.nonzero(kept_mask)[0]
            n = len(kept)
            for j in range(n):
                center = kept[j]
                frac = (consumed + positions[j]) / self.total_schedule
                lr = max(lr_min, lr0 * (1.0 - frac))

                b = int(rng.integers(1, p.window + 1))
                lo, hi = max(0, j - b), min(n, j + b + 1)
                if hi - lo <= 1:
                    continue
                contexts = np.concatenate((kept[lo:j], kept[j + 1 : hi]))
                npos = len(contexts)

                if negatives:
                    draws = rng.random(npos * negatives)
                    negs = np.searchsorted(self.noise_cdf, draws).astype(np.int64)
                    np.minimum(negs, len(self.noise_cdf) - 1, out=negs)
                    # A noise word that coincides with its positive target
                    # would push the pair in both directions; drop it.
                    valid = negs != np.repeat(contexts, negatives)
                    negs = negs[valid]
                else:
                    negs = np.empty(0, dtype=np.int64)

                targets = np.concatenate((contexts, negs))
                labels = np.zeros(len(targets))
                labels[:npos] = 1.0

                h = w_in[center]
                out_rows = w_out[targets]
                z = out_rows @ h
                sig = _sigmoid(z)

                g = (sig - labels) * lr
                grad_h = g @ out_rows
                np.add.at(w_out, targets, -np.outer(g, h))
                w_in[center] = h - grad_h

                eps = 1e-10
                loss_sum -= float(np.log(sig[:npos] + eps).sum())
                loss_sum -= float(np.log(1.0 - sig[npos:] + eps).sum())
                pairs += npos
            consumed += len(ids)

        with self._loss_lock:
            self.epoch_loss[epoch] += loss_sum
            self.epoch_pairs[epoch] += pairs

    def run(self) -> tuple[float, ...]:
        p = self.params
        if p.workers == 1:
            rng = np.random.Generator(np.random.PCG64(self._worker_seeds[0]))
            for epoch in range(p.epochs):
                self._train_docs(self.docs, rng, epoch, 0, self.tokens_per_pass)
        else:
            shards = [self.docs[w :: p.workers] for w in range(p.workers)]
            rngs = [np.random.Generator(np.random.PCG64(s)) for s in self._worker_seeds]
            offsets = np.cumsum([0] + [sum(len(a) for a in s) for s in shards])
            for epoch in range(p.epochs):
                threads = [
                    threading.Thread(
                        target=self._train_docs,
                        args=(shard, rngs[w], epoch, int(offsets[w]), int(offsets[w + 1] - offsets[w])),
                    )
                    for w, shard in enumerate(shards)
                ]
                for t in threads:
                    t.start()
                for t in threads:
                    t.join()
        with np.errstate(invalid="ignore"):
            means = self.epoch_loss / np.maximum(self.epoch_pairs, 1)
        return tuple(float(x) for x in means)


def train_skipgram(
    docs: Sequence[TokenizedDoc], vocab: Vocabulary, params: TrainParams | None = None
) -> EmbeddingMatrix:
    """Train word vectors over all token windows of ``docs``.

    Raises when there are no documents, an empty vocabulary, or no
    in-vocabulary tokens to train on.
    """
    params = params or TrainParams()
    if not docs:
        raise EmbeddingError("cannot train on an empty document list")
    if vocab.d == 0:
        raise EmbeddingError("cannot train with an empty vocabulary")
    indexed = _index_documents(docs, vocab)
    if not indexed:
        raise EmbeddingError("no in-vocabulary tokens in any document")

    trainer = _Trainer(indexed, vocab, params)
    losses = trainer.run()
    return EmbeddingMatrix(
        vectors=np.ascontiguousarray(trainer.w_in.T),
        vocab=vocab,
        epoch_losses=losses,
    )


def nearest_neighbors(
    emb: EmbeddingMatrix, word: str, k: int
) -> list[tuple[str, float]]:
    """Top-``k`` words by cosine similarity to ``word``, excluding itself.

    Ties are broken by vocabulary index.
    """
    if word not in emb.vocab:
        raise EmbeddingError(f"word not in vocabulary: {word!r}")
    if not 1 <= k <= emb.d - 1:
        raise EmbeddingError(f"k must be in 1..{emb.d - 1}, got {k}")
    qi = emb.vocab[word]
    units = emb.unit_columns()
    q = units[:, qi]
    if np.linalg.norm(emb.vectors[:, qi]) == 0.0:
        raise EmbeddingError(f"query word {word!r} has a zero vector")
    sims = units.T @ q
    sims[qi] = -np.inf
    order = np.lexsort((np.arange(emb.d), -sims))
    return [(emb.vocab.word_at(int(i)), float(sims[i])) for i in order[:k]]


def save_embedding(emb: EmbeddingMatrix, path: str | Path, format: str = "binary") -> None:
    """Persist a matrix.

    ``binary`` round-trips exactly; ``text`` (header line ``d m``, then one
    ``word c1 .. cm`` line per word) round-trips to within 1e-6 per
    component.
    """
    path = Path(path)
    if format == "binary":
        header = np.asarray([emb.d, emb.m], dtype="<i8").tobytes()
        words_blob = "\n".join(emb.vocab.words).encode("utf-8")
        counts = np.asarray(emb.vocab.counts, dtype="<i8").tobytes()
        matrix = np.ascontiguousarray(emb.vectors, dtype="<f8").tobytes()
        with path.open("wb") as fh:
            fh.write(_BINARY_MAGIC)
            fh.write(struct.pack("<H", _BINARY_VERSION))
            fh.write(struct.pack("<I", len(header)))
            fh.write(header)
            fh.write(struct.pack("<I", len(words_blob)))
            fh.write(words_blob)
            fh.write(counts)
            fh.write(matrix)
    elif format == "text":
        with path.open("w", encoding="utf-8") as fh:
            fh.write(f"{emb.d} {emb.m}\n")
            for i, word in enumerate(emb.vocab.words):
                comps = " ".join(f"{x:.9g}" for x in emb.vectors[:, i])
                fh.write(f"{word} {comps}\n")
    else:
        raise EmbeddingError(f"unknown embedding format {format!r}")


def _load_binary(path: Path) -> EmbeddingMatrix:
    with path.open("rb") as fh:
        magic = fh.read(len(_BINARY_MAGIC))
        if magic != _BINARY_MAGIC:
            raise EmbeddingError(f"{path}: not a binary embedding file")
        (version,) = struct.unpack("<H", fh.read(2))
        if version != _BINARY_VERSION:
            raise EmbeddingError(f"{path}: unsupported format version {version}")
        (header_len,) = struct.unpack("<I", fh.read(4))
        d, m = np.frombuffer(fh.read(header_len), dtype="<i8")
        (words_len,) = struct.unpack("<I", fh.read(4))
        words = fh.read(words_len).decode("utf-8").split("\n") if words_len else []
        counts = np.frombuffer(fh.read(8 * int(d)), dtype="<i8")
        data = np.frombuffer(fh.read(), dtype="<f8")
        if len(words) != d or len(counts) != d or data.size != int(d) * int(m):
            raise EmbeddingError(f"{path}: truncated or corrupt embedding file")
        vocab = Vocabulary(words, counts.tolist())
        return EmbeddingMatrix(vectors=data.reshape(int(m), int(d)).copy(), vocab=vocab)


def _load_text(path: Path) -> EmbeddingMatrix:
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise EmbeddingError(f"{path}:1: expected header 'd m'")
        try:
            d, m = int(header[0]), int(header[1])
        except ValueError:
            raise EmbeddingError(f"{path}:1: expected integer header 'd m'") from None
        words: list[str] = []
        matrix = np.empty((m, d))
        lineno = 1
        for i in range(d):
            lineno += 1
            parts = fh.readline().split()
            if len(parts) != m + 1:
                raise EmbeddingError(
                    f"{path}:{lineno}: expected a word and {m} components, got {len(parts)} fields"
                )
            words.append(parts[0])
            matrix[:, i] = [float(x) for x in parts[1:]]
    # The text format carries no frequencies; loaded counts default to 1.
    vocab = Vocabulary(words, [1] * d)
    return EmbeddingMatrix(vectors=matrix, vocab=vocab)


def load_embedding(path: str | Path) -> EmbeddingMatrix:
    """Load a matrix saved by :func:`save_embedding`; the format is sniffed."""
    path = Path(path)
    if not path.is_file():
        raise EmbeddingError(f"embedding file not found: {path}")
    with path.open("rb") as fh:
        magic = fh.read(len(_BINARY_MAGIC))
    if magic == _BINARY_MAGIC:
        return _load_binary(path)
    return _load_text(path)
