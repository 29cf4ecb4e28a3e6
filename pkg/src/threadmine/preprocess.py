"""Turning threads into token sequences and building the vocabulary.

The text of a thread is its title plus the body of its first post; replies
are ignored.  Tokenization lowercases, splits on non-alphanumeric
boundaries, and drops stopwords, all-digit tokens, and IPv4-shaped tokens.
The surviving unigram sequence is then extended with adjacent-pair bigrams
joined by ``_``, so downstream consumers see unigrams followed by bigrams.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Thread

__all__ = [
    "TokenizedDoc",
    "Vocabulary",
    "extract_document",
    "preprocess_document",
    "tokenize_thread",
    "build_vocabulary",
    "load_stopwords",
]

# IPv4-shaped tokens are kept whole by the scanner so the filter below can
# drop them as units; plain alphanumeric runs are matched otherwise.
_IPV4 = r"\d{1,3}(?:\.\d{1,3}){3}"
_TOKEN_RE = re.compile(rf"{_IPV4}|[a-z0-9]+")
_IPV4_RE = re.compile(_IPV4)


@dataclass(frozen=True)
class TokenizedDoc:
    """Token sequence of one thread: unigrams first, then joined bigrams."""

    thread_id: str
    tokens: tuple[str, ...]
    n_unigrams: int

    @property
    def n(self) -> int:
        """Total token count (unigrams plus bigrams)."""
        return len(self.tokens)

    @property
    def unigrams(self) -> tuple[str, ...]:
        return self.tokens[: self.n_unigrams]

    @property
    def bigrams(self) -> tuple[str, ...]:
        return self.tokens[self.n_unigrams :]


class Vocabulary:
    """Word-to-index mapping ordered by descending frequency, ties lexicographic.

    Indices form a gapless range ``0..d-1``; the ordering rule makes the
    mapping reproducible across runs.
    """

    def __init__(self, words: Sequence[str], counts: Sequence[int]):
        if len(words) != len(counts):
            raise ValueError("words and counts must have equal length")
        self.words: tuple[str, ...] = tuple(words)
        self.counts: tuple[int, ...] = tuple(int(c) for c in counts)
        self.index: dict[str, int] = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("duplicate word in vocabulary")

    @property
    def d(self) -> int:
        return len(self.words)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def __getitem__(self, word: str) -> int:
        return self.index[word]

    def word_at(self, idx: int) -> str:
        return self.words[idx]

    def __repr__(self) -> str:
        return f"Vocabulary(d={self.d})"


def extract_document(thread: Thread) -> str:
    """Title and first-post body joined by a newline; replies are excluded."""
    return f"{thread.title}\n{thread.first_post.body}"


def _filter_unigrams(text: str, stopwords: frozenset[str] | set[str]) -> list[str]:
    out = []
    for token in _TOKEN_RE.findall(text.lower()):
        if token in stopwords:
            continue
        if token.isdigit():
            continue
        if _IPV4_RE.fullmatch(token):
            continue
        out.append(token)
    return out


def preprocess_document(
    text: str, stopwords: frozenset[str] | set[str] = frozenset(), *, thread_id: str = ""
) -> TokenizedDoc:
    """Tokenize raw text into filtered unigrams plus adjacent-pair bigrams.

    Bigrams are formed over the post-filter unigram sequence, so removed
    tokens never appear inside a bigram.  Empty text yields an empty doc.
    """
    unigrams = _filter_unigrams(text, stopwords)
    bigrams = [f"{a}_{b}" for a, b in zip(unigrams, unigrams[1:])]
    return TokenizedDoc(
        thread_id=thread_id,
        tokens=tuple(unigrams) + tuple(bigrams),
        n_unigrams=len(unigrams),
    )


def tokenize_thread(
    thread: Thread, stopwords: frozenset[str] | set[str] = frozenset()
) -> TokenizedDoc:
    """Extract and preprocess a thread in one step."""
    return preprocess_document(
        extract_document(thread), stopwords, thread_id=thread.thread_id
    )


def build_vocabulary(docs: Iterable[TokenizedDoc], min_count: int = 5) -> Vocabulary:
    """Collect tokens with total frequency >= ``min_count`` into a Vocabulary."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    freq: Counter[str] = Counter()
    for doc in docs:
        freq.update(doc.tokens)
    kept = [(w, c) for w, c in freq.items() if c >= min_count]
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    return Vocabulary([w for w, _ in kept], [c for _, c in kept])


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Read a stopword file (one token per line, ``#`` comments).

    With no path, the bundled default list is used.
    """
    if path is None:
        text = (
            resources.files("threadmine").joinpath("data/stopwords.txt").read_text("utf-8")
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            words.add(line)
    return frozenset(words)
