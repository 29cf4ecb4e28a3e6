"""Loading, validating, and summarizing forum dumps and groundtruth labels.

A forum dump is newline-delimited JSON, one thread per line:

    {"thread_id": str, "title": str,
     "posts": [{"post_id": str, "author": str,
                "timestamp": str|null, "body": str}, ...]}

Labels come as CSV with header ``thread_id,label``; per-annotator labels as
CSV with header ``thread_id,annotator_id,label``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

from .errors import CorpusError

__all__ = [
    "Post",
    "Thread",
    "ForumCorpus",
    "LabelSet",
    "StatsReport",
    "load_corpus",
    "save_corpus",
    "corpus_stats",
    "load_labels",
    "load_annotations",
]


@dataclass(frozen=True)
class Post:
    """A single forum post. ``body`` may be empty but is always present."""

    post_id: str
    author: str
    body: str
    timestamp: str | None = None

    def __post_init__(self) -> None:
        if not self.post_id:
            raise CorpusError("post_id must be non-empty")


@dataclass(frozen=True)
class Thread:
    """A discussion thread: a title plus an ordered, non-empty list of posts.

    Post order is preserved from the input file; index 0 is the opening post,
    which carries the topic of the whole thread.
    """

    thread_id: str
    title: str
    posts: tuple[Post, ...]

    def __post_init__(self) -> None:
        if not self.thread_id:
            raise CorpusError("thread_id must be non-empty")
        if not self.posts:
            raise CorpusError(f"thread {self.thread_id!r} has no posts")

    @property
    def first_post(self) -> Post:
        return self.posts[0]

    @property
    def replies(self) -> tuple[Post, ...]:
        """Posts after the first one."""
        return self.posts[1:]


class ForumCorpus:
    """An immutable collection of threads with id-based lookup."""

    def __init__(self, name: str, threads: Sequence[Thread]):
        self.name = name
        self.threads: tuple[Thread, ...] = tuple(threads)
        index: dict[str, int] = {}
        for pos, thread in enumerate(self.threads):
            if thread.thread_id in index:
                raise CorpusError(f"duplicate thread_id {thread.thread_id!r}")
            index[thread.thread_id] = pos
        self._index = index

    def __len__(self) -> int:
        return len(self.threads)

    def __iter__(self) -> Iterator[Thread]:
        return iter(self.threads)

    def __contains__(self, thread_id: str) -> bool:
        return thread_id in self._index

    def __getitem__(self, thread_id: str) -> Thread:
        try:
            return self.threads[self._index[thread_id]]
        except KeyError:
            raise CorpusError(f"unknown thread_id {thread_id!r}") from None

    def position(self, thread_id: str) -> int:
        return self._index[thread_id]

    def __repr__(self) -> str:
        return f"ForumCorpus(name={self.name!r}, threads={len(self)})"


@dataclass
class LabelSet:
    """Groundtruth class labels; optionally the raw per-annotator votes."""

    classes: tuple[str, ...]
    labels: dict[str, str] = field(default_factory=dict)
    annotations: dict[tuple[str, str], str] | None = None

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class StatsReport:
    """Summary statistics of a corpus.

    ``posts_per_thread`` maps a post count to the number of threads with that
    many posts.  ``ccdf`` holds ``(k, P[posts >= k])`` for ``k = 1..max``;
    on any non-empty corpus the first point is ``(1, 1.0)`` and the series
    is non-increasing.
    """

    thread_count: int
    post_count: int
    author_count: int
    posts_per_thread: dict[int, int]
    ccdf: tuple[tuple[int, float], ...]
    frac_one_post: float
    frac_le_two_posts: float

    def to_dict(self) -> dict:
        return {
            "thread_count": self.thread_count,
            "post_count": self.post_count,
            "author_count": self.author_count,
            "posts_per_thread": {str(k): v for k, v in sorted(self.posts_per_thread.items())},
            "ccdf": [[k, p] for k, p in self.ccdf],
            "frac_one_post": self.frac_one_post,
            "frac_le_two_posts": self.frac_le_two_posts,
        }


def _parse_post(raw: object, where: str) -> Post:
    if not isinstance(raw, dict):
        raise CorpusError(f"{where}: post must be an object")
    for key in ("post_id", "author", "body"):
        if key not in raw:
            raise CorpusError(f"{where}: post is missing field {key!r}")
        if not isinstance(raw[key], str):
            raise CorpusError(f"{where}: post field {key!r} must be a string")
    timestamp = raw.get("timestamp")
    if timestamp is not None and not isinstance(timestamp, str):
        raise CorpusError(f"{where}: post field 'timestamp' must be a string or null")
    if not raw["post_id"]:
        raise CorpusError(f"{where}: post_id must be non-empty")
    return Post(
        post_id=raw["post_id"],
        author=raw["author"],
        body=raw["body"],
        timestamp=timestamp,
    )


def _parse_thread(raw: object, where: str) -> Thread:
    if not isinstance(raw, dict):
        raise CorpusError(f"{where}: thread must be an object")
    for key in ("thread_id", "title", "posts"):
        if key not in raw:
            raise CorpusError(f"{where}: thread is missing field {key!r}")
    if not isinstance(raw["thread_id"], str) or not raw["thread_id"]:
        raise CorpusError(f"{where}: thread_id must be a non-empty string")
    if not isinstance(raw["title"], str):
        raise CorpusError(f"{where}: title must be a string")
    if not isinstance(raw["posts"], list) or not raw["posts"]:
        raise CorpusError(f"{where}: posts must be a non-empty list")
    posts = tuple(_parse_post(p, where) for p in raw["posts"])
    return Thread(thread_id=raw["thread_id"], title=raw["title"], posts=posts)


def load_corpus(path: str | Path, format: str = "jsonl") -> ForumCorpus:
    """Load a forum dump. Errors name the offending line or thread id.

    An empty file yields an empty corpus.
    """
    if format != "jsonl":
        raise CorpusError(f"unsupported corpus format {format!r}")
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"corpus file not found: {path}")

    threads: list[Thread] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
            thread = _parse_thread(raw, where=f"{path}:{lineno}")
            if thread.thread_id in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate thread_id {thread.thread_id!r}")
            seen.add(thread.thread_id)
            threads.append(thread)
    return ForumCorpus(name=path.stem, threads=threads)


def save_corpus(corpus: ForumCorpus, path: str | Path) -> None:
    """Write a corpus back out as JSONL; inverse of :func:`load_corpus`."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for thread in corpus:
            record = {
                "thread_id": thread.thread_id,
                "title": thread.title,
                "posts": [
                    {
                        "post_id": p.post_id,
                        "author": p.author,
                        "timestamp": p.timestamp,
                        "body": p.body,
                    }
                    for p in thread.posts
                ],
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def corpus_stats(corpus: ForumCorpus) -> StatsReport:
    """Compute thread/post/author counts and the posts-per-thread shape.

    Author strings are compared case-sensitively.  An empty corpus yields
    zero counts and an empty histogram.
    """
    n_threads = len(corpus)
    post_counts = [len(t.posts) for t in corpus]
    n_posts = sum(post_counts)
    authors = {p.author for t in corpus for p in t.posts}

    histogram: dict[int, int] = {}
    for count in post_counts:
        histogram[count] = histogram.get(count, 0) + 1

    ccdf: list[tuple[int, float]] = []
    if n_threads:
        max_posts = max(post_counts)
        for k in range(1, max_posts + 1):
            ccdf.append((k, sum(1 for c in post_counts if c >= k) / n_threads))
        frac_one = histogram.get(1, 0) / n_threads
        frac_le_two = (histogram.get(1, 0) + histogram.get(2, 0)) / n_threads
    else:
        frac_one = 0.0
        frac_le_two = 0.0

    return StatsReport(
        thread_count=n_threads,
        post_count=n_posts,
        author_count=len(authors),
        posts_per_thread=histogram,
        ccdf=tuple(ccdf),
        frac_one_post=frac_one,
        frac_le_two_posts=frac_le_two,
    )


def _read_csv(path: Path, expected_header: Sequence[str]) -> Iterator[tuple[int, list[str]]]:
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusError(f"{path}: missing CSV header") from None
        if header != list(expected_header):
            raise CorpusError(
                f"{path}: expected header {','.join(expected_header)!r}, got {','.join(header)!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected_header):
                raise CorpusError(f"{path}:{lineno}: expected {len(expected_header)} columns")
            yield lineno, row


def load_labels(
    path: str | Path, corpus: ForumCorpus, classes: Sequence[str]
) -> LabelSet:
    """Load a ``thread_id,label`` CSV against a corpus and a class list.

    Rows naming an unknown thread or class are errors, as are two rows that
    assign the same thread different labels.
    """
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"labels file not found: {path}")
    class_set = set(classes)
    labels: dict[str, str] = {}
    for lineno, row in _read_csv(path, ("thread_id", "label")):
        thread_id, label = row
        if thread_id not in corpus:
            raise CorpusError(f"{path}:{lineno}: unknown thread_id {thread_id!r}")
        if label not in class_set:
            raise CorpusError(f"{path}:{lineno}: unknown class {label!r}")
        if thread_id in labels and labels[thread_id] != label:
            raise CorpusError(
                f"{path}:{lineno}: conflicting label for thread {thread_id!r}: "
                f"{labels[thread_id]!r} vs {label!r}"
            )
        labels[thread_id] = label
    return LabelSet(classes=tuple(classes), labels=labels)


def load_annotations(
    path: str | Path, corpus: ForumCorpus, classes: Sequence[str]
) -> dict[tuple[str, str], str]:
    """Load per-annotator votes from a ``thread_id,annotator_id,label`` CSV."""
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"annotations file not found: {path}")
    class_set = set(classes)
    votes: dict[tuple[str, str], str] = {}
    for lineno, row in _read_csv(path, ("thread_id", "annotator_id", "label")):
        thread_id, annotator_id, label = row
        if thread_id not in corpus:
            raise CorpusError(f"{path}:{lineno}: unknown thread_id {thread_id!r}")
        if label not in class_set:
            raise CorpusError(f"{path}:{lineno}: unknown class {label!r}")
        key = (thread_id, annotator_id)
        if key in votes and votes[key] != label:
            raise CorpusError(
                f"{path}:{lineno}: conflicting vote for {thread_id!r} by {annotator_id!r}"
            )
        votes[key] = label
    return votes
