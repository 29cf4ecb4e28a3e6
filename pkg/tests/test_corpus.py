import json

import numpy as np
import pytest

from threadmine.corpus import (
    ForumCorpus,
    Post,
    Thread,
    corpus_stats,
    load_annotations,
    load_corpus,
    load_labels,
    save_corpus,
)
from threadmine.errors import CorpusError

from synth import make_thread


def thread_record(tid, title="title", posts=None):
    if posts is None:
        posts = [{"post_id": f"{tid}p0", "author": "alice", "timestamp": None, "body": "hello"}]
    return {"thread_id": tid, "title": title, "posts": posts}


def write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")


class TestLoadCorpus:
    def test_round_trip_preserves_order(self, tmp_path):
        records = [
            thread_record(
                "t1",
                "first",
                posts=[
                    {"post_id": "p1", "author": "a", "timestamp": "2019-01-01T00:00:00", "body": "one"},
                    {"post_id": "p2", "author": "b", "timestamp": None, "body": "two"},
                ],
            ),
            thread_record("t2", "second"),
            thread_record("t3", "third"),
        ]
        path = tmp_path / "corpus.jsonl"
        write_jsonl(path, records)
        corpus = load_corpus(path)
        assert len(corpus) == 3
        assert [t.thread_id for t in corpus] == ["t1", "t2", "t3"]
        assert [p.body for p in corpus["t1"].posts] == ["one", "two"]
        assert corpus["t1"].posts[0].timestamp == "2019-01-01T00:00:00"

    def test_empty_file(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text("", encoding="utf-8")
        assert len(load_corpus(path)) == 0

    def test_duplicate_id_names_the_id(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        write_jsonl(path, [thread_record("t1"), thread_record("t1")])
        with pytest.raises(CorpusError, match="t1"):
            load_corpus(path)

    def test_malformed_line_names_line_number(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(json.dumps(thread_record("t1")) + "\n{not json\n", encoding="utf-8")
        with pytest.raises(CorpusError, match=":2"):
            load_corpus(path)

    def test_missing_field_is_an_error(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        record = thread_record("t1")
        del record["posts"][0]["body"]
        write_jsonl(path, [record])
        with pytest.raises(CorpusError, match="body"):
            load_corpus(path)

    def test_thread_without_posts_is_an_error(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        write_jsonl(path, [{"thread_id": "t1", "title": "x", "posts": []}])
        with pytest.raises(CorpusError, match="posts"):
            load_corpus(path)

    def test_save_then_load_is_identity(self, tmp_path):
        rng = np.random.default_rng(42)
        threads = []
        for i in range(30):
            bodies = [f"body {j} of {i}\nmore" for j in range(int(rng.integers(1, 5)))]
            threads.append(make_thread(f"t{i}", f"title {i}", bodies))
        corpus = ForumCorpus("x", threads)
        path = tmp_path / "out.jsonl"
        save_corpus(corpus, path)
        reloaded = load_corpus(path)
        assert [t.thread_id for t in reloaded] == [t.thread_id for t in corpus]
        for a, b in zip(corpus, reloaded):
            assert a.title == b.title
            assert [p.body for p in a.posts] == [p.body for p in b.posts]
            assert [p.post_id for p in a.posts] == [p.post_id for p in b.posts]


class TestCorpusStats:
    def test_post_count_fractions(self):
        threads = [
            make_thread("t1", "a", ["x"]),
            make_thread("t2", "b", ["x"]),
            make_thread("t3", "c", ["x", "y"]),
            make_thread("t4", "d", ["x", "y", "z", "w", "v"]),
        ]
        report = corpus_stats(ForumCorpus("x", threads))
        assert report.thread_count == 4
        assert report.post_count == 1 + 1 + 2 + 5
        assert report.frac_one_post == 0.5
        assert report.frac_le_two_posts == 0.75
        assert report.posts_per_thread == {1: 2, 2: 1, 5: 1}

    def test_empty_corpus_yields_zeros(self):
        report = corpus_stats(ForumCorpus("x", []))
        assert report.thread_count == 0
        assert report.post_count == 0
        assert report.author_count == 0
        assert report.posts_per_thread == {}
        assert report.ccdf == ()

    def test_author_count_is_case_sensitive(self):
        threads = [
            Thread("t1", "a", (Post("p1", "Alice", "x"), Post("p2", "alice", "y"))),
        ]
        assert corpus_stats(ForumCorpus("x", threads)).author_count == 2

    def test_ccdf_starts_at_one_and_is_non_increasing(self):
        rng = np.random.default_rng(3)
        for trial in range(5):
            threads = [
                make_thread(f"t{i}", "t", ["b"] * int(rng.integers(1, 12)))
                for i in range(int(rng.integers(1, 40)))
            ]
            report = corpus_stats(ForumCorpus("x", threads))
            ks = [k for k, _ in report.ccdf]
            ps = [p for _, p in report.ccdf]
            assert ks[0] == 1 and ps[0] == 1.0
            assert all(a >= b for a, b in zip(ps, ps[1:]))
            assert sum(report.posts_per_thread.values()) == report.thread_count


class TestLabels:
    def test_load_labels(self, tmp_path, small_corpus):
        path = tmp_path / "labels.csv"
        path.write_text("thread_id,label\nt1,Hacks\nt2,Services\n", encoding="utf-8")
        labels = load_labels(path, small_corpus, ["Hacks", "Services"])
        assert len(labels) == 2
        assert labels.labels["t1"] == "Hacks"

    def test_header_only_csv(self, tmp_path, small_corpus):
        path = tmp_path / "labels.csv"
        path.write_text("thread_id,label\n", encoding="utf-8")
        assert len(load_labels(path, small_corpus, ["Hacks"])) == 0

    def test_unknown_class_is_an_error(self, tmp_path, small_corpus):
        path = tmp_path / "labels.csv"
        path.write_text("thread_id,label\nt1,Foo\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="Foo"):
            load_labels(path, small_corpus, ["Hacks"])

    def test_unknown_thread_is_an_error(self, tmp_path, small_corpus):
        path = tmp_path / "labels.csv"
        path.write_text("thread_id,label\nnope,Hacks\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="nope"):
            load_labels(path, small_corpus, ["Hacks"])

    def test_conflicting_duplicate_is_an_error(self, tmp_path, small_corpus):
        path = tmp_path / "labels.csv"
        path.write_text("thread_id,label\nt1,Hacks\nt1,Services\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="conflicting"):
            load_labels(path, small_corpus, ["Hacks", "Services"])

    def test_consistent_duplicate_is_allowed(self, tmp_path, small_corpus):
        path = tmp_path / "labels.csv"
        path.write_text("thread_id,label\nt1,Hacks\nt1,Hacks\n", encoding="utf-8")
        assert len(load_labels(path, small_corpus, ["Hacks"])) == 1

    def test_load_annotations(self, tmp_path, small_corpus):
        path = tmp_path / "ann.csv"
        path.write_text(
            "thread_id,annotator_id,label\nt1,a1,Hacks\nt1,a2,Hacks\nt2,a1,Services\n",
            encoding="utf-8",
        )
        votes = load_annotations(path, small_corpus, ["Hacks", "Services"])
        assert votes[("t1", "a1")] == "Hacks"
        assert len(votes) == 3
