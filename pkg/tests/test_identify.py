import logging
import math

import numpy as np
import pytest

from threadmine.errors import IdentificationError
from threadmine.identify import (
    KeywordSet,
    identify_threads,
    keyword_select,
    load_keyword_set,
    set_occurrences,
    similarity_expand,
)
from threadmine.threadspace import ThreadVector, project_corpus

from synth import make_doc, make_embedding


def tv(full):
    """ThreadVector from an explicit 2m vector (halves are irrelevant here)."""
    full = np.asarray(full, dtype=np.float64)
    m = len(full) // 2
    return ThreadVector(avg=full[:m], max=full[m:], full=full, in_vocab_count=1)


def oracle_cosine(a, b):
    num = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    return num / (na * nb)


def oracle_expand(seeds, candidates, t_sim):
    """All-pairs python-loop oracle for similarity expansion."""
    expanded = set()
    for cid, cvec in candidates.items():
        best = max(oracle_cosine(cvec.full, svec.full) for svec in seeds.values())
        if best >= t_sim:
            expanded.add(cid)
    return expanded


THREE_SETS = [
    KeywordSet("hacking", frozenset({"hack"})),
    KeywordSet("concern", frozenset({"worried"})),
    KeywordSet("question", frozenset({"how"})),
]


class TestKeywordSelect:
    def test_one_word_from_each_set_selects(self):
        docs = [make_doc("t1", ["hack", "worried", "how"])]
        assert keyword_select(docs, THREE_SETS) == {"t1"}

    def test_missing_sets_reject(self):
        docs = [make_doc("t1", ["hack", "hack"])]
        assert keyword_select(docs, THREE_SETS) == set()

    def test_threshold_boundary(self):
        sets = [KeywordSet("hacking", frozenset({"hack"}), threshold=3)]
        assert keyword_select([make_doc("t1", ["hack", "hack"])], sets) == set()
        assert keyword_select([make_doc("t1", ["hack", "hack", "hack"])], sets) == {"t1"}

    def test_occurrences_count_the_multiset(self):
        ks = KeywordSet("s", frozenset({"hack", "pwn"}), threshold=1)
        doc = make_doc("t", ["hack", "hack", "pwn", "other"])
        assert set_occurrences(doc, ks) == 3

    def test_bigram_keywords_match_bigram_tokens(self):
        ks = KeywordSet("s", frozenset({"sql_injection"}))
        doc = make_doc("t", ["sql", "injection"])
        assert set_occurrences(doc, ks) == 0
        from threadmine.preprocess import preprocess_document

        doc2 = preprocess_document("sql injection", thread_id="t")
        assert set_occurrences(doc2, ks) == 1

    def test_empty_sets_is_an_error(self):
        with pytest.raises(IdentificationError):
            keyword_select([], [])

    def test_matches_naive_scan_oracle_on_500_threads(self):
        rng = np.random.default_rng(31)
        words = [f"w{i}" for i in range(60)]
        sets = [
            KeywordSet("s1", frozenset({"w1", "w2", "w3"}), threshold=2),
            KeywordSet("s2", frozenset({"w10", "w11"}), threshold=1),
        ]
        docs = [
            make_doc(f"t{i}", [str(w) for w in rng.choice(words, size=int(rng.integers(1, 30)))])
            for i in range(500)
        ]
        got = keyword_select(docs, sets)

        expected = set()
        for doc in docs:
            fine = True
            for ks in sets:
                count = 0
                for token in doc.tokens:
                    if token in ks.words:
                        count += 1
                if count < ks.threshold:
                    fine = False
            if fine:
                expected.add(doc.thread_id)
        assert got == expected

    def test_adding_keywords_never_shrinks_selection(self):
        rng = np.random.default_rng(32)
        words = [f"w{i}" for i in range(30)]
        docs = [
            make_doc(f"t{i}", [str(w) for w in rng.choice(words, size=10)])
            for i in range(200)
        ]
        base = [KeywordSet("s1", frozenset({"w1"})), KeywordSet("s2", frozenset({"w2"}))]
        selected = keyword_select(docs, base)
        for extra in (["w3"], ["w3", "w4"], ["w5", "w6", "w7"]):
            grown = [
                KeywordSet("s1", base[0].words | set(extra)),
                KeywordSet("s2", base[1].words | {"w9"}),
            ]
            assert keyword_select(docs, grown) >= selected


class TestSimilarityExpand:
    def test_identical_candidate_is_adopted_with_score_one(self):
        seeds = {"s1": tv([1.0, 0.0, 1.0, 0.0])}
        cands = {"c1": tv([1.0, 0.0, 1.0, 0.0])}
        result = similarity_expand(seeds, cands, 0.96)
        assert result.expanded == {"c1"}
        assert result.scores["c1"] == pytest.approx(1.0)
        assert result.best_seed["c1"] == "s1"
        assert result.provenance == {"s1": "keyword", "c1": "similarity"}

    def test_orthogonal_candidate_is_not_adopted(self):
        seeds = {"s1": tv([1.0, 0.0, 0.0, 0.0])}
        cands = {"c1": tv([0.0, 1.0, 0.0, 0.0])}
        result = similarity_expand(seeds, cands, 0.5)
        assert result.expanded == frozenset()

    def test_matches_all_pairs_oracle_on_hand_built_vectors(self):
        rng = np.random.default_rng(33)
        seeds = {f"s{i}": tv(rng.normal(size=6)) for i in range(3)}
        cands = {f"c{i}": tv(rng.normal(size=6)) for i in range(5)}
        for t_sim in (0.3, 0.6, 0.9):
            result = similarity_expand(seeds, cands, t_sim)
            assert set(result.expanded) == oracle_expand(seeds, cands, t_sim)

    def test_tighter_threshold_never_adds_threads(self):
        rng = np.random.default_rng(34)
        for trial in range(10):
            seeds = {f"s{i}": tv(rng.normal(size=8)) for i in range(4)}
            cands = {f"c{i}": tv(rng.normal(size=8)) for i in range(40)}
            lo = similarity_expand(seeds, cands, 0.55)
            hi = similarity_expand(seeds, cands, 0.8)
            assert hi.expanded <= lo.expanded

    def test_empty_seed_set_is_an_error(self):
        with pytest.raises(IdentificationError):
            similarity_expand({}, {"c": tv([1.0, 0.0])}, 0.9)

    def test_overlapping_ids_are_an_error(self):
        with pytest.raises(IdentificationError):
            similarity_expand({"x": tv([1.0, 0.0])}, {"x": tv([1.0, 0.0])}, 0.9)

    def test_bad_threshold_is_an_error(self):
        with pytest.raises(IdentificationError):
            similarity_expand({"s": tv([1.0, 0.0])}, {}, 0.0)
        with pytest.raises(IdentificationError):
            similarity_expand({"s": tv([1.0, 0.0])}, {}, 1.5)

    def test_single_pass_no_transitive_recruiting(self):
        # b sits 25 degrees from seed a, c another 25 degrees further:
        # a~b and b~c clear the threshold, a~c does not.
        theta = math.radians(25.0)
        seeds = {"a": tv([1.0, 0.0, 0.0, 0.0])}
        cands = {
            "b": tv([math.cos(theta), math.sin(theta), 0.0, 0.0]),
            "c": tv([math.cos(2 * theta), math.sin(2 * theta), 0.0, 0.0]),
        }
        t_sim = 0.9
        assert oracle_cosine(cands["b"].full, seeds["a"].full) >= t_sim
        assert oracle_cosine(cands["c"].full, cands["b"].full) >= t_sim
        assert oracle_cosine(cands["c"].full, seeds["a"].full) < t_sim
        result = similarity_expand(seeds, cands, t_sim)
        assert result.expanded == {"b"}


class TestIdentifyThreads:
    def test_provenance_covers_exactly_the_selection(self):
        emb = make_embedding(6, 40, seed=35)
        rng = np.random.default_rng(36)
        docs = [
            make_doc(f"t{i}", [f"w{int(j)}" for j in rng.integers(0, 40, size=8)])
            for i in range(60)
        ]
        vectors, _ = project_corpus(docs, emb)
        sets = [KeywordSet("s", frozenset({"w1", "w2"}))]
        result = identify_threads(docs, sets, vectors, t_sim=0.9)
        assert result.seeds.isdisjoint(result.expanded)
        assert set(result.provenance) == set(result.seeds | result.expanded)
        for tid in result.expanded:
            assert result.scores[tid] >= 0.9

    def test_no_seeds_yields_empty_result(self):
        emb = make_embedding(4, 10, seed=37)
        docs = [make_doc("t0", ["w0", "w1"])]
        vectors, _ = project_corpus(docs, emb)
        sets = [KeywordSet("s", frozenset({"w9"}), threshold=5)]
        result = identify_threads(docs, sets, vectors, t_sim=0.9)
        assert result.selected == frozenset()

    def test_unprojectable_docs_are_excluded(self):
        emb = make_embedding(4, 10, seed=38)
        docs = [make_doc("good", ["w0", "w1"]), make_doc("ghost", ["zz"])]
        vectors, skipped = project_corpus(docs, emb)
        assert skipped == ["ghost"]
        sets = [KeywordSet("s", frozenset({"zz", "w0"}))]
        result = identify_threads(docs, sets, vectors, t_sim=0.9)
        assert "ghost" not in result.selected


class TestLoadKeywordSet:
    def test_loads_and_lowercases(self, tmp_path):
        path = tmp_path / "kw.txt"
        path.write_text("# comment\nHack\nwifi  # inline\n\n", encoding="utf-8")
        ks = load_keyword_set(path, threshold=2)
        assert ks.words == frozenset({"hack", "wifi"})
        assert ks.threshold == 2
        assert ks.name == "kw"

    def test_destroyed_keywords_are_warned_and_dropped(self, tmp_path, caplog):
        path = tmp_path / "kw.txt"
        path.write_text("hack\n12345\nthe\n", encoding="utf-8")
        with caplog.at_level(logging.WARNING):
            ks = load_keyword_set(path, stopwords=frozenset({"the"}))
        assert ks.words == frozenset({"hack"})
        messages = " ".join(r.getMessage() for r in caplog.records)
        assert "12345" in messages and "the" in messages

    def test_bigram_keyword_survives(self, tmp_path):
        path = tmp_path / "kw.txt"
        path.write_text("sql_injection\n", encoding="utf-8")
        assert load_keyword_set(path).words == frozenset({"sql_injection"})

    def test_all_destroyed_is_an_error(self, tmp_path):
        path = tmp_path / "kw.txt"
        path.write_text("123\n456\n", encoding="utf-8")
        with pytest.raises(IdentificationError):
            load_keyword_set(path)
