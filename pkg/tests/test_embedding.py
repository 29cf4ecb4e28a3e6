import numpy as np
import pytest

from threadmine.embedding import (
    EmbeddingMatrix,
    TrainParams,
    load_embedding,
    nearest_neighbors,
    save_embedding,
    train_skipgram,
)
from threadmine.errors import EmbeddingError
from threadmine.preprocess import Vocabulary, build_vocabulary
from threadmine.threadspace import cosine_similarity

from synth import make_doc, make_embedding


def context_corpus(seed=7, n_tokens=10_000, n_topics=8):
    """alpha and beta share one context pool; gamma lives in a disjoint one.

    The remaining topics are filler so that a random word pair usually
    crosses topics.
    """
    rng = np.random.default_rng(seed)
    pools = [[f"p{t}w{i}" for i in range(15)] for t in range(n_topics)]
    docs = []
    total = 0
    i = 0
    while total < n_tokens:
        i += 1
        r = i % 4
        if r == 0:
            words = [str(x) for x in rng.choice(pools[0], 4)]
            words.insert(2, "alpha")
        elif r == 1:
            words = [str(x) for x in rng.choice(pools[0], 4)]
            words.insert(2, "beta")
        elif r == 2:
            words = [str(x) for x in rng.choice(pools[1], 4)]
            words.insert(2, "gamma")
        else:
            pool = pools[i % n_topics]
            words = [str(x) for x in rng.choice(pool, 8)]
        total += len(words)
        docs.append(make_doc(f"t{i}", words))
    return docs


TRAIN_PARAMS = TrainParams(dims=24, window=5, epochs=5, seed=3, subsample=0.0)


@pytest.fixture(scope="module")
def trained():
    docs = context_corpus()
    vocab = build_vocabulary(docs, min_count=1)
    return docs, vocab, train_skipgram(docs, vocab, TRAIN_PARAMS)


class TestTrainSkipgram:
    def test_shared_context_words_end_up_closer(self, trained):
        _, _, emb = trained
        ab = cosine_similarity(emb.vector("alpha"), emb.vector("beta"))
        ag = cosine_similarity(emb.vector("alpha"), emb.vector("gamma"))
        assert ab > ag

    def test_empty_docs_is_an_error(self):
        vocab = Vocabulary(["a"], [1])
        with pytest.raises(EmbeddingError):
            train_skipgram([], vocab, TrainParams(dims=4))

    def test_empty_vocab_is_an_error(self):
        with pytest.raises(EmbeddingError):
            train_skipgram([make_doc("t", ["a"])], Vocabulary([], []), TrainParams(dims=4))

    def test_dims_are_respected(self):
        docs = [make_doc("t", ["a", "b", "c", "a", "b"] * 4)]
        vocab = build_vocabulary(docs, min_count=1)
        emb = train_skipgram(docs, vocab, TrainParams(dims=100, epochs=1, window=2, seed=0))
        assert emb.vectors.shape == (100, vocab.d)
        assert emb.m == 100

    def test_same_seed_is_bit_reproducible(self, trained):
        docs, vocab, emb = trained
        again = train_skipgram(docs, vocab, TRAIN_PARAMS)
        assert np.array_equal(emb.vectors, again.vectors)

    def test_different_seed_differs(self, trained):
        docs, vocab, emb = trained
        other = train_skipgram(docs, vocab, TrainParams(dims=24, window=5, epochs=5, seed=4, subsample=0.0))
        assert not np.array_equal(emb.vectors, other.vectors)

    def test_epoch_loss_non_increasing_over_first_three(self, trained):
        _, _, emb = trained
        losses = emb.epoch_losses
        assert len(losses) == 5
        assert losses[1] <= losses[0]
        assert losses[2] <= losses[1] * 1.05

    def test_all_components_finite(self, trained):
        _, _, emb = trained
        assert np.isfinite(emb.vectors).all()

    def test_multi_worker_mode_runs(self):
        docs = context_corpus(n_tokens=2000)
        vocab = build_vocabulary(docs, min_count=1)
        params = TrainParams(dims=8, window=3, epochs=2, seed=1, subsample=0.0, workers=3)
        emb = train_skipgram(docs, vocab, params)
        assert emb.vectors.shape == (8, vocab.d)
        assert np.isfinite(emb.vectors).all()

    def test_param_validation(self):
        with pytest.raises(EmbeddingError):
            TrainParams(dims=0)
        with pytest.raises(EmbeddingError):
            TrainParams(window=0)


class TestNearestNeighbors:
    def test_duplicate_column_scores_one(self):
        vocab = Vocabulary(["a", "b", "c"], [3, 2, 1])
        vectors = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 1.0]])
        emb = EmbeddingMatrix(vectors=vectors, vocab=vocab)
        top = nearest_neighbors(emb, "a", 1)
        assert top[0][0] == "b"
        assert top[0][1] == pytest.approx(1.0)

    def test_oov_query_is_an_error(self):
        emb = make_embedding(4, 5)
        with pytest.raises(EmbeddingError, match="nope"):
            nearest_neighbors(emb, "nope", 1)

    def test_full_k_returns_all_others_sorted(self):
        emb = make_embedding(6, 12, seed=5)
        result = nearest_neighbors(emb, "w0", emb.d - 1)
        assert len(result) == emb.d - 1
        assert "w0" not in [w for w, _ in result]
        scores = [s for _, s in result]
        assert all(a >= b for a, b in zip(scores, scores[1:]))

    def test_k_out_of_range(self):
        emb = make_embedding(4, 5)
        with pytest.raises(EmbeddingError):
            nearest_neighbors(emb, "w0", 5)

    def test_ties_broken_by_vocabulary_index(self):
        vocab = Vocabulary(["q", "x", "y"], [1, 1, 1])
        vectors = np.array([[1.0, 2.0, 1.0], [0.0, 0.0, 0.0]])
        emb = EmbeddingMatrix(vectors=vectors, vocab=vocab)
        result = nearest_neighbors(emb, "q", 2)
        assert [w for w, _ in result] == ["x", "y"]


class TestSaveLoad:
    def test_binary_round_trip_is_exact(self, tmp_path):
        emb = make_embedding(7, 19, seed=11)
        path = tmp_path / "emb.bin"
        save_embedding(emb, path, format="binary")
        loaded = load_embedding(path)
        assert np.array_equal(loaded.vectors, emb.vectors)
        assert loaded.vocab.words == emb.vocab.words
        assert loaded.vocab.counts == emb.vocab.counts

    def test_text_round_trip_within_tolerance(self, tmp_path):
        emb = make_embedding(7, 19, seed=12)
        path = tmp_path / "emb.txt"
        save_embedding(emb, path, format="text")
        loaded = load_embedding(path)
        assert loaded.vocab.words == emb.vocab.words
        assert np.max(np.abs(loaded.vectors - emb.vectors)) <= 1e-6

    def test_text_line_with_wrong_component_count(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("2 3\nfoo 0.1 0.2 0.3\nbar 0.1 0.2\n", encoding="utf-8")
        with pytest.raises(EmbeddingError, match=":3"):
            load_embedding(path)

    def test_text_bad_header(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("banana\n", encoding="utf-8")
        with pytest.raises(EmbeddingError):
            load_embedding(path)

    def test_truncated_binary(self, tmp_path):
        emb = make_embedding(4, 6, seed=1)
        path = tmp_path / "emb.bin"
        save_embedding(emb, path, format="binary")
        data = path.read_bytes()
        path.write_bytes(data[: len(data) - 16])
        with pytest.raises(EmbeddingError):
            load_embedding(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(EmbeddingError):
            load_embedding(tmp_path / "nope.bin")
