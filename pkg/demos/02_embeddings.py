"""Training word vectors on the forum's own text.

Forum slang ("escrow", "keylogger", dotted hostnames) rarely appears in
general-purpose pretrained vectors, so the pipeline always trains its own
skip-gram embedding on the dump at hand.  This demo tokenizes the sample
forum, trains a small embedding, pokes at nearest neighbors, and shows
the two serialization formats.

The trained matrix is cached under ./demo_out so the later demos can
reuse it.
"""

from importlib import resources
from pathlib import Path

from threadmine import (
    TrainParams,
    build_vocabulary,
    load_corpus,
    load_embedding,
    load_stopwords,
    nearest_neighbors,
    save_embedding,
    tokenize_thread,
    train_skipgram,
)

SAMPLE = Path(str(resources.files("threadmine").joinpath("data/sample")))
OUT = Path("demo_out")


def train_or_load():
    cached = OUT / "embedding.bin"
    if cached.is_file():
        print(f"reusing cached embedding from {cached}")
        return load_embedding(cached)

    corpus = load_corpus(SAMPLE / "corpus.jsonl")
    stopwords = load_stopwords()
    docs = [tokenize_thread(t, stopwords) for t in corpus]
    vocab = build_vocabulary(docs, min_count=2)
    print(f"vocabulary: {vocab.d} tokens (unigrams + joined bigrams)")

    # the sample corpus is tiny: small dimension, no subsampling
    params = TrainParams(dims=32, window=5, epochs=5, subsample=0.0, seed=7)
    emb = train_skipgram(docs, vocab, params)
    print("epoch losses:", " ".join(f"{x:.3f}" for x in emb.epoch_losses))

    OUT.mkdir(exist_ok=True)
    save_embedding(emb, cached, format="binary")
    return emb


def main() -> None:
    emb = train_or_load()
    print(f"matrix: {emb.m} dims x {emb.d} words\n")

    for query in ("tutorial", "price", "hacked", "story"):
        if query not in emb.vocab:
            continue
        neighbors = nearest_neighbors(emb, query, k=5)
        friendly = ", ".join(f"{w} ({s:.2f})" for w, s in neighbors)
        print(f"nearest to {query!r}: {friendly}")

    OUT.mkdir(exist_ok=True)
    text_path = OUT / "embedding.txt"
    save_embedding(emb, text_path, format="text")
    reloaded = load_embedding(text_path)
    drift = abs(reloaded.vectors - emb.vectors).max()
    print(f"\ntext round trip drift: {drift:.2e} (binary round trips exactly)")


if __name__ == "__main__":
    main()
