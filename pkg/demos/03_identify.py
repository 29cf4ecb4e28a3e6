"""Finding the threads worth reading.

Keyword matching alone is brittle: the analyst never thinks of every
word, and forum users keep inventing new ones.  The pipeline therefore
selects a seed set by keyword thresholds and then *expands* it with
threads whose projection sits close to a seed in the 2m-dimensional
thread space.

This demo runs both phases on the sample forum and shows what the
expansion caught that the keywords missed, including which seed vouched
for each adopted thread.
"""

from importlib import resources
from pathlib import Path

from threadmine import (
    TrainParams,
    build_vocabulary,
    identify_threads,
    load_corpus,
    load_embedding,
    load_keyword_set,
    load_stopwords,
    project_corpus,
    save_embedding,
    tokenize_thread,
    train_skipgram,
)

SAMPLE = Path(str(resources.files("threadmine").joinpath("data/sample")))
T_SIM = 0.96


def embedding_for(docs):
    """Train the sample embedding, or reuse the one cached by demo 02."""
    cached = Path("demo_out/embedding.bin")
    if cached.is_file():
        return load_embedding(cached)
    vocab = build_vocabulary(docs, min_count=2)
    emb = train_skipgram(docs, vocab, TrainParams(dims=32, window=5, epochs=5, subsample=0.0, seed=7))
    cached.parent.mkdir(exist_ok=True)
    save_embedding(emb, cached)
    return emb


def main() -> None:
    corpus = load_corpus(SAMPLE / "corpus.jsonl")
    stopwords = load_stopwords()
    docs = [tokenize_thread(t, stopwords) for t in corpus]
    emb = embedding_for(docs)

    sets = [
        load_keyword_set(SAMPLE / f"keywords_{name}.txt", name=name, stopwords=stopwords)
        for name in ("hacking", "concern", "question")
    ]
    for ks in sets:
        print(f"keyword set {ks.name!r}: {len(ks.words)} words, threshold {ks.threshold}")

    vectors, skipped = project_corpus(docs, emb)
    result = identify_threads(docs, sets, vectors, t_sim=T_SIM)

    total = len(corpus)
    print(f"\nseeds (keyword matched):      {len(result.seeds)}")
    print(f"expanded (similarity >= {T_SIM}): {len(result.expanded)}")
    print(f"selected: {len(result.selected)} of {total} ({len(result.selected) / total:.1%})")
    if skipped:
        print(f"unprojectable threads: {len(skipped)}")

    print("\nwhat similarity caught that keywords missed:")
    best_first = sorted(result.expanded, key=lambda t: -result.scores[t])[:5]
    for tid in best_first:
        seed = result.best_seed[tid]
        print(f"  {tid}  score={result.scores[tid]:.3f}  vouched by seed {seed}")
        print(f"    title:      {corpus[tid].title!r}")
        print(f"    seed title: {corpus[seed].title!r}")


if __name__ == "__main__":
    main()
