"""Sorting the interesting threads into user-defined classes.

Each class is declared by a handful of words ("tutorial guide steps", "tool
price pay", ...).  The classifier places every vocabulary word on an
affinity scale per class (softmax of cosine similarity to the class's mean
vector), projects each thread through the affinity-scaled embedding, and
trains one random forest per class with that class's examples upweighted.
At prediction time the per-class forests vote and the plurality wins.

The demo trains on the sample groundtruth, inspects a few predictions,
and finishes with a stratified cross-validation table.
"""

from importlib import resources
from pathlib import Path

from threadmine import (
    ClassSpec,
    ConfusionMatrix,
    EnsembleParams,
    ForestParams,
    TrainParams,
    build_vocabulary,
    evaluation_report,
    load_corpus,
    load_embedding,
    load_keyword_set,
    load_labels,
    load_stopwords,
    predict,
    project_corpus,
    save_embedding,
    stratified_kfold,
    tokenize_thread,
    train_ensemble,
    train_skipgram,
)

SAMPLE = Path(str(resources.files("threadmine").joinpath("data/sample")))

CLASS_SPECS = (
    ClassSpec("Hacks", ("tutorial", "guide", "steps")),
    ClassSpec("Services", ("tool", "price", "pay")),
    ClassSpec("Alerts", ("announced", "reported", "hacked")),
    ClassSpec("Experiences", ("article", "story", "challenge")),
)


def embedding_for(docs):
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
    by_id = {doc.thread_id: doc for doc in docs}
    emb = embedding_for(docs)

    classes = [spec.name for spec in CLASS_SPECS]
    labels = load_labels(SAMPLE / "labels.csv", corpus, classes)
    sets = [
        load_keyword_set(SAMPLE / f"keywords_{name}.txt", name=name, stopwords=stopwords)
        for name in ("hacking", "concern", "question")
    ]

    vectors, _ = project_corpus(docs, emb)
    items = [
        (corpus[tid], by_id[tid], label)
        for tid, label in labels.labels.items()
        if tid in vectors
    ]
    print(f"labeled threads: {len(items)}")

    params = EnsembleParams(boost=2.0, forest=ForestParams(n_trees=30, seed=7))
    model = train_ensemble(items, CLASS_SPECS, emb, sets, params)

    print("\na few predictions:")
    for thread, doc, truth in items[:5]:
        result = predict(model, thread, doc)
        marker = "ok " if result.label == truth else "MISS"
        print(f"  [{marker}] {thread.thread_id}: predicted {result.label:<12} truth {truth}")

    print("\n5-fold stratified cross-validation:")
    y = [label for _, _, label in items]
    cms = []
    for fold_no, test_idx in enumerate(stratified_kfold(y, 5, seed=7)):
        test = set(int(i) for i in test_idx)
        fold_params = EnsembleParams(
            boost=2.0, forest=ForestParams(n_trees=30, seed=100 + fold_no)
        )
        fold_model = train_ensemble(
            [it for i, it in enumerate(items) if i not in test],
            CLASS_SPECS,
            emb,
            sets,
            fold_params,
        )
        y_true = [items[i][2] for i in sorted(test)]
        y_pred = [predict(fold_model, items[i][0], items[i][1]).label for i in sorted(test)]
        cms.append(ConfusionMatrix.from_predictions(y_true, y_pred, classes))
    print(evaluation_report(cms).format_table())


if __name__ == "__main__":
    main()
