"""How much do human annotators actually agree?

Groundtruth labels come from several annotators voting per thread, so
before trusting them it is worth measuring chance-corrected agreement.
Fleiss' kappa does that for any number of raters; collapsing the matrix
to one-class-vs-rest gives a per-class view that shows which categories
are fuzzy.

The bundled sample ships five annotators' votes over forty threads.
"""

from importlib import resources
from pathlib import Path

from threadmine import (
    annotation_counts,
    binary_fleiss_kappa,
    fleiss_kappa,
    load_annotations,
    load_corpus,
)

SAMPLE = Path(str(resources.files("threadmine").joinpath("data/sample")))
CLASSES = ("Hacks", "Services", "Alerts", "Experiences")


def main() -> None:
    corpus = load_corpus(SAMPLE / "corpus.jsonl")
    votes = load_annotations(SAMPLE / "annotations.csv", corpus, CLASSES)
    counts, subjects = annotation_counts(votes, CLASSES)

    raters = int(counts[0].sum())
    print(f"subjects: {len(subjects)}, raters per subject: {raters}")
    print(f"overall Fleiss kappa: {fleiss_kappa(counts):.3f}")

    print("\nper-class (one vs rest):")
    for i, name in enumerate(CLASSES):
        print(f"  {name:<12} {binary_fleiss_kappa(counts, i):.3f}")

    unanimous = int((counts.max(axis=1) == raters).sum())
    print(f"\nunanimous subjects: {unanimous} of {len(subjects)}")


if __name__ == "__main__":
    main()
