"""Loading a forum dump and looking at its shape.

Forum dumps are newline-delimited JSON, one thread per line, each thread a
title plus an ordered list of posts.  This demo loads the bundled sample
forum and prints the headline numbers: how many threads, how many posts,
and the heavily skewed posts-per-thread distribution that makes the first
post the natural summary of a thread.
"""

from importlib import resources
from pathlib import Path

from threadmine import corpus_stats, load_corpus

SAMPLE = Path(str(resources.files("threadmine").joinpath("data/sample")))


def main() -> None:
    corpus = load_corpus(SAMPLE / "corpus.jsonl")
    report = corpus_stats(corpus)

    print(f"threads: {report.thread_count}")
    print(f"posts:   {report.post_count}")
    print(f"authors: {report.author_count}")
    print(f"threads with a single post: {report.frac_one_post:.1%}")
    print(f"threads with at most two:   {report.frac_le_two_posts:.1%}")

    print("\nposts-per-thread CCDF  (P[posts >= k]):")
    for k, p in report.ccdf:
        bar = "#" * round(40 * p)
        print(f"  k={k:<2} {p:6.3f} {bar}")

    thread = corpus.threads[0]
    print(f"\nfirst thread ({thread.thread_id}):")
    print(f"  title: {thread.title}")
    print(f"  first post: {thread.first_post.body.splitlines()[0]} ...")
    print(f"  replies: {len(thread.replies)}")


if __name__ == "__main__":
    main()
