"""Regenerate the bundled sample dataset.

The package ships a small synthetic forum dump plus keyword files, labels,
annotator votes, and a ready-to-run config under
``src/threadmine/data/sample/``.  This script is how those files were
produced; rerun it (same seed) to refresh them, or point ``--dest``
somewhere else to build a variant to play with.

The generated forum imitates the shape of a security-forum dump: four
kinds of threads (step-by-step intrusion writeups, buying/selling of
services, incident alerts, and war stories), plus off-topic chatter.
Roughly 60% of the threads carry at least one word from each of the three
keyword sets, which is what the `identify` subcommand goes looking for.
"""

from __future__ import annotations

import argparse
import csv
import json
from pathlib import Path

import numpy as np

CLASSES = ["Hacks", "Services", "Alerts", "Experiences"]

CLASS_POOLS = {
    "Hacks": [
        "tutorial", "guide", "steps", "howto", "instructions", "method",
        "bypass", "payload", "admin", "password", "shell", "root",
    ],
    "Services": [
        "tool", "price", "pay", "selling", "buying", "cheap", "service",
        "escrow", "vendor", "accounts", "bulk", "offer",
    ],
    "Alerts": [
        "announced", "reported", "hacked", "vulnerability", "breach",
        "patch", "worm", "warning", "infected", "emergency", "leak", "zero",
    ],
    "Experiences": [
        "article", "story", "challenge", "lesson", "experience", "mistake",
        "learned", "review", "opinion", "journey", "funny", "college",
    ],
}

KEYWORDS = {
    "hacking": ["hack", "hacking", "exploit", "crack", "malware", "botnet", "ddos"],
    "concern": ["worried", "urgent", "compromised", "stolen", "victim", "scared"],
    "question": ["anyone", "advice", "tips", "wondering", "possible"],
}

FILLER = [
    "forum", "thread", "post", "site", "link", "share", "thanks", "member",
    "new", "old", "good", "time", "people", "works", "windows", "linux",
    "email", "facebook", "wifi", "network", "server", "computer", "phone",
]

OFFTOPIC = [
    "music", "game", "movie", "coffee", "weekend", "sports", "holiday",
    "pizza", "weather", "birthday", "guitar", "camera", "travel",
]

REPLIES = [
    "great post thanks for sharing",
    "works great for me",
    "nice one",
    "can you explain more",
    "bookmarked this",
    "same problem here",
    "did not work on my setup",
    "appreciate the details",
]


def sentence(rng: np.random.Generator, pools: list[list[str]], length: int) -> str:
    words = []
    for _ in range(length):
        pool = pools[int(rng.integers(len(pools)))]
        words.append(pool[int(rng.integers(len(pool)))])
    return " ".join(words)


def build_thread(rng: np.random.Generator, i: int, cls: str | None):
    tid = f"s{i:04d}"
    relevant = cls is not None
    if relevant:
        pools = [CLASS_POOLS[cls], CLASS_POOLS[cls], FILLER]
    else:
        pools = [OFFTOPIC, OFFTOPIC, FILLER]

    title = sentence(rng, pools, int(rng.integers(3, 7)))
    body_lines = [
        sentence(rng, pools, int(rng.integers(6, 14)))
        for _ in range(int(rng.integers(1, 4)))
    ]
    if relevant:
        # sprinkle one word from each keyword set so phase-1 selection bites
        # on most (not all) of the on-topic threads
        if rng.random() < 0.75:
            hook = " ".join(
                str(rng.choice(KEYWORDS[name])) for name in ("hacking", "concern", "question")
            )
            body_lines.append(hook)
        elif rng.random() < 0.5:
            body_lines.append(str(rng.choice(KEYWORDS["hacking"])))
    body = "\n".join(body_lines)

    n_replies = int(rng.choice([0, 0, 0, 1, 1, 2, 3]))
    posts = [
        {
            "post_id": f"{tid}p0",
            "author": f"user{int(rng.integers(40))}",
            "timestamp": f"2019-{int(rng.integers(1, 13)):02d}-{int(rng.integers(1, 28)):02d}T12:00:00",
            "body": body,
        }
    ]
    for r in range(n_replies):
        posts.append(
            {
                "post_id": f"{tid}p{r + 1}",
                "author": f"user{int(rng.integers(40))}",
                "timestamp": None,
                "body": REPLIES[int(rng.integers(len(REPLIES)))],
            }
        )
    return {"thread_id": tid, "title": title, "posts": posts}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    default_dest = Path(__file__).resolve().parent.parent / "src/threadmine/data/sample"
    parser.add_argument("--dest", type=Path, default=default_dest)
    parser.add_argument("--threads", type=int, default=240)
    parser.add_argument("--seed", type=int, default=2019)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    dest = args.dest
    dest.mkdir(parents=True, exist_ok=True)

    records = []
    truth: dict[str, str] = {}
    for i in range(args.threads):
        on_topic = rng.random() < 0.6
        cls = CLASSES[i % 4] if on_topic else None
        record = build_thread(rng, i, cls)
        records.append(record)
        if cls is not None:
            truth[record["thread_id"]] = cls

    (dest / "corpus.jsonl").write_text(
        "\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8"
    )

    # label the on-topic threads; this is the training/evaluation groundtruth
    with (dest / "labels.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["thread_id", "label"])
        for tid in sorted(truth):
            writer.writerow([tid, truth[tid]])

    # five annotators vote on the first 40 labeled threads, mostly agreeing
    with (dest / "annotations.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["thread_id", "annotator_id", "label"])
        for tid in sorted(truth)[:40]:
            for annotator in range(5):
                if rng.random() < 0.85:
                    vote = truth[tid]
                else:
                    vote = CLASSES[int(rng.integers(4))]
                writer.writerow([tid, f"a{annotator}", vote])

    for name, words in KEYWORDS.items():
        (dest / f"keywords_{name}.txt").write_text(
            f"# keyword set: {name}\n" + "\n".join(words) + "\n", encoding="utf-8"
        )

    config = f"""# Sample pipeline configuration for the bundled synthetic forum.
# Paths are relative to this file.
corpus = corpus.jsonl
labels = labels.csv
output_dir = sample_out
seed = 7

keywords.hacking = keywords_hacking.txt
keywords.concern = keywords_concern.txt
keywords.question = keywords_question.txt

class.Hacks = tutorial guide steps
class.Services = tool price pay
class.Alerts = announced reported hacked
class.Experiences = article story challenge

# the corpus is tiny, so shrink the embedding and keep every token
embedding.dims = 32
embedding.window = 5
embedding.epochs = 5
embedding.min_count = 2
embedding.subsample = 0
embedding.save_text = true

identify.t_sim = 0.96
classify.trees = 30
classify.boost = 2.0
evaluate.folds = 5
"""
    (dest / "config.txt").write_text(config, encoding="utf-8")

    print(f"wrote {len(records)} threads ({len(truth)} labeled) to {dest}")


if __name__ == "__main__":
    main()
