import sys
from pathlib import Path

import pytest

from threadmine.corpus import ForumCorpus

sys.path.insert(0, str(Path(__file__).parent))

from synth import make_thread  # noqa: E402


@pytest.fixture
def small_corpus() -> ForumCorpus:
    threads = [
        make_thread("t1", "Hack admin account guide", ["step one\nstep two", "thanks", "nice"]),
        make_thread("t2", "Need hacking services", ["will pay for tool"]),
        make_thread("t3", "Worm hits laptops", ["reported attack", "scary"]),
        make_thread("t4", "Stupid mistakes story", ["an article about mistakes"]),
    ]
    return ForumCorpus(name="small", threads=threads)
