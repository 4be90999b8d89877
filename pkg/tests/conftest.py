import json
from pathlib import Path

import pytest

from scoregame.harness import load_corpus

DATA_DIR = Path(__file__).parent / "data"
DESK_CORPUS = Path(__file__).parents[1] / "src" / "scoregame" / "data" / "desk_corpus.jsonl"


@pytest.fixture(scope="session")
def known_attacks():
    """Transcribed worked-example strings: gold summary, broken-sentence attack,
    source document, and a scrambled-code trigger, plus their published scores."""
    with open(DATA_DIR / "known_attacks.json", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def desk_corpus():
    return load_corpus(DESK_CORPUS)


@pytest.fixture(scope="session")
def desk_corpus_path():
    return DESK_CORPUS
