import json
import random
from pathlib import Path

import pytest

import moldialog

PKG_DATA = Path(moldialog.__file__).parent / "data"
TEST_DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def corpus_smiles() -> list[str]:
    lines = (PKG_DATA / "fixture_molecules.smi").read_text().splitlines()
    return [line.strip() for line in lines if line.strip()]


@pytest.fixture(scope="session")
def toy_pairs() -> list[dict]:
    with open(PKG_DATA / "toy_pairs.jsonl", encoding="utf-8") as handle:
        return [json.loads(line) for line in handle]


@pytest.fixture(scope="session")
def lexicon_path() -> str:
    return str(PKG_DATA / "lexicon.jsonl")


@pytest.fixture(scope="session")
def toy_pairs_path() -> str:
    return str(PKG_DATA / "toy_pairs.jsonl")


@pytest.fixture
def rng() -> random.Random:
    return random.Random(1234)
