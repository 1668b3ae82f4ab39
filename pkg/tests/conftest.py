from __future__ import annotations

import random
from pathlib import Path

import pytest

from sonnetgen.cli import bundled, filtered_documents
from sonnetgen.eval import load_imageability
from sonnetgen.lm import train
from sonnetgen.phonetics import default_lexicon, default_lexicon_path
from sonnetgen.polish import load_imagery, load_pos, load_similes

DATA = Path(bundled("corpus.txt")).parent


@pytest.fixture(scope="session")
def lex():
    return default_lexicon()


@pytest.fixture(scope="session")
def cmu_path() -> Path:
    return default_lexicon_path()


@pytest.fixture(scope="session")
def corpus_text() -> str:
    return (DATA / "corpus.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def documents(corpus_text):
    docs, _ = filtered_documents(corpus_text)
    return docs


@pytest.fixture(scope="session")
def model(documents):
    return train(["\n".join(d) for d in documents])


@pytest.fixture(scope="session")
def tables():
    return (
        load_imagery(DATA / "imagery.tsv"),
        load_similes(DATA / "similes.tsv"),
        load_pos(DATA / "pos.tsv"),
    )


@pytest.fixture(scope="session")
def img_lex():
    return load_imageability(DATA / "imageability.tsv")


@pytest.fixture
def rng():
    return random.Random(1234)
