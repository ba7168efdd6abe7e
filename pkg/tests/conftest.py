import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

CORPORA = REPO / "corpora"


@pytest.fixture(scope="session")
def corpora_dir() -> Path:
    return CORPORA


@pytest.fixture(scope="session")
def motivating_signatures():
    from sepforge.minij import load_signatures
    return load_signatures(CORPORA / "motivating" / "signatures.json")


@pytest.fixture(scope="session")
def motivating_examples(motivating_signatures):
    from sepforge.corpus import ingest_corpus
    examples, warnings = ingest_corpus(CORPORA / "motivating")
    assert not warnings
    return examples


@pytest.fixture(scope="session")
def motivating_sep(motivating_examples, motivating_signatures):
    from sepforge.pipeline import mine_from_examples
    seps = mine_from_examples(motivating_examples, motivating_signatures, 2)
    assert len(seps) == 1
    return seps[0]


@pytest.fixture(scope="session")
def motivating_client_source():
    return (CORPORA / "motivating_client" / "showLicense.minij").read_text()
