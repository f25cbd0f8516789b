import random
from pathlib import Path

import pytest

from provkit.corpus import TokenSequence, prepare

FIXTURES = Path(__file__).parent / "fixtures"
APPENDIX = FIXTURES / "appendix"


def load_article(name, role):
    return prepare((APPENDIX / f"{name}_{role}.txt").read_text(encoding="utf-8"), role)


def raw_article(name, role):
    return (APPENDIX / f"{name}_{role}.txt").read_text(encoding="utf-8")


def random_doc(rng, doc_id, vocab=20, max_len=200, min_len=1):
    n = rng.randint(min_len, max_len)
    return TokenSequence(doc_id, tuple(f"w{rng.randrange(vocab)}" for _ in range(n)))


@pytest.fixture
def article183():
    return {r: load_article("business_183", r) for r in ("original", "suspicious", "reference")}


@pytest.fixture
def article038():
    return {r: load_article("business_038", r) for r in ("original", "suspicious", "reference", "other")}


@pytest.fixture
def rng():
    return random.Random(1234)


def pytest_terminal_summary(terminalreporter):
    from .acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
