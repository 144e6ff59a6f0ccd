from pathlib import Path

import pytest

from limitmon.alphabet import Alphabet, Word
from limitmon.markov import load_chain

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

MODE_IID_WORD = "c b b a b a c a a b c a c a a a"
XYZ_WORD = "x y z x y z x y x y z x y z x y"


@pytest.fixture
def abc():
    return Alphabet(("a", "b", "c"), ordered=True)


@pytest.fixture
def mode_word(abc):
    return Word.parse(abc, MODE_IID_WORD)


@pytest.fixture(scope="session")
def xyz_chain():
    return load_chain(DATA / "example.json")


@pytest.fixture
def xyz_word(xyz_chain):
    return Word.parse(xyz_chain.alphabet, XYZ_WORD)


@pytest.fixture
def chain_path():
    return str(DATA / "example.json")
