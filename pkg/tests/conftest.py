from fractions import Fraction
from pathlib import Path

import pytest

from ringdec.codes import Code, read_pcm_file
from ringdec.rings import make_cyclic_ring, read_ring_file

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def z2():
    return make_cyclic_ring(2)


@pytest.fixture(scope="session")
def z3():
    return make_cyclic_ring(3)


@pytest.fixture(scope="session")
def z4():
    return make_cyclic_ring(4)


@pytest.fixture(scope="session")
def gf4():
    return read_ring_file(DATA / "gf4.ring")


@pytest.fixture(scope="session")
def cycle_code():
    # three checks that close a loop through variables 0, 2, 4
    return read_pcm_file(DATA / "z3_cycle.pcm")


@pytest.fixture(scope="session")
def tree_code():
    return read_pcm_file(DATA / "z3_tree.pcm")


@pytest.fixture(scope="session")
def z3_n4():
    return read_pcm_file(DATA / "z3_n4.pcm")


@pytest.fixture(scope="session")
def z4_code():
    return read_pcm_file(DATA / "z4_small.pcm")


def frac(*xs):
    return [Fraction(x) for x in xs]
