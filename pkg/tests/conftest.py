import pytest

from kurosh.ambient import amalgamated, parse_word, plain
from kurosh.finite import central_embedding, cyclic, dihedral, symmetric


@pytest.fixture
def z2z3():
    return plain([cyclic(2), cyclic(3)])


@pytest.fixture
def z2z2():
    return plain([cyclic(2), cyclic(2)])


@pytest.fixture
def f2():
    return plain([], 2)


@pytest.fixture
def z4z4():
    A = cyclic(2)
    return amalgamated([cyclic(4), cyclic(4)], A, [central_embedding(A, cyclic(4))] * 2)


@pytest.fixture
def mixed_amalgam():
    A = cyclic(2)
    fs = [dihedral(4), cyclic(6)]
    return amalgamated(fs, A, [central_embedding(A, G) for G in fs], 1)


def words(spec, *texts):
    return [parse_word(spec, t) for t in texts]


SMALL_GROUPS = [cyclic(1), cyclic(2), cyclic(3), cyclic(4), cyclic(6), symmetric(3), dihedral(4)]
