import pytest

from lcl_lab import make_group


@pytest.fixture
def line():
    return make_group("euclidean", 1)


@pytest.fixture
def plane():
    return make_group("euclidean", 2)
