import pytest

from planarham.expr import parse_expr
from planarham.field import Box, PlanarMap
from planarham import corpus


@pytest.fixture(scope="session")
def example1():
    return corpus.builtin("example1")


@pytest.fixture(scope="session")
def example2():
    return corpus.builtin("example2")


@pytest.fixture(scope="session")
def example3():
    return corpus.builtin("example3")


@pytest.fixture(scope="session")
def identity_map():
    return corpus.builtin("identity")


@pytest.fixture(scope="session")
def noninjective_map():
    return corpus.builtin("control_noninjective")


@pytest.fixture(scope="session")
def scaled_map():
    # (2x, y): simplest anisotropic linear map, det = 2
    return PlanarMap(f1=parse_expr("2*x"), f2=parse_expr("y"),
                     domain=Box(-4, 4, -4, 4), name="scaled")
