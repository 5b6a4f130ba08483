import numpy as np
import pytest

from spectrafit.graphs import Graph, graph_from_edges


@pytest.fixture
def triangle() -> Graph:
    return graph_from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path2() -> Graph:
    return graph_from_edges(2, [(0, 1)])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
