from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import strategies as st

from services.circle_search import heuristic_circle_system
from services.measures import Measure
from services.retractions import build_system, random_system
from services.spaces import build_circle, make_space


@st.composite
def metric_spaces(draw, min_size=2, max_size=8):
    """Shortest-path metrics of complete graphs with positive rational weights"""
    n = draw(st.integers(min_size, max_size))
    graph = nx.complete_graph(n)
    for u, v in graph.edges:
        graph[u][v]["weight"] = draw(
            st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=6)
        )
    lengths = dict(nx.all_pairs_dijkstra_path_length(graph))
    dist = [[Fraction(lengths[i][j]) for j in range(n)] for i in range(n)]
    base = draw(st.integers(0, n - 1))
    return make_space([f"p{i}" for i in range(n)], dist, base=base)


@st.composite
def measures(draw, space_strategy=None):
    space = draw(space_strategy or metric_spaces())
    support = draw(st.lists(st.sampled_from(range(space.size)), min_size=1, max_size=space.size, unique=True))
    coeffs = {
        p: draw(st.fractions(min_value=-3, max_value=3, max_denominator=4)) for p in support
    }
    return Measure(space, coeffs)


@st.composite
def circle_systems(draw, min_n=3, max_n=16):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_system(build_circle(n), np.random.default_rng(seed))


@pytest.fixture
def c4_system():
    """x1 under the centre, x2 under x1, x3 under x2, x4 under x1"""
    return heuristic_circle_system(4, "peel-one-arc").system


@pytest.fixture
def c4_manual():
    space = build_circle(4)
    return build_system(space, [0, 1, 2, 3, 4], {1: 0, 2: 1, 3: 2, 4: 1})
