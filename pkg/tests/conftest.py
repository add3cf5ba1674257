from fractions import Fraction

import pytest

from adiagap.graphs import CKParams, WeightedGraph, generate_ck
from adiagap.reductions import appendix_ec_instance, ec_to_mis


@pytest.fixture(scope="session")
def ck33():
    """The 15-vertex benchmark graph at w_B = 1.8."""
    return generate_ck(CKParams(r=3, g=3, w_A=Fraction(1), w_B=Fraction(9, 5)))


@pytest.fixture(scope="session")
def ck22():
    """Small 8-vertex variant, cheap enough for dense cross-checks."""
    return generate_ck(CKParams(r=2, g=2, w_A=Fraction(1), w_B=Fraction(9, 5)))


@pytest.fixture(scope="session")
def appendix():
    return appendix_ec_instance()


@pytest.fixture(scope="session")
def appendix_graph(appendix):
    return ec_to_mis(appendix)


def random_graph(rng, n, p=0.4, max_weight=4):
    """Erdos-Renyi-ish weighted graph with small rational weights."""
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((i, j))
    weights = [
        Fraction(int(rng.integers(1, max_weight * 2 + 1)), 2) for _ in range(n)
    ]
    return WeightedGraph(n=n, edges=tuple(edges), weights=tuple(weights))
