"""Vertex-weighted graphs for maximum-weight independent set instances.

A :class:`WeightedGraph` carries a positive rational weight ``c_i`` per
vertex and a set of undirected edges. Weights stay exact rationals
(:class:`fractions.Fraction`) end to end; they are converted to floating
point only inside the eigensolver, so that degenerate-level grouping can
rely on exact arithmetic.

The module also provides the two fixed instance families used throughout:
the CK graphs (a planted independent set ``V_A`` competing against groups
of cliques ``V_B``) and the 7-vertex exact-cover conflict graph used as a
worked example.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

__all__ = [
    "WeightedGraph",
    "CKParams",
    "generate_ck",
    "appendix_ec_graph",
    "load_graph",
    "save_graph",
    "parse_weight",
    "format_weight",
]

WeightLike = Union[int, str, Fraction]


def parse_weight(value: WeightLike) -> Fraction:
    """Convert a weight given as int, Fraction, "num/den" or decimal string.

    Decimal strings convert exactly: ``"1.8"`` becomes ``Fraction(9, 5)``.
    Binary floats are rejected so that no silent rounding can enter an
    instance definition; write ``"1.8"`` (or load JSON through
    :func:`load_graph`, which keeps number literals as strings).
    """
    if isinstance(value, float):
        raise TypeError(
            f"refusing inexact float weight {value!r}; pass a string like '1.8'"
        )
    return Fraction(value)


@dataclass(frozen=True)
class WeightedGraph:
    """Immutable vertex-weighted undirected graph.

    Attributes:
        n: Vertex count. Vertices are 0-based internally; file formats and
            the CLI display 1-based labels.
        weights: Per-vertex positive rational weight ``c_i``.
        edges: Canonically ordered edge tuples ``(i, j)`` with ``i < j``,
            sorted, without duplicates or self-loops.
    """

    n: int
    weights: tuple[Fraction, ...]
    edges: tuple[tuple[int, int], ...]

    def __init__(
        self,
        n: int,
        weights: Sequence[WeightLike],
        edges: Iterable[Sequence[int]],
    ):
        if n <= 0:
            raise ValueError(f"vertex count must be positive, got {n}")
        ws = tuple(parse_weight(w) for w in weights)
        if len(ws) != n:
            raise ValueError(f"expected {n} weights, got {len(ws)}")
        if any(w <= 0 for w in ws):
            raise ValueError("all vertex weights must be positive")
        canon = set()
        for e in edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            canon.add((min(i, j), max(i, j)))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "edges", tuple(sorted(canon)))
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        object.__setattr__(self, "_nbrs", tuple(frozenset(s) for s in nbrs))

    def neighbors(self, i: int) -> frozenset[int]:
        """Vertices adjacent to ``i``."""
        if not 0 <= i < self.n:
            raise IndexError(f"vertex {i} out of range for n={self.n}")
        return self._nbrs[i]

    def degree(self, i: int) -> int:
        """Number of edges incident to ``i``."""
        return len(self.neighbors(i))

    def has_edge(self, i: int, j: int) -> bool:
        return j in self.neighbors(i)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def total_weight(self) -> Fraction:
        return sum(self.weights, Fraction(0))


@dataclass(frozen=True)
class CKParams:
    """Parameters of the CK graph family.

    ``r`` is the clique size, ``g`` the group count. The generated graph
    has ``2g`` independent vertices ``V_A`` of weight ``w_A`` followed by
    ``g`` cliques of ``r`` vertices (``V_B``, weight ``w_B``). For
    ``w_B < 2 w_A`` the set ``V_A`` is the unique maximum-weight
    independent set, while products of one-vertex-per-clique choices form
    exponentially many lighter maximal sets.
    """

    r: int
    g: int
    w_A: Fraction
    w_B: Fraction

    def __init__(self, r: int, g: int, w_A: WeightLike, w_B: WeightLike):
        if r < 2:
            raise ValueError(f"clique size r must be >= 2, got {r}")
        if g < 1:
            raise ValueError(f"group count g must be >= 1, got {g}")
        wa, wb = parse_weight(w_A), parse_weight(w_B)
        if wa <= 0 or wb <= 0:
            raise ValueError("weights must be positive")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "w_A", wa)
        object.__setattr__(self, "w_B", wb)

    @property
    def num_vertices(self) -> int:
        return 2 * self.g + self.g * self.r

    def part_A(self) -> range:
        """The planted independent set: vertices 0 .. 2g-1."""
        return range(2 * self.g)

    def part_B(self) -> range:
        """The clique vertices: 2g .. 2g + g*r - 1."""
        return range(2 * self.g, self.num_vertices)


def generate_ck(params: CKParams) -> WeightedGraph:
    """Build the CK graph for ``params``.

    Vertex layout is deterministic: group ``t`` of ``V_A`` is the pair
    ``(2t, 2t+1)``; clique ``l`` occupies ``2g + l*r .. 2g + (l+1)*r - 1``.
    Edges are all intra-clique pairs plus every pair between group ``t``
    and every vertex of every clique with label ``!= t``, so each group is
    adjacent to all but the same-label clique.
    """
    r, g = params.r, params.g
    base = 2 * g
    edges: list[tuple[int, int]] = []
    for l in range(g):
        clique = range(base + l * r, base + (l + 1) * r)
        edges.extend((u, v) for u in clique for v in clique if u < v)
        for t in range(g):
            if t == l:
                continue
            edges.extend((min(a, v), max(a, v)) for a in (2 * t, 2 * t + 1) for v in clique)
    weights = [params.w_A] * (2 * g) + [params.w_B] * (g * r)
    return WeightedGraph(params.num_vertices, weights, edges)


# The worked exact-cover example: 7 sets over 5 elements. Vertex weights
# are the set sizes; edges join sets that share an element. Its unique
# maximum-weight independent set is {0, 4, 6} (weight 5 = element count),
# the exact cover.
_EC_EXAMPLE_WEIGHTS = (3, 3, 3, 2, 1, 2, 1)
_EC_EXAMPLE_EDGES = (
    (0, 1), (0, 2), (0, 3), (0, 5),
    (1, 2), (1, 3), (1, 5), (1, 6),
    (2, 3), (2, 4), (2, 5),
    (3, 4),
    (5, 6),
)


def appendix_ec_graph() -> WeightedGraph:
    """The fixed 7-vertex exact-cover conflict graph used in examples."""
    return WeightedGraph(7, _EC_EXAMPLE_WEIGHTS, _EC_EXAMPLE_EDGES)


def format_weight(w: Fraction):
    """Render a rational losslessly for JSON: plain int or "num/den"."""
    if w.denominator == 1:
        return int(w)
    return f"{w.numerator}/{w.denominator}"


def save_graph(graph: WeightedGraph, path) -> None:
    """Write a graph as JSON with exact weights and 0-based edges."""
    doc = {
        "n": graph.n,
        "weights": [format_weight(w) for w in graph.weights],
        "edges": [[i, j] for i, j in graph.edges],
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def load_graph(path) -> WeightedGraph:
    """Load a graph JSON document.

    Weights may be integers, "num/den" strings, or decimal strings;
    decimal number literals in the file are parsed as strings so "1.8"
    converts exactly to 9/5.
    """
    with open(path) as f:
        doc = json.load(f, parse_float=str)
    try:
        return WeightedGraph(doc["n"], doc["weights"], doc["edges"])
    except KeyError as e:
        raise ValueError(f"graph file {path} missing key {e}") from e
