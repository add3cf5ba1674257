"""Reductions between problems and their Ising encodings.

The central object is the pseudo-boolean form of maximum-weight
independent set,

    Y(x) = sum_i c_i x_i - sum_{ij in E} J_ij x_i x_j,   x_i in {0, 1},

whose maximizers, for couplings strictly above ``min(c_i, c_j)`` on every
edge, are exactly the maximum-weight independent sets. Substituting
``x_i = (1 + s_i)/2`` turns ``-4 Y`` into the spin form

    E(s) = sum_i h_i s_i + sum_{ij} J_ij s_i s_j + const,
    h_i = sum_{j in nbr(i)} J_ij - 2 c_i,

so minimizing the Ising energy maximizes Y, and ground configurations
carry ``s_i = +1`` on the selected vertices. The scaled family divides
the weights by ``k`` while keeping the couplings fixed, which reshapes
the spectrum without moving the argmin.

Also here: exact cover to MIS, exact cover (each element in exactly 3
sets) to positive 1-in-3 SAT, 3SAT to MIS via clause triangles, and the
clause-counting Hamiltonian built from ``B_i`` (clauses per variable)
and ``I_ij`` (clauses shared by a pair).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .graphs import WeightedGraph, WeightLike, format_weight, parse_weight

__all__ = [
    "IsingModel",
    "ECInstance",
    "CNF",
    "default_coupling",
    "pseudo_boolean_value",
    "mis_to_ising",
    "scaled_ising",
    "ec_to_mis",
    "ec3_to_1in3sat",
    "threesat_to_mis",
    "ay_hamiltonian",
    "decode_ground_bitstring",
    "appendix_ec_instance",
    "load_ec",
    "save_ec",
    "load_cnf",
    "save_cnf",
    "load_ising",
    "save_ising",
]

Edge = tuple[int, int]
Coupling = Union[WeightLike, Mapping[Edge, WeightLike]]


@dataclass(frozen=True)
class IsingModel:
    """Diagonal problem Hamiltonian sum h_i sigma^z_i + sum J_ij sigma^z_i sigma^z_j.

    Attributes:
        n: Spin count.
        h: Local fields, exact rationals.
        J: Couplings keyed by canonical edge (i, j), i < j.
        bit_convention: How a measured bitstring maps to a vertex set.
            "plus" is the x_i = (1+s_i)/2 choice used by the MIS
            encodings (selected vertices carry spin +1); "minus" records
            the opposite x_i = (1-s_i)/2 bookkeeping of the
            clause-counting Hamiltonian.
    """

    n: int
    h: tuple[Fraction, ...]
    J: dict[Edge, Fraction]
    bit_convention: str = "plus"

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError(f"spin count must be positive, got {self.n}")
        if len(self.h) != self.n:
            raise ValueError(f"expected {self.n} fields, got {len(self.h)}")
        if self.bit_convention not in ("plus", "minus"):
            raise ValueError(f"unknown bit convention {self.bit_convention!r}")
        for (i, j) in self.J:
            if not (0 <= i < j < self.n):
                raise ValueError(f"coupling key ({i}, {j}) not canonical for n={self.n}")

    def coupling_items(self) -> list[tuple[Edge, Fraction]]:
        """Couplings in deterministic (sorted-edge) order."""
        return sorted(self.J.items())

    def neighbor_coupling_sum(self, i: int) -> Fraction:
        """sum of J_ij over edges incident to i."""
        total = Fraction(0)
        for (a, b), v in self.J.items():
            if i == a or i == b:
                total += v
        return total


@dataclass(frozen=True)
class ECInstance:
    """Exact cover instance: ``sets`` over the element universe 0..m-1."""

    m: int
    sets: tuple[frozenset[int], ...]

    def __init__(self, m: int, sets: Iterable[Iterable[int]]):
        ss = tuple(frozenset(int(e) for e in s) for s in sets)
        if m < 0:
            raise ValueError(f"element count must be non-negative, got {m}")
        if not ss:
            raise ValueError("instance needs at least one set")
        for idx, s in enumerate(ss):
            if not s:
                raise ValueError(f"set {idx} is empty")
            if any(not 0 <= e < m for e in s):
                raise ValueError(f"set {idx} has elements outside 0..{m - 1}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "sets", ss)

    @property
    def num_sets(self) -> int:
        return len(self.sets)

    def element_occurrences(self) -> list[list[int]]:
        """For each element, the sorted indices of sets containing it."""
        occ: list[list[int]] = [[] for _ in range(self.m)]
        for i, s in enumerate(self.sets):
            for e in s:
                occ[e].append(i)
        return occ


@dataclass(frozen=True)
class CNF:
    """3-CNF formula; literals are DIMACS-style signed 1-based integers."""

    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]
    all_positive: bool = False

    def __init__(self, num_vars: int, clauses: Iterable[Sequence[int]]):
        cls = tuple(tuple(int(l) for l in c) for c in clauses)
        if num_vars < 1:
            raise ValueError(f"need at least one variable, got {num_vars}")
        for c in cls:
            if len(c) != 3:
                raise ValueError(f"clause {c} does not have exactly 3 literals")
            if any(l == 0 or abs(l) > num_vars for l in c):
                raise ValueError(f"clause {c} has literals outside 1..{num_vars}")
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "clauses", cls)
        object.__setattr__(self, "all_positive", all(l > 0 for c in cls for l in c))


def _as_bits(x, n: int) -> tuple[int, ...]:
    """Normalize a bitstring ('0110', [0,1,1,0], ...) to a 0/1 tuple."""
    if isinstance(x, str):
        bits = tuple(int(ch) for ch in x)
    else:
        bits = tuple(int(b) for b in x)
    if len(bits) != n:
        raise ValueError(f"bitstring length {len(bits)} does not match n={n}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bitstring entries must be 0 or 1")
    return bits


def _coupling_map(graph: WeightedGraph, J: Coupling) -> dict[Edge, Fraction]:
    """Resolve a uniform or per-edge coupling assignment on graph's edges."""
    if isinstance(J, Mapping):
        out = {}
        for (i, j) in graph.edges:
            try:
                v = J[(i, j)]
            except KeyError:
                try:
                    v = J[(j, i)]
                except KeyError:
                    raise ValueError(f"no coupling given for edge ({i}, {j})") from None
            out[(i, j)] = parse_weight(v)
        return out
    value = parse_weight(J)
    return {e: value for e in graph.edges}


def default_coupling(graph: WeightedGraph) -> Fraction:
    """Smallest uniform integer coupling strictly above every min(c_i, c_j).

    The next integer above ``max_edges min(c_i, c_j)`` satisfies the
    strict inequality required for ground states to encode maximum-weight
    independent sets, while keeping the coupling dynamic range small.
    Edgeless graphs get 1 (the value is then irrelevant).
    """
    best = Fraction(0)
    for i, j in graph.edges:
        best = max(best, min(graph.weights[i], graph.weights[j]))
    return Fraction(best.numerator // best.denominator + 1)


def pseudo_boolean_value(graph: WeightedGraph, J: Coupling, x) -> Fraction:
    """Evaluate Y(x) = sum c_i x_i - sum J_ij x_i x_j exactly.

    ``x`` is an indicator bitstring over vertices (position i = vertex i).
    """
    bits = _as_bits(x, graph.n)
    jmap = _coupling_map(graph, J)
    value = sum((w for w, b in zip(graph.weights, bits) if b), Fraction(0))
    for (i, j), v in jmap.items():
        if bits[i] and bits[j]:
            value -= v
    return value


def _ising_from_weights(
    graph: WeightedGraph, jmap: dict[Edge, Fraction], weights: Sequence[Fraction]
) -> IsingModel:
    for (i, j), v in jmap.items():
        bound = min(weights[i], weights[j])
        if v <= bound:
            raise ValueError(
                f"coupling {v} on edge ({i}, {j}) must exceed min(c_i, c_j) = {bound}"
            )
    nbr_sum = [Fraction(0)] * graph.n
    for (i, j), v in jmap.items():
        nbr_sum[i] += v
        nbr_sum[j] += v
    h = tuple(nbr_sum[i] - 2 * weights[i] for i in range(graph.n))
    return IsingModel(graph.n, h, dict(sorted(jmap.items())))


def mis_to_ising(graph: WeightedGraph, J: Coupling) -> IsingModel:
    """Spin encoding of maximum-weight independent set.

    Fields are ``h_i = sum_{j in nbr(i)} J_ij - 2 c_i``; couplings are
    taken from ``J`` (uniform value or per-edge mapping) and must satisfy
    the strict condition ``J_ij > min(c_i, c_j)`` on every edge, which
    guarantees that decoded ground states are exactly the maximum-weight
    independent sets.
    """
    return _ising_from_weights(graph, _coupling_map(graph, J), graph.weights)


def scaled_ising(graph: WeightedGraph, J: Coupling, k: WeightLike) -> IsingModel:
    """The weight-scaled family: fields for weights c_i/k, couplings fixed.

    ``h_i = sum_{j in nbr(i)} J_ij - 2 c_i / k``. Scaling the weights
    instead of the couplings leaves the set of minimizing configurations
    unchanged (Y scales by 1/k on independent sets) while compressing the
    low-energy level spacing by 1/k. ``k = 1`` reproduces
    :func:`mis_to_ising` exactly.
    """
    kf = parse_weight(k)
    if kf <= 0:
        raise ValueError(f"scale factor must be positive, got {k}")
    scaled = [w / kf for w in graph.weights]
    return _ising_from_weights(graph, _coupling_map(graph, J), scaled)


def ec_to_mis(instance: ECInstance) -> WeightedGraph:
    """Conflict graph of an exact cover instance.

    One vertex per set, weighted by the set size; sets sharing at least
    one element are joined by a (single) edge. An exact cover exists iff
    the maximum-weight independent set weighs exactly ``m``: independence
    means pairwise disjoint, and total weight m means every element is
    covered.
    """
    edges = [
        (i, j)
        for i in range(instance.num_sets)
        for j in range(i + 1, instance.num_sets)
        if instance.sets[i] & instance.sets[j]
    ]
    weights = [Fraction(len(s)) for s in instance.sets]
    return WeightedGraph(instance.num_sets, weights, edges)


def _require_ec3(instance: ECInstance) -> list[list[int]]:
    occ = instance.element_occurrences()
    for e, sets in enumerate(occ):
        if len(sets) != 3:
            raise ValueError(
                f"element {e} appears in {len(sets)} sets; need exactly 3"
            )
    return occ


def ec3_to_1in3sat(instance: ECInstance) -> CNF:
    """Positive 1-in-3 SAT view of an exact cover instance.

    Requires every element to lie in exactly 3 sets. Variable ``x_i`` is
    "set i selected"; element ``e`` becomes the all-positive clause over
    the three sets containing it. Selecting exactly one set per clause is
    the same as covering each element exactly once.
    """
    occ = _require_ec3(instance)
    clauses = [tuple(i + 1 for i in sets) for sets in occ]
    return CNF(instance.num_sets, clauses)


def threesat_to_mis(cnf: CNF) -> WeightedGraph:
    """Clause-triangle reduction from 3SAT to (unit-weight) MIS.

    Each clause becomes a triangle of its three literal occurrences;
    occurrences of complementary literals in different clauses conflict.
    The formula is satisfiable iff the MIS size reaches the clause count
    (one compatible literal picked per triangle). Repeated literals
    within a clause are kept as distinct vertices: the gadget is applied
    verbatim.
    """
    m = len(cnf.clauses)
    if m == 0:
        raise ValueError("formula has no clauses")
    edges: list[Edge] = []
    for ci in range(m):
        base = 3 * ci
        edges.extend([(base, base + 1), (base, base + 2), (base + 1, base + 2)])
    for ci in range(m):
        for cj in range(ci + 1, m):
            for a, la in enumerate(cnf.clauses[ci]):
                for b, lb in enumerate(cnf.clauses[cj]):
                    if la == -lb:
                        edges.append((3 * ci + a, 3 * cj + b))
    return WeightedGraph(3 * m, [Fraction(1)] * (3 * m), edges)


def ay_hamiltonian(instance: ECInstance) -> IsingModel:
    """Clause-counting Hamiltonian of the 1-in-3 SAT view.

    Fields are ``B_i``, the number of clauses containing variable i (for
    the exact-cover view this is just the set size), and couplings are
    ``I_ij``, the number of clauses containing both i and j, so that
    ``sum_{j in nbr(i)} I_ij = 2 B_i`` (each clause of i contributes its
    two other variables). Recorded under the "minus" bit convention,
    x_i = (1 - s_i)/2: as written (positive fields), the operator's
    ground configurations carry spin +1 on the complement of the selected
    sets, so minus-decoding and the MIS encoding's plus-decoding name the
    same cover.
    """
    _require_ec3(instance)
    n = instance.num_sets
    h = tuple(Fraction(len(s)) for s in instance.sets)
    J: dict[Edge, Fraction] = {}
    for i in range(n):
        for j in range(i + 1, n):
            shared = len(instance.sets[i] & instance.sets[j])
            if shared:
                J[(i, j)] = Fraction(shared)
    return IsingModel(n, h, J, bit_convention="minus")


def decode_ground_bitstring(model: IsingModel, x) -> frozenset[int]:
    """Vertex set encoded by a measured bitstring.

    ``x`` is a bitstring in ket notation: position i holds qubit i's
    |0>/|1> label, and |0> is the spin +1 state. Under the "plus"
    convention the selected vertices are the zero positions; under
    "minus" they are the one positions.
    """
    bits = _as_bits(x, model.n)
    want = 0 if model.bit_convention == "plus" else 1
    return frozenset(i for i, b in enumerate(bits) if b == want)


def appendix_ec_instance() -> ECInstance:
    """The worked 7-set, 5-element exact cover example.

    Every element lies in exactly 3 sets, so the instance is also a valid
    positive 1-in-3 SAT input; its unique exact cover is sets {0, 4, 6}.
    """
    return ECInstance(
        5,
        [
            {0, 1, 3},
            {0, 1, 4},
            {0, 2, 3},
            {1, 2},
            {2},
            {3, 4},
            {4},
        ],
    )


def load_ec(path) -> ECInstance:
    """Read an exact cover instance from JSON {"m": int, "sets": [[...]]}."""
    with open(path) as f:
        doc = json.load(f)
    try:
        return ECInstance(doc["m"], doc["sets"])
    except KeyError as e:
        raise ValueError(f"exact cover file {path} missing key {e}") from e


def save_ec(instance: ECInstance, path) -> None:
    doc = {"m": instance.m, "sets": [sorted(s) for s in instance.sets]}
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def load_cnf(path) -> CNF:
    """Parse a DIMACS CNF file (3 literals per clause)."""
    num_vars = 0
    clauses: list[list[int]] = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("c") or line.startswith("%"):
                continue
            if line.startswith("p"):
                parts = line.split()
                if len(parts) != 4 or parts[1] != "cnf":
                    raise ValueError(f"bad problem line: {line!r}")
                num_vars = int(parts[2])
                continue
            lits = [int(tok) for tok in line.split()]
            if lits and lits[-1] == 0:
                lits = lits[:-1]
            if lits:
                clauses.append(lits)
    if num_vars == 0:
        raise ValueError(f"{path} has no 'p cnf' header")
    return CNF(num_vars, clauses)


def save_cnf(cnf: CNF, path) -> None:
    with open(path, "w") as f:
        f.write(f"p cnf {cnf.num_vars} {len(cnf.clauses)}\n")
        for clause in cnf.clauses:
            f.write(" ".join(str(l) for l in clause) + " 0\n")


def _parse_rational(v) -> Fraction:
    if isinstance(v, str) or isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"expected exact number, got {v!r}")


def load_ising(path) -> IsingModel:
    """Read an Ising model JSON document with exact field/coupling values."""
    with open(path) as f:
        doc = json.load(f, parse_float=str)
    try:
        h = tuple(_parse_rational(v) for v in doc["h"])
        J = {(int(i), int(j)): _parse_rational(v) for i, j, v in doc["J"]}
        return IsingModel(doc["n"], h, J, doc.get("bit_convention", "plus"))
    except KeyError as e:
        raise ValueError(f"ising file {path} missing key {e}") from e


def save_ising(model: IsingModel, path) -> None:
    doc = {
        "n": model.n,
        "h": [format_weight(v) for v in model.h],
        "J": [[i, j, format_weight(v)] for (i, j), v in model.coupling_items()],
        "bit_convention": model.bit_convention,
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")
