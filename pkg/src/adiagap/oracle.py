"""Independent brute-force and dense-algebra verification oracles.

Everything here exists to check the fast paths against unimpeachable
references: exhaustive scans use exact rational arithmetic (integer
numerators over a common denominator, so no floating comparison ever
decides an optimum), and the dense eigendecomposition goes through a
materialized matrix and a direct solver rather than the Krylov code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np
import scipy.linalg

from .graphs import WeightedGraph
from .hamiltonian import SystemHamiltonian
from .reductions import CNF, ECInstance, IsingModel

__all__ = [
    "OracleReport",
    "ising_energy",
    "brute_force_mis",
    "brute_force_ising_min",
    "dense_eigs",
    "check_1in3",
    "check_exact_cover",
]

ENUMERATION_MAX_N = 24
DENSE_MAX_N = 12
_CHUNK = 1 << 20


@dataclass(frozen=True)
class OracleReport:
    """Result of an exhaustive scan.

    Attributes:
        optimum: Exact optimal value.
        optimizers: Every optimal bitstring, as basis indices (bit i of
            the integer is position/vertex i).
        decoded: The vertex set each optimizer encodes.
        count: Number of candidates that satisfied the scan's feasibility
            predicate (independent subsets for the MIS scan, all 2**n
            configurations for the energy scan).
    """

    optimum: Fraction
    optimizers: tuple[int, ...]
    decoded: tuple[frozenset[int], ...]
    count: int


def _bits_of(x, n: int) -> tuple[int, ...]:
    bits = tuple(int(b) for b in (x if not isinstance(x, str) else list(x)))
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise ValueError(f"need {n} bits of 0/1, got {x!r}")
    return bits


def ising_energy(model: IsingModel, x) -> Fraction:
    """Exact energy of one spin configuration.

    ``x`` gives basis-index bits (bit i = vertex i), with spin
    ``s_i = 2 x_i - 1``. This is the scalar reference implementation the
    vectorized diagonal is tested against.
    """
    bits = _bits_of(x, model.n)
    spins = [2 * b - 1 for b in bits]
    e = sum((hv * s for hv, s in zip(model.h, spins)), Fraction(0))
    for (i, j), v in model.J.items():
        e += v * spins[i] * spins[j]
    return e


def _common_denominator(values: Iterable[Fraction]) -> int:
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return den


def brute_force_mis(graph: WeightedGraph, max_n: int = ENUMERATION_MAX_N) -> OracleReport:
    """Exhaustive maximum-weight independent set.

    Scans all subsets (vectorized over chunks, infeasible ones masked
    out) with integer weight arithmetic over the weights' common
    denominator, so the optimum and the full optimizer list are exact.
    """
    n = graph.n
    if n > max_n:
        raise ValueError(f"n={n} exceeds the enumeration bound of {max_n}")
    den = _common_denominator(graph.weights)
    w_num = [int(w * den) for w in graph.weights]
    best: int | None = None
    best_idx: list[int] = []
    feasible = 0
    for lo in range(0, 1 << n, _CHUNK):
        hi = min(lo + _CHUNK, 1 << n)
        idx = np.arange(lo, hi, dtype=np.int64)
        ok = np.ones(hi - lo, dtype=bool)
        for i, j in graph.edges:
            ok &= (((idx >> np.int64(i)) & (idx >> np.int64(j)) & np.int64(1)) == 0)
        weight = np.zeros(hi - lo, dtype=np.int64)
        for i, wv in enumerate(w_num):
            weight += np.int64(wv) * ((idx >> np.int64(i)) & np.int64(1))
        feasible += int(np.count_nonzero(ok))
        weight[~ok] = np.iinfo(np.int64).min
        chunk_best = int(weight.max())
        if best is None or chunk_best > best:
            best = chunk_best
            best_idx = []
        if chunk_best == best:
            best_idx.extend(int(v) for v in idx[weight == chunk_best])
    assert best is not None
    optimum = Fraction(best, den)
    optimizers = tuple(sorted(best_idx))
    decoded = tuple(frozenset(i for i in range(n) if (m >> i) & 1) for m in optimizers)
    return OracleReport(optimum, optimizers, decoded, feasible)


def brute_force_ising_min(model: IsingModel, max_n: int = ENUMERATION_MAX_N) -> OracleReport:
    """Exhaustive minimum of the Ising energy with exact arithmetic.

    Spin products are evaluated literally (s_i s_j over materialized spin
    arrays), keeping this scan an independent check on any other
    diagonal-building code. Decoded sets follow the model's bit
    convention: spin +1 marks a selected vertex under "plus", spin -1
    under "minus".
    """
    n = model.n
    if n > max_n:
        raise ValueError(f"n={n} exceeds the enumeration bound of {max_n}")
    den = _common_denominator(list(model.h) + [v for _, v in model.coupling_items()])
    h_num = [int(v * den) for v in model.h]
    j_num = [(i, j, int(v * den)) for (i, j), v in model.coupling_items()]
    best: int | None = None
    best_idx: list[int] = []
    for lo in range(0, 1 << n, _CHUNK):
        hi = min(lo + _CHUNK, 1 << n)
        idx = np.arange(lo, hi, dtype=np.int64)
        spins = [
            (2 * ((idx >> np.int64(i)) & np.int64(1)) - 1).astype(np.int64)
            for i in range(n)
        ]
        energy = np.zeros(hi - lo, dtype=np.int64)
        for i, hv in enumerate(h_num):
            energy += np.int64(hv) * spins[i]
        for i, j, jv in j_num:
            energy += np.int64(jv) * (spins[i] * spins[j])
        chunk_best = int(energy.min())
        if best is None or chunk_best < best:
            best = chunk_best
            best_idx = []
        if chunk_best == best:
            best_idx.extend(int(v) for v in idx[energy == chunk_best])
    assert best is not None
    optimum = Fraction(best, den)
    optimizers = tuple(sorted(best_idx))
    in_set_bit = 1 if model.bit_convention == "plus" else 0
    decoded = tuple(
        frozenset(i for i in range(n) if ((m >> i) & 1) == in_set_bit)
        for m in optimizers
    )
    return OracleReport(optimum, optimizers, decoded, 1 << n)


def dense_eigs(H: SystemHamiltonian, s: float, max_n: int = DENSE_MAX_N):
    """Full spectrum of H(s) by dense symmetric diagonalization.

    Materializes the matrix directly from the model data (diagonal plus
    explicit -1 single-flip entries scaled by 1-s) and calls a dense
    solver, making this path independent of the iterative machinery.

    Returns:
        (values, vectors): all 2**n eigenvalues ascending and the
        corresponding orthonormal eigenvector columns.
    """
    if H.n > max_n:
        raise ValueError(f"n={H.n} exceeds the dense bound of {max_n}")
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"interpolation parameter must be in [0, 1], got {s}")
    dim = H.dim
    mat = np.zeros((dim, dim))
    idx = np.arange(dim)
    for i in range(H.n):
        mat[idx, idx ^ (1 << i)] = -(1.0 - s)
    mat[idx, idx] = s * H.diag
    values, vectors = scipy.linalg.eigh(mat)
    return values, vectors


def check_1in3(cnf: CNF, assignment) -> bool:
    """True iff every clause has exactly one true literal."""
    bits = _bits_of(assignment, cnf.num_vars)
    for clause in cnf.clauses:
        true_count = sum(bits[abs(l) - 1] if l > 0 else 1 - bits[abs(l) - 1] for l in clause)
        if true_count != 1:
            return False
    return True


def check_exact_cover(instance: ECInstance, selection: Iterable[int]) -> bool:
    """True iff the selected sets cover every element exactly once."""
    chosen = sorted(set(int(i) for i in selection))
    if any(not 0 <= i < instance.num_sets for i in chosen):
        raise ValueError(f"selection {chosen} outside 0..{instance.num_sets - 1}")
    counts = [0] * instance.m
    for i in chosen:
        for e in instance.sets[i]:
            counts[e] += 1
    return all(c == 1 for c in counts)
