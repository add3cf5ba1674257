"""Diagonal-ensemble spectral weight traces.

The problem Hamiltonian is classical, so its eigenlevels partition the
computational basis into exact degeneracy classes: all bitstrings with
the same objective value. Following how an instantaneous eigenstate of
H(s) distributes its weight over those classes, as s runs from 0 to 1,
shows which near-optimal configurations the evolution actually passes
through. The per-class weight of a state |psi> is

    Gamma_k(s) = sum over basis states m in class k of |<m|psi(s)>|^2.

Classes are formed by exact integer comparison of the scaled diagonal
(never floats), and each class is labeled by the exact objective value
its members share, so the top classes line up with the best candidate
sets regardless of how close together their energies land.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .hamiltonian import SystemHamiltonian
from .spectra import DEGENERACY_CUT, SWEEP_TOL, lowest_eigenpairs

__all__ = [
    "LevelTable",
    "GammaTrace",
    "group_levels",
    "gamma_trace",
    "format_label",
    "selected_positions",
    "write_trace_csv",
    "trace_metadata",
]

DEFAULT_TOP_LEVELS = 7


@dataclass(frozen=True)
class LevelTable:
    """Exact degeneracy classes of the problem diagonal.

    Levels are indexed in ascending energy, which is descending
    objective value. ``level_of[m]`` is the class of basis state m,
    ``representatives`` holds the smallest basis index in each class.
    """

    n: int
    labels: tuple[Fraction, ...]
    counts: np.ndarray
    representatives: tuple[int, ...]
    level_of: np.ndarray
    bit_convention: str

    @property
    def num_levels(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class GammaTrace:
    """Per-class weights of one instantaneous eigenstate along a grid.

    ``gammas[t, k]`` is the weight in the k-th lowest-energy class at
    grid point t; ``other[t]`` collects everything beyond the tracked
    classes. ``flagged`` marks grid points where the followed state is
    nearly degenerate with a neighbor, so its identity (and hence the
    split of weight) is not numerically meaningful there.
    """

    grid: np.ndarray
    labels: tuple[Fraction, ...]
    gammas: np.ndarray
    other: np.ndarray
    eigenstate: int
    tracked: bool
    flagged: np.ndarray


def _objective_of(model, mask: int) -> Fraction:
    # Recover the per-vertex objective coefficients from the fields:
    # with the selected-vertex indicator x, E = -4 Y(x) + const, where
    # Y(x) = sum c_i x_i - sum J_ij x_i x_j and c_i derives from the
    # coupling row sum. The "minus" convention flips every spin, which
    # is the same algebra with h negated.
    sign = 1 if model.bit_convention == "plus" else -1
    in_bit = 1 if model.bit_convention == "plus" else 0
    y = Fraction(0)
    x = [(mask >> i) & 1 == in_bit for i in range(model.n)]
    for i in range(model.n):
        if x[i]:
            c_i = (model.neighbor_coupling_sum(i) - sign * model.h[i]) / 2
            y += c_i
    for (i, j), v in model.J.items():
        if x[i] and x[j]:
            y -= v
    return y


def group_levels(H: SystemHamiltonian) -> LevelTable:
    """Partition the basis into exact classes of the problem diagonal."""
    uniq, first, inverse, counts = np.unique(
        H.diag_num, return_index=True, return_inverse=True, return_counts=True
    )
    representatives = tuple(int(i) for i in first)
    labels = tuple(_objective_of(H.model, m) for m in representatives)
    # Ascending energy must mean strictly descending objective; anything
    # else indicates the diagonal and the model disagree.
    assert all(a > b for a, b in zip(labels, labels[1:]))
    return LevelTable(
        n=H.n,
        labels=labels,
        counts=counts,
        representatives=representatives,
        level_of=inverse.astype(np.int32),
        bit_convention=H.model.bit_convention,
    )


def gamma_trace(
    H: SystemHamiltonian,
    table: LevelTable,
    grid,
    top_levels: int = DEFAULT_TOP_LEVELS,
    eigenstate: int = 0,
    track: bool = False,
    tol: float = SWEEP_TOL,
    seed: int = 0,
) -> GammaTrace:
    """Trace one eigenstate's class weights along the interpolation.

    Args:
        H: the interpolating Hamiltonian the table was built from.
        table: exact class partition of the diagonal.
        grid: strictly increasing interpolation points in [0, 1].
        top_levels: number of lowest-energy classes reported separately;
            the rest are lumped into the "other" column.
        eigenstate: 0 for the ground state, 1 for the first excited.
        track: follow the state by eigenvector overlap across grid
            points instead of by energy index, so it keeps its identity
            through an avoided crossing.
        tol: eigensolver tolerance for the sweep.
        seed: seed for reproducible solver starts.
    """
    grid = np.asarray(list(grid), dtype=np.float64)
    if grid.ndim != 1 or len(grid) < 1:
        raise ValueError("grid must contain at least one point")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[0] < 0.0 or grid[-1] > 1.0:
        raise ValueError("grid must lie within [0, 1]")
    if eigenstate not in (0, 1):
        raise ValueError(f"eigenstate must be 0 or 1, got {eigenstate}")
    if not 1 <= top_levels <= table.num_levels:
        raise ValueError(
            f"top_levels must be in 1..{table.num_levels}, got {top_levels}"
        )
    if len(table.level_of) != H.dim:
        raise ValueError("level table does not match the Hamiltonian dimension")

    q = eigenstate + 2
    m = len(grid)
    gammas = np.empty((m, top_levels))
    other = np.empty(m)
    flagged = np.zeros(m, dtype=bool)
    cut = DEGENERACY_CUT * max(1.0, H.norm_bound())
    ground = None
    followed = None
    for t, s in enumerate(grid):
        res = lowest_eigenpairs(H, float(s), q=q, tol=tol, v0=ground, seed=seed)
        ground = res.vectors[:, 0]
        if track and followed is not None:
            overlaps = np.abs(followed @ res.vectors)
            sel = int(np.argmax(overlaps))
        else:
            sel = eigenstate
        followed = res.vectors[:, sel]
        neighbor_gaps = [
            abs(res.values[k] - res.values[sel])
            for k in range(len(res.values))
            if k != sel
        ]
        if neighbor_gaps and min(neighbor_gaps) < cut:
            flagged[t] = True
        weights = np.bincount(
            table.level_of,
            weights=np.square(followed),
            minlength=table.num_levels,
        )
        if s == 0.0 and sel >= 1 and H.n >= 2:
            # The driver's excited level is exactly n-fold degenerate.
            flagged[t] = True
        elif s == 1.0 and table.counts[int(np.argmax(weights))] > 1:
            # Exact degeneracy at the diagonal endpoint is invisible to
            # the iterative solver (it returns one vector per distinct
            # value), so decide it from the class sizes instead.
            flagged[t] = True
        gammas[t] = weights[:top_levels]
        other[t] = float(np.sum(weights[top_levels:]))
    if np.any(flagged):
        points = [float(grid[t]) for t in np.flatnonzero(flagged)]
        warnings.warn(
            f"eigenstate {eigenstate} is nearly degenerate at s={points}; "
            "its class weights there are not individually meaningful",
            stacklevel=2,
        )
    return GammaTrace(
        grid=grid,
        labels=table.labels[:top_levels],
        gammas=gammas,
        other=other,
        eigenstate=eigenstate,
        tracked=track,
        flagged=flagged,
    )


def format_label(v: Fraction) -> str:
    """Exact decimal when one exists, otherwise num/den."""
    num, den = v.numerator, v.denominator
    d = den
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{num}/{den}"
    k = max(twos, fives)
    scaled = abs(num) * 10**k // den
    sign = "-" if num < 0 else ""
    digits = str(scaled).rjust(k + 1, "0")
    if k == 0:
        return sign + digits
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def selected_positions(mask: int, n: int, bit_convention: str) -> list[int]:
    """1-based positions of the vertices a basis state selects."""
    in_bit = 1 if bit_convention == "plus" else 0
    return [i + 1 for i in range(n) if (mask >> i) & 1 == in_bit]


def _positions_string(positions: list[int]) -> str:
    if not positions:
        return ""
    if positions[-1] <= 9:
        return "".join(str(p) for p in positions)
    return ",".join(str(p) for p in positions)


def write_trace_csv(trace: GammaTrace, path, precision: int = 17) -> None:
    """Write the trace as CSV with header ``s,<label>...,other``."""
    header = ["s"] + [format_label(v) for v in trace.labels] + ["other"]
    fmt = f"%.{precision}g"
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for t in range(len(trace.grid)):
            row = [fmt % trace.grid[t]]
            row += [fmt % g for g in trace.gammas[t]]
            row.append(fmt % trace.other[t])
            f.write(",".join(row) + "\n")


def trace_metadata(table: LevelTable, trace: GammaTrace) -> dict:
    """Run description for the trace: class sizes and representatives."""
    levels = []
    for k in range(len(trace.labels)):
        rep = table.representatives[k]
        positions = selected_positions(rep, table.n, table.bit_convention)
        levels.append(
            {
                "label": format_label(table.labels[k]),
                "count": int(table.counts[k]),
                "representative": _positions_string(positions),
            }
        )
    return {
        "eigenstate": trace.eigenstate,
        "tracked": trace.tracked,
        "top_levels": len(trace.labels),
        "levels": levels,
        "other_count": int(np.sum(table.counts[len(trace.labels):])),
        "num_levels": table.num_levels,
    }
