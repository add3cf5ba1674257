"""Low-lying spectra of the interpolating Hamiltonian.

The quantities of interest all live at the bottom of the spectrum: the
gap g(s) = E1(s) - E0(s) between the two lowest levels, the transition
matrix element M(s) = |<E1| dH/ds |E0>|, and the operator norm, which
together give adiabatic runtime estimates of the form M * ||H|| / g^2.

Eigenpairs come from ARPACK (shift-free Lanczos on the matrix-free
operator) followed by a Rayleigh-Ritz polish in the computed subspace.
The polish matters beyond accuracy: it makes the cross elements
<v_i|H(s)|v_j> vanish to machine precision, which is exactly the
identity that lets M(s) be cross-checked in two algebraic forms
(dH/ds = H_problem - H_init and H(s) = s*dH/ds + H_init imply
s * <E1|dH/ds|E0> = -<E1|H_init|E0> on exact eigenvectors).

Minimum gaps are located by a grid sweep with warm-started solves,
followed by golden-section refinement of every interior bracket; an
endpoint that carries the grid minimum is densified toward the boundary
until either a bracket appears or the minimum is certified to sit on the
boundary. Anti-crossings far narrower than the grid spacing are still
found this way because the two crossing branches leave a V-shaped
imprint on the coarse grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .hamiltonian import SystemHamiltonian
from .reductions import IsingModel

__all__ = [
    "EigenResult",
    "MatrixElement",
    "GapProfile",
    "ArtReport",
    "EigensolverError",
    "lowest_eigenpairs",
    "matrix_element",
    "gap_sweep",
    "refine_min_gap",
    "refine_profile",
    "norm_max",
    "art_report",
    "second_order_correction",
]

MAX_PAIRS = 8
DEGENERACY_CUT = 1e-10
DEFAULT_S_TOL = 1e-9
SWEEP_TOL = 1e-10
REFINE_PAIRS = 8

# Residual certification headroom, in units of machine epsilon times the
# operator scale. ARPACK at tol=0 plus the polish usually lands one to
# two orders below this, but ~400 eps has been observed at 2^15
# dimensions with several pairs, so the limit leaves room above that.
_RESIDUAL_EPS_FACTOR = 1024.0

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


class EigensolverError(RuntimeError):
    """Eigensolver failed to converge or certify.

    Attributes:
        s: interpolation parameter of the failed solve.
        residuals: per-pair 2-norm residuals, when available.
    """

    def __init__(self, message: str, s: float | None = None, residuals=None):
        super().__init__(message)
        self.s = s
        self.residuals = None if residuals is None else np.asarray(residuals)


@dataclass(frozen=True)
class EigenResult:
    """Certified lowest eigenpairs of H(s).

    ``values`` are ascending, ``vectors`` holds the matching orthonormal
    columns, and ``residuals[k] = ||H v_k - E_k v_k||_2``.
    """

    s: float
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray

    @property
    def gap(self) -> float:
        if len(self.values) < 2:
            raise ValueError("gap needs at least two eigenpairs")
        return float(self.values[1] - self.values[0])


@dataclass(frozen=True)
class MatrixElement:
    """|<E1|dH/ds|E0>| in its two algebraically equivalent forms.

    ``degenerate`` is set when the gap is too small relative to the
    operator scale for the individual eigenvectors (and hence the
    element) to be well defined.
    """

    value: float
    alt: float
    degenerate: bool


@dataclass
class GapProfile:
    """Grid sweep of the low spectrum plus optional refined quantities.

    The arrays are parallel to ``grid``. ``mat_defined`` marks points
    where the transition element means something: wherever E1 touches
    E0 or E2 (the exact degeneracy at s=0 being the standard case), the
    computed element depends on an arbitrary eigenbasis choice and is
    excluded from maxima, though its value is still recorded. Refined
    fields are filled by :func:`refine_profile`; ``boundary_minimum``
    records that the true minimum sits on an endpoint of [0, 1] rather
    than at an interior stationary point.
    """

    grid: np.ndarray
    e0: np.ndarray
    e1: np.ndarray
    gap: np.ndarray
    mat: np.ndarray
    mat_alt: np.ndarray
    norm: np.ndarray
    mat_defined: np.ndarray | None = None
    s_star: float | None = None
    g_min: float | None = None
    mat_at_s_star: float | None = None
    boundary_minimum: bool = False
    s_prime: float | None = None
    g_at_s_prime: float | None = None
    mat_at_s_prime: float | None = None
    ratio_at_s_prime: float | None = None


@dataclass(frozen=True)
class ArtReport:
    """Adiabatic runtime estimates and the spectral data behind them."""

    s_star: float
    g_min: float
    mat_at_s_star: float
    max_mat: float
    max_norm: float
    art1: float
    art2: float
    art3: float
    s_prime: float
    g_at_s_prime: float
    mat_at_s_prime: float

    def to_json_dict(self, k=None) -> dict:
        out = {} if k is None else {"k": k}
        out.update(
            s_star=self.s_star,
            g_min=self.g_min,
            mat_at_s_star=self.mat_at_s_star,
            max_mat=self.max_mat,
            max_norm=self.max_norm,
            art1=self.art1,
            art2=self.art2,
            art3=self.art3,
            s_prime=self.s_prime,
            g_at_s_prime=self.g_at_s_prime,
            mat_at_s_prime=self.mat_at_s_prime,
        )
        return out


def _operator(H: SystemHamiltonian, s: float) -> LinearOperator:
    return LinearOperator(
        (H.dim, H.dim),
        matvec=lambda v: H.apply_h(s, np.ravel(v)),
        dtype=np.float64,
    )


def _dense_pairs(H: SystemHamiltonian, s: float, q: int):
    # Small dimensions go dense: ARPACK needs k < dim and enough Krylov
    # room, and materializing a <=64x64 matrix is cheaper anyway.
    dim = H.dim
    mat = np.zeros((dim, dim))
    for col in range(dim):
        e = np.zeros(dim)
        e[col] = 1.0
        mat[:, col] = H.apply_h(s, e)
    mat = 0.5 * (mat + mat.T)
    values, vectors = np.linalg.eigh(mat)
    return values[:q].copy(), vectors[:, :q].copy()


def _polish(H: SystemHamiltonian, s: float, values, vectors):
    # Rayleigh-Ritz in the computed subspace: re-orthonormalize and
    # rediagonalize. Besides tightening the values this zeroes the cross
    # elements <v_i|H|v_j>, which downstream identities rely on.
    vectors, _ = np.linalg.qr(vectors)
    hv = np.column_stack(
        [H.apply_h(s, vectors[:, k]) for k in range(vectors.shape[1])]
    )
    small = vectors.T @ hv
    small = 0.5 * (small + small.T)
    w, u = np.linalg.eigh(small)
    vectors = vectors @ u
    hv = hv @ u
    residuals = np.linalg.norm(hv - vectors * w, axis=0)
    return w, vectors, residuals


def lowest_eigenpairs(
    H: SystemHamiltonian,
    s: float,
    q: int = 2,
    tol: float = 0.0,
    v0: np.ndarray | None = None,
    ncv: int | None = None,
    maxiter: int | None = None,
    seed: int = 0,
) -> EigenResult:
    """Compute the ``q`` lowest eigenpairs of H(s), certified by residuals.

    Args:
        H: the interpolating Hamiltonian.
        s: interpolation parameter in [0, 1].
        q: number of pairs, 1 to 8.
        tol: ARPACK relative tolerance; 0 means machine precision.
        v0: optional starting vector (warm start from a nearby s).
        ncv: Lanczos basis size override.
        maxiter: ARPACK iteration cap override.
        seed: RNG seed for the default starting vector, so repeated runs
            are bit-for-bit reproducible.

    Returns:
        EigenResult with ascending values, orthonormal vectors (sign
        fixed so each vector's largest-magnitude component is positive),
        and per-pair residual norms.

    Raises:
        EigensolverError: on non-convergence or when a residual exceeds
            the certification threshold.

    A restarted-Lanczos caveat: inside an *exactly* degenerate eigenspace
    the returned vectors span only the part the iteration happened to
    reach, so multiplicities can be under-reported even though every
    returned (value, vector) pair is individually certified. The ground
    value is safe for s < 1 (the s-dependent part has all-negative
    off-diagonal entries, making the ground state unique), but quantities
    built from excited vectors must be guarded by degeneracy checks.
    """
    if not 1 <= q <= MAX_PAIRS:
        raise ValueError(f"q must be in 1..{MAX_PAIRS}, got {q}")
    if tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"interpolation parameter must be in [0, 1], got {s}")
    dim = H.dim
    scale = max(1.0, H.norm_bound())
    limit = max(tol, _RESIDUAL_EPS_FACTOR * np.finfo(np.float64).eps) * scale
    if dim <= max(32, 4 * q + 4):
        values, vectors = _dense_pairs(H, s, min(q, dim))
        values, vectors, residuals = _polish(H, s, values, vectors)
    else:
        if v0 is None:
            rng = np.random.default_rng(seed)
            v0 = rng.standard_normal(dim)
        v0 = np.ascontiguousarray(np.ravel(v0), dtype=np.float64)
        if v0.shape != (dim,):
            raise ValueError(f"v0 must have length {dim}, got {v0.shape}")
        # Near an avoided crossing ARPACK at the default basis size can
        # stall just above the certification line; one retry with a
        # larger Lanczos basis, restarted from the best vector so far,
        # resolves that without loosening the guarantee.
        attempts = [(ncv, maxiter)]
        if ncv is None:
            attempts.append((min(dim, max(48, 6 * q + 12)), maxiter))
        residuals = None
        for attempt_ncv, attempt_maxiter in attempts:
            try:
                values, vectors = eigsh(
                    _operator(H, s),
                    k=q,
                    which="SA",
                    v0=v0,
                    ncv=attempt_ncv,
                    tol=tol,
                    maxiter=attempt_maxiter,
                )
            except ArpackNoConvergence as exc:
                raise EigensolverError(
                    f"ARPACK did not converge at s={s}: {exc}", s=s
                ) from exc
            order = np.argsort(values)
            values, vectors, residuals = _polish(H, s, values[order], vectors[:, order])
            if np.all(residuals <= limit):
                break
            v0 = vectors[:, 0]
    if np.any(residuals > limit):
        raise EigensolverError(
            f"residuals {residuals} exceed {limit:.3e} at s={s}",
            s=s,
            residuals=residuals,
        )
    for k in range(vectors.shape[1]):
        lead = int(np.argmax(np.abs(vectors[:, k])))
        if vectors[lead, k] < 0:
            vectors[:, k] *= -1.0
    return EigenResult(
        s=float(s), values=values, vectors=vectors, residuals=residuals
    )


def matrix_element(H: SystemHamiltonian, eig: EigenResult) -> MatrixElement:
    """Transition element |<E1|dH/ds|E0>| with an independent cross-form.

    The primary form applies dH/ds directly. The alternative uses
    <E1|H(s)|E0> = 0 to rewrite it as |<E1|H_init|E0>| / s; at s = 0
    that quotient is taken in its analytic limit |<E1|H_problem|E0>|.
    Near degeneracy (gap below ``DEGENERACY_CUT`` times the operator
    scale) the individual vectors are arbitrary within the eigenspace,
    so the element is flagged and a warning emitted.
    """
    if eig.vectors.shape[1] < 2:
        raise ValueError("matrix element needs at least two eigenpairs")
    v0 = eig.vectors[:, 0]
    v1 = eig.vectors[:, 1]
    value = float(abs(v1 @ H.apply_dh(v0)))
    if eig.s > 0.0:
        alt = float(abs(v1 @ H.apply_init(v0))) / eig.s
    else:
        alt = float(abs(v1 @ H.apply_problem(v0)))
    degenerate = eig.gap < DEGENERACY_CUT * max(1.0, H.norm_bound())
    if degenerate:
        warnings.warn(
            f"gap {eig.gap:.3e} at s={eig.s} is below the degeneracy cut; "
            "the transition element is not well defined",
            stacklevel=2,
        )
    return MatrixElement(value=value, alt=alt, degenerate=degenerate)


def _largest_eigenvalue(
    H: SystemHamiltonian, s: float, v0: np.ndarray | None, seed: int = 0
) -> tuple[float, np.ndarray]:
    dim = H.dim
    if dim <= 32:
        mat = np.zeros((dim, dim))
        for col in range(dim):
            e = np.zeros(dim)
            e[col] = 1.0
            mat[:, col] = H.apply_h(s, e)
        w, vecs = np.linalg.eigh(0.5 * (mat + mat.T))
        return float(w[-1]), vecs[:, -1]
    if v0 is None:
        v0 = np.random.default_rng(seed + 1).standard_normal(dim)
    try:
        w, vecs = eigsh(_operator(H, s), k=1, which="LA", v0=np.ravel(v0), tol=1e-9)
    except ArpackNoConvergence as exc:
        raise EigensolverError(f"norm solve failed at s={s}: {exc}", s=s) from exc
    return float(w[0]), vecs[:, 0]


def _diag_levels_simple(H: SystemHamiltonian) -> bool:
    """Whether the two lowest objective levels are both nondegenerate."""
    counts = np.unique(H.diag_num, return_counts=True)[1]
    return len(counts) > 1 and counts[0] == 1 and counts[1] == 1


def gap_sweep(
    H: SystemHamiltonian,
    grid: Sequence[float],
    q: int = 3,
    tol: float = SWEEP_TOL,
    seed: int = 0,
    with_norm: bool = True,
) -> GapProfile:
    """Sweep the grid, computing E0, E1, gap, both matrix-element forms,
    and the operator norm at each point.

    Solves are warm-started from the previous grid point's ground vector,
    which keeps the Lanczos iteration counts low along the continuous
    eigenpath. Three pairs per point (the default) let each point also
    be checked for E1-E2 degeneracy, which decides ``mat_defined``. The
    grid must be strictly increasing inside [0, 1].
    """
    grid = np.asarray(list(grid), dtype=np.float64)
    if grid.ndim != 1 or len(grid) < 2:
        raise ValueError("grid must contain at least two points")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[0] < 0.0 or grid[-1] > 1.0:
        raise ValueError("grid must lie within [0, 1]")
    if q < 2:
        raise ValueError("the sweep needs at least two eigenpairs per point")

    m = len(grid)
    e0 = np.empty(m)
    e1 = np.empty(m)
    gap = np.empty(m)
    mat = np.empty(m)
    mat_alt = np.empty(m)
    norm = np.full(m, np.nan)
    defined = np.ones(m, dtype=bool)
    cut = DEGENERACY_CUT * max(1.0, H.norm_bound())
    ground = None
    top = None
    for idx, s in enumerate(grid):
        res = lowest_eigenpairs(H, float(s), q=q, tol=tol, v0=ground, seed=seed)
        ground = res.vectors[:, 0]
        e0[idx] = res.values[0]
        e1[idx] = res.values[1]
        gap[idx] = res.gap
        with warnings.catch_warnings():
            # Degenerate points still get their (ill-defined) numbers
            # recorded; the flag is what matters downstream.
            warnings.simplefilter("ignore")
            elem = matrix_element(H, res)
        mat[idx] = elem.value
        mat_alt[idx] = elem.alt
        up_gap = float(res.values[2] - res.values[1]) if len(res.values) > 2 else np.inf
        defined[idx] = not elem.degenerate and up_gap >= cut
        if s == 0.0 and H.n >= 2:
            # E1 of the driver is exactly n-fold degenerate.
            defined[idx] = False
        elif s == 1.0:
            # The endpoint operator is diagonal, so degeneracy is decided
            # exactly from the level multiplicities. The iterative solver
            # returns one vector per distinct value and cannot see it.
            defined[idx] = _diag_levels_simple(H)
        if with_norm:
            lam_max, top = _largest_eigenvalue(H, float(s), top, seed=seed)
            norm[idx] = max(abs(lam_max), abs(e0[idx]))
    return GapProfile(
        grid=grid,
        e0=e0,
        e1=e1,
        gap=gap,
        mat=mat,
        mat_alt=mat_alt,
        norm=norm,
        mat_defined=defined,
    )


def _golden_minimize(
    f: Callable[[float], float], lo: float, hi: float, s_tol: float
) -> tuple[float, float]:
    # Plain golden-section: robust for the near-V-shaped gap around an
    # avoided crossing, where derivative-based methods stumble.
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1 = f(x1)
    f2 = f(x2)
    while hi - lo > s_tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = f(x2)
    xm = 0.5 * (lo + hi)
    return xm, f(xm)


class _GapEvaluator:
    """Warm-started gap evaluations along a refinement, caching the last
    full eigenresult so the minimizer's final point can be reused.

    Search-phase solves run at the sweep tolerance: the Rayleigh
    quotients behind the gap are accurate to far below any location
    tolerance in use, and the reported extremal quantities are always
    re-measured afterwards at full precision.
    """

    def __init__(self, H: SystemHamiltonian, q: int, seed: int, tol: float = SWEEP_TOL):
        self.H = H
        self.q = q
        self.seed = seed
        self.tol = tol
        self.ground: np.ndarray | None = None
        self.last: EigenResult | None = None

    def __call__(self, s: float) -> float:
        res = lowest_eigenpairs(
            self.H, float(s), q=self.q, tol=self.tol, v0=self.ground, seed=self.seed
        )
        self.ground = res.vectors[:, 0]
        self.last = res
        return res.gap


def refine_min_gap(
    H: SystemHamiltonian,
    bracket: tuple[float, float, float],
    s_tol: float = DEFAULT_S_TOL,
    q: int = 2,
    seed: int = 0,
) -> tuple[float, float]:
    """Golden-section refinement of a bracketed gap minimum.

    ``bracket`` is (lo, mid, hi) with gap(mid) below both ends, as
    produced by a grid sweep. Returns (s_star, g_min) with the location
    resolved to ``s_tol``.
    """
    s_star, g_min, _ = _refine_bracket(H, bracket, s_tol, q, seed)
    return s_star, g_min


def _refine_bracket(
    H: SystemHamiltonian,
    bracket: tuple[float, float, float],
    s_tol: float,
    q: int,
    seed: int,
) -> tuple[float, float, EigenResult]:
    lo, mid, hi = (float(x) for x in bracket)
    if not (0.0 <= lo < mid < hi <= 1.0):
        raise ValueError(f"bracket {bracket} is not ordered within [0, 1]")
    if s_tol <= 0:
        raise ValueError(f"s_tol must be positive, got {s_tol}")
    ev = _GapEvaluator(H, q, seed)
    g_lo = ev(lo)
    g_mid = ev(mid)
    g_hi = ev(hi)
    if not (g_mid <= g_lo and g_mid <= g_hi):
        raise ValueError(
            f"bracket {bracket} does not enclose a minimum: "
            f"gaps ({g_lo:.6e}, {g_mid:.6e}, {g_hi:.6e})"
        )
    s_star, g_min = _golden_minimize(ev, lo, hi, s_tol)
    assert ev.last is not None
    # The last evaluation is at the returned midpoint, so the cached
    # eigenresult belongs to s_star.
    return s_star, g_min, ev.last


def _interior_brackets(grid: np.ndarray, y: np.ndarray) -> list[tuple[float, float, float]]:
    out = []
    for i in range(1, len(grid) - 1):
        if y[i] <= y[i - 1] and y[i] <= y[i + 1]:
            out.append((float(grid[i - 1]), float(grid[i]), float(grid[i + 1])))
    return out


def _densify_endpoint(
    ev: Callable[[float], float],
    inner: float,
    endpoint: float,
    g_inner: float,
    g_end: float,
    s_tol: float,
) -> tuple[tuple[float, float, float] | None, float]:
    """Walk toward an endpoint that holds the grid minimum.

    Bisects the last interval repeatedly; returns an interior bracket if
    one appears, otherwise the endpoint gap once the interval shrinks to
    s_tol (a genuine boundary minimum).
    """
    a, b = (inner, endpoint) if inner < endpoint else (endpoint, inner)
    g_a, g_b = (g_inner, g_end) if inner < endpoint else (g_end, g_inner)
    while b - a > max(s_tol, 4 * np.finfo(np.float64).eps):
        m = 0.5 * (a + b)
        g_m = ev(m)
        if g_m <= g_a and g_m <= g_b:
            return (a, m, b), g_m
        # Keep the half whose far end is the endpoint being approached.
        if endpoint >= b:
            a, g_a = m, g_m
        else:
            b, g_b = m, g_m
    return None, g_end


def refine_profile(
    H: SystemHamiltonian,
    profile: GapProfile,
    s_tol: float = DEFAULT_S_TOL,
    q: int = 2,
    seed: int = 0,
    with_ratio: bool = True,
) -> GapProfile:
    """Fill a swept profile's refined quantities in place.

    Locates the global minimum gap (refining every interior bracket and
    densifying toward an endpoint when the grid minimum sits there),
    records M at s_star, and then maximizes the ratio M(s)/g(s)^2 the
    same way to produce the s_prime data used by the ratio-form runtime
    estimate. Pass ``with_ratio=False`` to stop after the minimum-gap
    quantities; that roughly halves the cost when only s_star and g_min
    are needed.

    Returns the same profile object with s_star, g_min, mat_at_s_star,
    boundary_minimum, s_prime, g_at_s_prime, mat_at_s_prime, and
    ratio_at_s_prime populated (the s_prime group stays None when the
    ratio search is skipped).
    """
    grid, gap = profile.grid, profile.gap

    candidates: list[tuple[float, float, bool]] = []
    for bracket in _interior_brackets(grid, gap):
        s_b, g_b, _ = _refine_bracket(H, bracket, s_tol, q, seed)
        candidates.append((s_b, g_b, False))

    i_min = int(np.argmin(gap))
    if i_min == 0 or i_min == len(grid) - 1:
        ev = _GapEvaluator(H, q, seed)
        inner_idx = 1 if i_min == 0 else len(grid) - 2
        bracket, g_end = _densify_endpoint(
            ev,
            float(grid[inner_idx]),
            float(grid[i_min]),
            float(gap[inner_idx]),
            float(gap[i_min]),
            s_tol,
        )
        if bracket is not None:
            s_b, g_b, _ = _refine_bracket(H, bracket, s_tol, q, seed)
            candidates.append((s_b, g_b, False))
        else:
            candidates.append((float(grid[i_min]), g_end, True))

    if not candidates:
        # No interior bracket and the grid minimum is interior: happens
        # only on a flat profile; fall back to the best grid point.
        candidates.append((float(grid[i_min]), float(gap[i_min]), False))

    s_star, g_min, boundary = min(candidates, key=lambda c: c[1])
    # Final evaluation with a deep subspace: the element at s_star can be
    # many orders below the gap scale, and solving extra pairs confines
    # eigenvector leakage to levels far above E1, where it cannot mask a
    # tiny transition amplitude.
    res_star = lowest_eigenpairs(H, float(s_star), q=REFINE_PAIRS, tol=0.0, seed=seed)
    g_min = res_star.gap
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        elem_star = matrix_element(H, res_star)
    profile.s_star = float(s_star)
    profile.g_min = float(g_min)
    profile.mat_at_s_star = elem_star.value
    profile.boundary_minimum = bool(boundary)
    if not with_ratio:
        return profile

    # Ratio maximization: the spike of M/g^2 at a narrow avoided
    # crossing shows up as a grid-local maximum, as does any broad hump.
    # Points where the element is eigenbasis-arbitrary are excluded.
    defined = (
        profile.mat_defined
        if profile.mat_defined is not None
        else np.ones(len(grid), dtype=bool)
    )
    ratio = np.where(defined, profile.mat / np.square(gap), -np.inf)
    max_candidates: list[tuple[float, float, float, float]] = []

    ratio_ground: list[np.ndarray | None] = [None]

    def eval_ratio(s: float) -> tuple[float, float, float]:
        res = lowest_eigenpairs(
            H, float(s), q=q, tol=SWEEP_TOL, v0=ratio_ground[0], seed=seed
        )
        ratio_ground[0] = res.vectors[:, 0]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            elem = matrix_element(H, res)
        return elem.value / res.gap**2, res.gap, elem.value

    neg_ratio_cache: dict[float, tuple[float, float, float]] = {}

    def neg_ratio(s: float) -> float:
        r = eval_ratio(s)
        neg_ratio_cache[float(s)] = r
        return -r[0]

    # Grid noise makes shallow one-cell wiggles everywhere; golden ascent
    # within a cell can lift a smooth hump above its sampled value by a
    # modest factor, never by an order of magnitude, so only brackets
    # already within reach of the best sampled ratio are worth refining.
    grid_ratio_best = float(np.max(ratio))
    ratio_brackets = [
        b
        for b in _interior_brackets(grid, -ratio)
        if ratio[np.searchsorted(grid, b[1])] >= 0.2 * grid_ratio_best
    ]
    ratio_brackets.sort(
        key=lambda b: -ratio[np.searchsorted(grid, b[1])]
    )
    del ratio_brackets[12:]
    # The refined s_star region is where the spike lives when the grid
    # resolves it poorly; always give it a bracket of its own.
    if 0.0 < s_star < 1.0:
        half = max(float(np.min(np.diff(grid))), 16 * s_tol)
        lo = max(0.0, s_star - half)
        hi = min(1.0, s_star + half)
        if lo < s_star < hi:
            ratio_brackets.append((lo, s_star, hi))
    for lo, mid, hi in ratio_brackets:
        try:
            s_m, neg = _golden_minimize(neg_ratio, lo, hi, s_tol)
        except EigensolverError:
            continue
        r_m, g_m, m_m = neg_ratio_cache[float(s_m)]
        max_candidates.append((r_m, s_m, g_m, m_m))
    i_rmax = int(np.argmax(ratio))
    if np.isfinite(ratio[i_rmax]):
        max_candidates.append(
            (
                float(ratio[i_rmax]),
                float(grid[i_rmax]),
                float(gap[i_rmax]),
                float(profile.mat[i_rmax]),
            )
        )

    r_best, s_p, g_p, m_p = max(max_candidates, key=lambda c: c[0])
    # Re-measure the winner with the deep subspace for the same reason
    # as at s_star.
    res_p = lowest_eigenpairs(H, float(s_p), q=REFINE_PAIRS, tol=0.0, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        elem_p = matrix_element(H, res_p)
    profile.s_prime = float(s_p)
    profile.g_at_s_prime = float(res_p.gap)
    profile.mat_at_s_prime = float(elem_p.value)
    profile.ratio_at_s_prime = float(elem_p.value / res_p.gap**2)
    return profile


def norm_max(
    H: SystemHamiltonian, grid: Sequence[float], seed: int = 0
) -> float:
    """Maximum operator norm of H(s) over the given grid points."""
    grid = np.asarray(list(grid), dtype=np.float64)
    if grid.ndim != 1 or len(grid) < 1:
        raise ValueError("grid must contain at least one point")
    if np.any(grid < 0.0) or np.any(grid > 1.0):
        raise ValueError("grid must lie within [0, 1]")
    best = -np.inf
    top = None
    ground = None
    for s in grid:
        lam_max, top = _largest_eigenvalue(H, float(s), top, seed=seed)
        res = lowest_eigenpairs(H, float(s), q=1, tol=1e-11, v0=ground, seed=seed)
        ground = res.vectors[:, 0]
        best = max(best, abs(lam_max), abs(float(res.values[0])))
    return float(best)


def art_report(profile: GapProfile) -> ArtReport:
    """Assemble the three adiabatic runtime estimates from a refined profile.

    art1 uses the grid-wide maximum matrix element, art2 the element at
    the gap minimum itself, and art3 the refined maximum of M/g^2; all
    three share the grid-wide norm maximum.
    """
    needed = (
        profile.s_star,
        profile.g_min,
        profile.mat_at_s_star,
        profile.s_prime,
        profile.g_at_s_prime,
        profile.mat_at_s_prime,
        profile.ratio_at_s_prime,
    )
    if any(v is None for v in needed):
        raise ValueError("profile must be refined first (run refine_profile)")
    if not np.all(np.isfinite(profile.norm)):
        raise ValueError("profile lacks norm data (sweep with with_norm=True)")
    g_min = float(profile.g_min)
    if g_min <= 0.0:
        raise ValueError(
            "minimum gap is not positive: the final ground level is degenerate "
            "(several optimal configurations), so the runtime estimates are "
            "undefined; see the degeneracy note on lowest_eigenpairs"
        )
    defined = (
        profile.mat_defined
        if profile.mat_defined is not None
        else np.ones(len(profile.grid), dtype=bool)
    )
    if not np.any(defined):
        raise ValueError("no grid point has a well-defined transition element")
    max_mat = float(np.max(profile.mat[defined]))
    max_norm = float(np.max(profile.norm))
    return ArtReport(
        s_star=float(profile.s_star),
        g_min=g_min,
        mat_at_s_star=float(profile.mat_at_s_star),
        max_mat=max_mat,
        max_norm=max_norm,
        art1=max_mat * max_norm / g_min**2,
        art2=float(profile.mat_at_s_star) * max_norm / g_min**2,
        art3=float(profile.ratio_at_s_prime) * max_norm,
        s_prime=float(profile.s_prime),
        g_at_s_prime=float(profile.g_at_s_prime),
        mat_at_s_prime=float(profile.mat_at_s_prime),
    )


def _exact_energy(model: IsingModel, bits: Sequence[int]) -> Fraction:
    spins = [2 * b - 1 for b in bits]
    e = sum((hv * sp for hv, sp in zip(model.h, spins)), Fraction(0))
    for (i, j), v in model.J.items():
        e += v * spins[i] * spins[j]
    return e


def second_order_correction(model: IsingModel, x) -> Fraction:
    """Exact second-order perturbative shift of configuration ``x``.

    Treats the transverse part as the perturbation on the classical
    configuration basis. Single-flip elements of H_init all have unit
    magnitude, so the standard non-degenerate sum is
    sum_i 1 / (E_x - E_{x^i}) over the n flip neighbors.

    For "minus"-convention models built from set-cover counting the flip
    cost telescopes: flipping bit i changes the energy by exactly
    -/+ 2 h_i terms that cancel against the couplings' row sum, leaving
    E_x - E_{x^i} = -h_i for every configuration alike, hence the
    x-independent value -sum_i 1/h_i. That closed form is used there;
    "plus" models get the generic sum.

    Raises:
        ValueError: if some flip neighbor is degenerate with ``x``
            (zero denominator), naming the offending bit.
    """
    if isinstance(x, str):
        bits = [int(c) for c in x]
    else:
        bits = [int(b) for b in x]
    if len(bits) != model.n or any(b not in (0, 1) for b in bits):
        raise ValueError(f"need {model.n} bits of 0/1, got {x!r}")

    if model.bit_convention == "minus":
        total = Fraction(0)
        for i, hv in enumerate(model.h):
            if hv == 0:
                raise ValueError(f"zero flip denominator at bit {i}")
            total -= Fraction(1, 1) / hv
        return total

    e_x = _exact_energy(model, bits)
    total = Fraction(0)
    for i in range(model.n):
        flipped = list(bits)
        flipped[i] ^= 1
        denom = e_x - _exact_energy(model, flipped)
        if denom == 0:
            raise ValueError(f"zero flip denominator at bit {i}")
        total += Fraction(1, 1) / denom
    return total
