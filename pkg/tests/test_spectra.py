"""Solver-level tests: eigenpairs, sweeps, refinement, runtime report."""

import math
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from adiagap.graphs import WeightedGraph
from adiagap.hamiltonian import build
from adiagap.oracle import dense_eigs
from adiagap.reductions import (
    IsingModel,
    ay_hamiltonian,
    default_coupling,
    mis_to_ising,
    pseudo_boolean_value,
    scaled_ising,
)
from adiagap.spectra import (
    EigensolverError,
    GapProfile,
    art_report,
    gap_sweep,
    lowest_eigenpairs,
    matrix_element,
    norm_max,
    refine_min_gap,
    refine_profile,
    second_order_correction,
)

from conftest import random_graph


def _single_spin(field):
    """One-spin model with h = field; everything about it is closed form."""
    return IsingModel(1, (Fraction(field),), {})


# With h = -2 the problem diagonal is (+2, -2), so
# H(s) = [[2s, -(1-s)], [-(1-s), -2s]], eigenvalues -+sqrt(4s^2+(1-s)^2).
# The gap 2*sqrt(4s^2+(1-s)^2) is minimal at s = 1/5 with value 4/sqrt(5).
def _single_spin_gap(s):
    return 2.0 * math.hypot(2.0 * s, 1.0 - s)


def test_driver_endpoint():
    H = build(mis_to_ising(random_graph(np.random.default_rng(5), 6), Fraction(9)))
    res = lowest_eigenpairs(H, 0.0, q=3)
    assert res.values[0] == pytest.approx(-H.n, abs=1e-12)
    assert res.gap == pytest.approx(2.0, abs=1e-10)
    uniform = np.full(H.dim, H.dim ** -0.5)
    assert_allclose(res.vectors[:, 0], uniform, atol=1e-12)
    assert np.all(res.residuals <= 1e-10)


def test_diagonal_endpoint(appendix_graph):
    k = 2
    coupling = default_coupling(appendix_graph)
    H = build(scaled_ising(appendix_graph, coupling, k))
    res = lowest_eigenpairs(H, 1.0, q=2)
    assert res.values[0] == pytest.approx(float(np.min(H.diag)), abs=1e-12)
    # At s = 1 the spectrum is affine in the weight-scaled objective,
    # E = -4 Y + const, so the gap is 4 times the distance between the
    # two best Y values of the graph with weights c_i / k.
    scaled = WeightedGraph(
        appendix_graph.n,
        [w / k for w in appendix_graph.weights],
        appendix_graph.edges,
    )
    ys = sorted(
        {
            pseudo_boolean_value(scaled, coupling, format(x, f"0{H.n}b")[::-1])
            for x in range(H.dim)
        },
        reverse=True,
    )
    expected = 4 * (ys[0] - ys[1])
    assert res.gap == pytest.approx(float(expected), rel=1e-12)


def test_matches_dense_oracle():
    rng = np.random.default_rng(11)
    for n in (3, 4, 5, 6, 6, 6):
        g = random_graph(rng, n)
        H = build(mis_to_ising(g, default_coupling(g) + 1))
        s = float(rng.uniform(0, 1))
        res = lowest_eigenpairs(H, s, q=3, tol=0.0)
        ref, _ = dense_eigs(H, s)
        assert_allclose(res.values, ref[: len(res.values)], atol=1e-9, rtol=0)
        gram = res.vectors.T @ res.vectors
        assert_allclose(gram, np.eye(gram.shape[0]), atol=1e-12)


def test_phase_is_fixed(appendix_graph):
    H = build(mis_to_ising(appendix_graph, Fraction(4)))
    res = lowest_eigenpairs(H, 0.55, q=4)
    for col in range(res.vectors.shape[1]):
        lead = np.argmax(np.abs(res.vectors[:, col]))
        assert res.vectors[lead, col] > 0


def test_eigenpair_validation(appendix_graph):
    H = build(mis_to_ising(appendix_graph, Fraction(4)))
    with pytest.raises(ValueError, match="q must be"):
        lowest_eigenpairs(H, 0.5, q=0)
    with pytest.raises(ValueError, match="q must be"):
        lowest_eigenpairs(H, 0.5, q=9)
    with pytest.raises(ValueError, match="nonnegative"):
        lowest_eigenpairs(H, 0.5, tol=-1e-9)
    with pytest.raises(ValueError, match="in \\[0, 1\\]"):
        lowest_eigenpairs(H, 1.2)
    with pytest.raises(ValueError, match="length"):
        lowest_eigenpairs(H, 0.5, v0=np.ones(3))
    res = lowest_eigenpairs(H, 0.5, q=1)
    with pytest.raises(ValueError, match="two eigenpairs"):
        res.gap
    with pytest.raises(ValueError, match="two eigenpairs"):
        matrix_element(H, res)


def test_nonconvergence_raises():
    g = random_graph(np.random.default_rng(3), 8)
    H = build(mis_to_ising(g, default_coupling(g)))
    with pytest.raises(EigensolverError, match="did not converge") as info:
        lowest_eigenpairs(H, 0.5, q=2, tol=1e-16, ncv=5, maxiter=1)
    assert info.value.s == 0.5


def test_determinism(appendix_graph):
    H = build(mis_to_ising(appendix_graph, Fraction(4)))
    a = lowest_eigenpairs(H, 0.37, q=3, seed=7)
    b = lowest_eigenpairs(H, 0.37, q=3, seed=7)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.vectors, b.vectors)
    grid = np.linspace(0, 1, 9)
    p1 = gap_sweep(H, grid, q=3)
    p2 = gap_sweep(H, grid, q=3)
    for name in ("e0", "e1", "gap", "mat", "mat_alt", "norm"):
        assert np.array_equal(getattr(p1, name), getattr(p2, name)), name


def test_matrix_element_forms_vs_dense(appendix_graph):
    H = build(mis_to_ising(appendix_graph, Fraction(4)))
    s = 0.4
    res = lowest_eigenpairs(H, s, q=3, tol=0.0)
    elem = matrix_element(H, res)
    assert not elem.degenerate
    assert elem.value == pytest.approx(elem.alt, rel=1e-8)
    ref, vecs = dense_eigs(H, s)
    assert ref[2] - ref[1] > 1e-6  # the dense pair is meaningful here
    expected = abs(vecs[:, 1] @ H.apply_dh(vecs[:, 0].copy()))
    assert elem.value == pytest.approx(expected, rel=1e-7)


def test_matrix_element_degenerate_warns():
    # Zero field closes the gap completely at s = 1.
    H = build(_single_spin(0))
    res = lowest_eigenpairs(H, 1.0, q=2)
    with pytest.warns(UserWarning, match="degeneracy cut"):
        elem = matrix_element(H, res)
    assert elem.degenerate


def test_matrix_element_driver_limit(appendix_graph):
    # At s = 0 the alternative quotient is taken in its analytic limit
    # and both forms reduce to <E1|H_problem|E0>.
    H = build(mis_to_ising(appendix_graph, Fraction(4)))
    res = lowest_eigenpairs(H, 0.0, q=2)
    elem = matrix_element(H, res)
    assert not elem.degenerate
    assert elem.value == pytest.approx(elem.alt, abs=1e-10)


def test_single_spin_closed_form():
    H = build(_single_spin(-2))
    grid = np.linspace(0, 1, 41)
    profile = gap_sweep(H, grid, q=2)
    assert_allclose(profile.gap, [_single_spin_gap(s) for s in grid], atol=1e-12)
    refine_profile(H, profile, s_tol=1e-10)
    assert profile.s_star == pytest.approx(0.2, abs=1e-8)
    assert profile.g_min == pytest.approx(4 / math.sqrt(5), rel=1e-12)
    assert not profile.boundary_minimum
    # M at the minimum against a direct 2x2 diagonalization.
    h = np.array([[2 * 0.2, -0.8], [-0.8, -2 * 0.2]])
    w, v = np.linalg.eigh(h)
    dh = np.array([[2.0, 1.0], [1.0, -2.0]])
    assert profile.mat_at_s_star == pytest.approx(abs(v[:, 1] @ dh @ v[:, 0]), rel=1e-6)
    report = art_report(profile)
    assert report.max_norm == pytest.approx(2.0, rel=1e-12)
    assert report.art2 == pytest.approx(
        report.mat_at_s_star * report.max_norm / report.g_min**2, rel=1e-12
    )
    assert report.art3 == pytest.approx(
        profile.ratio_at_s_prime * report.max_norm, rel=1e-12
    )
    assert report.g_at_s_prime >= report.g_min


def test_refine_min_gap_bracket():
    H = build(_single_spin(-2))
    s_star, g_min = refine_min_gap(H, (0.1, 0.2, 0.3), s_tol=1e-10)
    assert s_star == pytest.approx(0.2, abs=1e-8)
    assert g_min == pytest.approx(4 / math.sqrt(5), rel=1e-12)
    with pytest.raises(ValueError, match="not ordered"):
        refine_min_gap(H, (0.3, 0.2, 0.4))
    with pytest.raises(ValueError, match="s_tol"):
        refine_min_gap(H, (0.1, 0.2, 0.3), s_tol=0.0)
    with pytest.raises(ValueError, match="does not enclose"):
        refine_min_gap(H, (0.5, 0.7, 0.9))


def test_sweep_validation(appendix_graph):
    H = build(mis_to_ising(appendix_graph, Fraction(4)))
    with pytest.raises(ValueError, match="two points"):
        gap_sweep(H, [0.5])
    with pytest.raises(ValueError, match="strictly increasing"):
        gap_sweep(H, [0.0, 0.5, 0.5, 1.0])
    with pytest.raises(ValueError, match="within"):
        gap_sweep(H, [0.0, 1.5])
    with pytest.raises(ValueError, match="two eigenpairs"):
        gap_sweep(H, [0.0, 1.0], q=1)


def test_sweep_definedness_and_bounds(appendix_graph):
    H = build(mis_to_ising(appendix_graph, Fraction(4)))
    grid = np.linspace(0, 1, 9)
    profile = gap_sweep(H, grid, q=3)
    assert not profile.mat_defined[0]  # driver E1 is n-fold degenerate
    counts = np.unique(H.diag_num, return_counts=True)[1]
    assert profile.mat_defined[-1] == (counts[0] == 1 and counts[1] == 1)
    assert np.all(profile.mat_defined[1:-1])
    assert np.all(profile.gap >= 0)
    assert np.all(profile.e1 >= profile.e0)
    # Ground-level continuity: |dE0/ds| is at most ||H_P|| + ||H_I||.
    lip = 2 * H.norm_bound() * (grid[1] - grid[0])
    assert np.all(np.abs(np.diff(profile.e0)) <= lip + 1e-8)
    assert np.all(np.isfinite(profile.norm))
    assert np.all(profile.norm >= np.abs(profile.e0) - 1e-9)
    lean = gap_sweep(H, grid, q=2, with_norm=False)
    assert np.all(np.isnan(lean.norm))
    assert_allclose(lean.gap, profile.gap, atol=1e-8)


def test_refine_without_ratio():
    H = build(_single_spin(-2))
    profile = gap_sweep(H, np.linspace(0, 1, 21), q=2)
    refine_profile(H, profile, with_ratio=False)
    assert profile.s_star == pytest.approx(0.2, abs=1e-7)
    assert profile.s_prime is None
    assert profile.ratio_at_s_prime is None
    with pytest.raises(ValueError, match="refined first"):
        art_report(profile)


def test_boundary_minimum_degenerate_ground():
    # Zero field: H(s) = -(1-s) sigma^x, the gap 2(1-s) closes at s = 1.
    H = build(_single_spin(0))
    profile = gap_sweep(H, np.linspace(0, 1, 11), q=2)
    refine_profile(H, profile, with_ratio=False)
    assert profile.boundary_minimum
    assert profile.s_star == 1.0
    assert profile.g_min == 0.0
    assert not profile.mat_defined[-1]


def test_art_report_arithmetic():
    grid = np.linspace(0, 1, 5)
    zeros = np.zeros(5)
    profile = GapProfile(
        grid=grid,
        e0=zeros,
        e1=zeros,
        gap=np.full(5, 0.5),
        mat=np.array([0.5, 0.4, 0.3, 0.2, 0.1]),
        mat_alt=zeros,
        norm=np.array([1.0, 2.0, 3.0, 2.0, 1.0]),
        mat_defined=np.array([False, True, True, True, False]),
        s_star=0.5,
        g_min=0.1,
        mat_at_s_star=0.3,
        s_prime=0.75,
        g_at_s_prime=0.2,
        mat_at_s_prime=0.2,
        ratio_at_s_prime=5.0,
    )
    report = art_report(profile)
    # The undefined endpoint element 0.5 must not win the max.
    assert report.max_mat == 0.4
    assert report.max_norm == 3.0
    assert report.art1 == pytest.approx(0.4 * 3.0 / 0.01)
    assert report.art2 == pytest.approx(0.3 * 3.0 / 0.01)
    assert report.art3 == pytest.approx(15.0)
    d = report.to_json_dict(k="7")
    assert list(d) == [
        "k",
        "s_star",
        "g_min",
        "mat_at_s_star",
        "max_mat",
        "max_norm",
        "art1",
        "art2",
        "art3",
        "s_prime",
        "g_at_s_prime",
        "mat_at_s_prime",
    ]

    profile.g_min = 0.0
    with pytest.raises(ValueError, match="not positive"):
        art_report(profile)
    profile.g_min = 0.1
    profile.norm = np.full(5, np.nan)
    with pytest.raises(ValueError, match="norm data"):
        art_report(profile)
    profile.norm = np.ones(5)
    profile.mat_defined = np.zeros(5, dtype=bool)
    with pytest.raises(ValueError, match="no grid point"):
        art_report(profile)
    profile.s_star = None
    with pytest.raises(ValueError, match="refined first"):
        art_report(profile)


def test_norm_max(appendix_graph):
    model = mis_to_ising(appendix_graph, Fraction(4))
    H = build(model)
    assert norm_max(H, [0.0]) == pytest.approx(H.n, abs=1e-9)
    grid = [0.0, 0.3, 0.7, 1.0]
    ref = 0.0
    for s in grid:
        w, _ = dense_eigs(H, s)
        ref = max(ref, abs(w[0]), abs(w[-1]))
    assert norm_max(H, grid) == pytest.approx(ref, rel=1e-8)
    with pytest.raises(ValueError, match="one point"):
        norm_max(H, [])
    with pytest.raises(ValueError, match="within"):
        norm_max(H, [0.5, 1.1])


def test_second_order_shift(appendix, appendix_graph):
    ay = ay_hamiltonian(appendix)
    # Set-cover counting structure: the flip cost telescopes, so the
    # shift is the same for every configuration.
    for x in range(2**ay.n):
        bits = format(x, f"0{ay.n}b")[::-1]
        assert second_order_correction(ay, bits) == Fraction(-4)
    assert second_order_correction(ay, [0] * ay.n) == Fraction(-4)

    mis = mis_to_ising(appendix_graph, Fraction(4))
    seen = set()
    for x in range(2**mis.n):
        bits = format(x, f"0{mis.n}b")[::-1]
        try:
            seen.add(second_order_correction(mis, bits))
        except ValueError:
            pass
    assert len(seen) > 1  # the generic encoding has no such collapse

    with pytest.raises(ValueError, match="bit 0"):
        second_order_correction(IsingModel(1, (Fraction(0),), {}), "0")
    with pytest.raises(ValueError, match="bit 0"):
        second_order_correction(
            IsingModel(1, (Fraction(0),), {}, "minus"), "0"
        )
    with pytest.raises(ValueError, match="bits"):
        second_order_correction(ay, "010")
