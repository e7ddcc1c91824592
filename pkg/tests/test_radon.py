import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from radon_gap.hermite import cd_constant
from radon_gap.kernel import KernelMachine, metric_from_matrix
from radon_gap.radon import (
    deltas,
    inner_integral_from_deltas,
    rtv2,
    rtv2_direct_1d,
    rtv2_single_center,
    sigma_beta,
    sphere_rule,
)

C1 = 4 * math.exp(-0.5)
SQRT2PI = math.sqrt(2 * math.pi)


def random_spd(rng, d, cond=4.0):
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return Q @ np.diag(np.geomspace(1.0, cond, d)) @ Q.T


def random_machine_1d(rng, n):
    m = metric_from_matrix([[rng.uniform(0.3, 3.0)]], rng.uniform(0.5, 2.0))
    return KernelMachine(m, rng.uniform(-4, 4, size=(n, 1)), rng.normal(size=n))


def test_sphere_rules():
    r = sphere_rule(1)
    np.testing.assert_array_equal(r.nodes[:, 0], [-1, 1])
    assert r.weights.sum() == 2
    for res in (2, 5, 16):
        r = sphere_rule(3, res)
        assert r.weights.sum() == pytest.approx(4 * math.pi, abs=1e-8)
        assert (r.weights * r.nodes[:, 0] ** 2).sum() == pytest.approx(4 * math.pi / 3, abs=1e-6)
    r5 = sphere_rule(5, 4, seed=3)
    assert len(r5) == 32 and r5.weights.sum() == pytest.approx(8 * math.pi**2 / 3, rel=1e-14)
    np.testing.assert_array_equal(sphere_rule(5, 4, seed=3).nodes, r5.nodes)
    with pytest.raises(ValueError, match="odd dimension"):
        sphere_rule(2)


def test_sigma_beta_examples():
    I = metric_from_matrix(np.eye(3))
    np.testing.assert_allclose(sigma_beta(I, np.eye(3)), 1.0, rtol=1e-15)
    assert sigma_beta(metric_from_matrix(np.diag([4.0, 1.0])), [1.0, 0.0]) == pytest.approx(0.5, rel=1e-15)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
@settings(max_examples=30)
def test_sigma_beta_eigen_bracket(seed, d):
    rng = np.random.default_rng(seed)
    M = random_spd(rng, d)
    m = metric_from_matrix(M)
    b = rng.standard_normal(d)
    b /= np.linalg.norm(b)
    s = sigma_beta(m, b)
    # ||L^{-T} b||^2 = b^T M^{-1} b
    assert s * s == pytest.approx(b @ np.linalg.solve(M, b), rel=1e-12)
    assert m.lambda_max ** -0.5 * (1 - 1e-12) <= s <= m.lambda_min ** -0.5 * (1 + 1e-12)


def test_deltas_examples():
    I = metric_from_matrix(np.eye(2))
    f = KernelMachine(I, [[0.3, 1.0]], [1.0])
    np.testing.assert_array_equal(deltas(f, [1.0, 0.0]), [0.0])
    X = np.arange(4)[:, None] * 1.5 * np.array([[1.0, 0.0]])
    f = KernelMachine(I, X, np.ones(4))
    np.testing.assert_allclose(deltas(f, [1.0, 0.0]), -1.5 * np.arange(4), atol=1e-15)
    shifted = KernelMachine(I, X + [3.0, -7.0], np.ones(4))
    b = np.array([0.6, 0.8])
    np.testing.assert_allclose(deltas(shifted, b), deltas(f, b), atol=1e-13)


@pytest.mark.parametrize("d", [1, 3, 5])
def test_inner_single_center_is_cd(d):
    value, err = inner_integral_from_deltas([1.0], [0.0], d, 1e-10)
    assert value == pytest.approx(cd_constant(d).value, abs=1e-10)
    assert err <= 1e-10


def test_inner_degenerate_and_far():
    assert inner_integral_from_deltas([0.0, 0.0], [0.0, 3.0], 3) == (0.0, 0.0)
    for d in (1, 3):
        tol = 1e-9
        value, _ = inner_integral_from_deltas([1.3, -0.4], [0.0, 50.0], d, tol)
        assert value == pytest.approx(1.7 * cd_constant(d).value, abs=2 * tol)
    with pytest.raises(ValueError):
        inner_integral_from_deltas([1.0], [0.0], 1, tol=0.0)


@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
@settings(max_examples=25, deadline=None)
def test_inner_triangle_and_homogeneity(seed, c):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=4)
    D = rng.uniform(-3, 3, 4)
    tol = 1e-9
    whole, e0 = inner_integral_from_deltas(a, D, 3, tol)
    parts = [inner_integral_from_deltas(a[i : i + 1], D[i : i + 1], 3, tol) for i in range(4)]
    assert whole <= sum(p[0] for p in parts) + e0 + sum(p[1] for p in parts)
    scaled, e1 = inner_integral_from_deltas(c * a, D, 3, tol)
    assert scaled == pytest.approx(abs(c) * whole, abs=e1 + abs(c) * e0 + 1e-12)


def test_inner_shift_invariance():
    a = np.array([1.0, -0.5, 0.25])
    D = np.array([0.0, 1.2, -0.7])
    v1, e1 = inner_integral_from_deltas(a, D, 3, 1e-10)
    v2, e2 = inner_integral_from_deltas(a, D + 5.0, 3, 1e-10)
    assert v1 == pytest.approx(v2, abs=e1 + e2)


def test_inner_matches_scipy_quad():
    from scipy.integrate import quad
    from scipy.optimize import brentq
    from scipy.special import eval_hermitenorm

    a = np.array([1.0, -0.8, 0.3])
    D = np.array([0.0, 0.9, -2.1])
    g = lambda y: sum(ai * eval_hermitenorm(4, y + di) * math.exp(-((y + di) ** 2) / 2) for ai, di in zip(a, D))
    grid = np.linspace(-12, 12, 24001)
    vals = np.array([g(y) for y in grid])
    roots = [brentq(g, grid[i], grid[i + 1], xtol=1e-15) for i in np.nonzero(vals[:-1] * vals[1:] < 0)[0]]
    pts = [-40.0, *roots, 40.0]
    ref = math.fsum(abs(quad(g, p, q, epsabs=1e-14, epsrel=1e-13, limit=200)[0]) for p, q in zip(pts, pts[1:]))
    # 30-digit reference: 9.883344706031735
    assert ref == pytest.approx(9.883344706031735, abs=1e-12)
    value, err = inner_integral_from_deltas(a, D, 3, 1e-10)
    assert value == pytest.approx(ref, abs=1e-10)
    assert err <= 1e-10


def test_rtv2_single_center_closed_forms():
    one = metric_from_matrix(np.eye(1))
    assert rtv2_single_center(one) == pytest.approx(2 * C1 / SQRT2PI, rel=1e-14)
    I3 = metric_from_matrix(np.eye(3))
    assert rtv2_single_center(I3) == pytest.approx(cd_constant(3).value * 4 * math.pi / SQRT2PI, rel=1e-14)
    f = KernelMachine(one, [[0.7]], [1.0])
    est = rtv2(f)
    assert est.value == pytest.approx(8 * math.exp(-0.5) / SQRT2PI, abs=3 * est.quadrature_error)
    with pytest.raises(ValueError, match="odd dimension"):
        rtv2_single_center(metric_from_matrix(np.eye(2)))


def test_single_center_isotropic_scaled_d3():
    m = metric_from_matrix(2.5 * np.eye(3))
    f = KernelMachine(m, [[0.1, 0.2, 0.3]], [1.0])
    est = rtv2(f, sphere_rule(3, 8))
    assert abs(est.value - rtv2_single_center(m)) <= 3 * est.quadrature_error
    # the product-rule path agrees with the isotropic shortcut
    from radon_gap.quadrature import product_sphere_nodes

    nodes, w = product_sphere_nodes(3, 20)
    sphere = math.fsum(w / sigma_beta(m, nodes) ** 4)
    direct = cd_constant(3).value * sphere / (m.det_L * SQRT2PI)
    assert direct == pytest.approx(rtv2_single_center(m), rel=1e-12)


def test_single_center_anisotropy_direction():
    m = metric_from_matrix(np.diag([3.0, 1.0, 1.0]))
    s1 = sigma_beta(m, [1.0, 0, 0])
    s2 = sigma_beta(m, [0, 1.0, 0])
    # per-direction integrand C_d / s^{d+1} is larger along the stiffer axis
    assert 1 / s1**4 > 1 / s2**4


def test_rtv2_normalizations_and_validation():
    f = KernelMachine(metric_from_matrix(np.eye(1)), [[0.0], [2.0]], [1.0, -0.5])
    p = rtv2(f, normalization="paper")
    u = rtv2(f, normalization="unit-amplitude")
    assert u.value == pytest.approx(p.value * math.sqrt(2 * math.pi), rel=1e-14)
    with pytest.raises(ValueError):
        rtv2(f, normalization="other")
    with pytest.raises(ValueError):
        rtv2(f, sphere_rule(3, 2))
    g = KernelMachine(metric_from_matrix(np.eye(2)), [[0.0, 0.0]], [1.0])
    with pytest.raises(ValueError, match="odd dimension"):
        rtv2(g)


@given(st.integers(0, 2**32 - 1), st.floats(-4, 4).filter(lambda c: abs(c) > 1e-3))
@settings(max_examples=15, deadline=None)
def test_rtv2_homogeneous(seed, c):
    f = random_machine_1d(np.random.default_rng(seed), 4)
    a, b = rtv2(f), rtv2(f.scaled(c))
    assert b.value == pytest.approx(abs(c) * a.value, abs=b.quadrature_error + abs(c) * a.quadrature_error)


def test_rtv2_translation_invariant_d3():
    rng = np.random.default_rng(5)
    m = metric_from_matrix(random_spd(rng, 3))
    X = rng.normal(size=(3, 3))
    a = rng.normal(size=3)
    rule = sphere_rule(3, 6)
    v1 = rtv2(KernelMachine(m, X, a), rule)
    v2 = rtv2(KernelMachine(m, X + [4.0, -1.0, 2.5], a), rule)
    assert v1.value == pytest.approx(v2.value, abs=1e-7 * v1.value)


def test_rtv2_triangle_inequality():
    rng = np.random.default_rng(8)
    f = random_machine_1d(rng, 5)
    whole = rtv2(f)
    parts = [rtv2(KernelMachine(f.metric, f.centers[i : i + 1], f.coeffs[i : i + 1])) for i in range(5)]
    assert whole.value <= sum(p.value + p.quadrature_error for p in parts) + whole.quadrature_error


def test_far_separation_additivity_d1():
    sigma = 1.3
    m = metric_from_matrix(np.eye(1), sigma)
    a = np.array([1.0, -2.0, 0.5])
    f = KernelMachine(m, 50 * sigma * np.arange(3)[:, None], a)
    unit = rtv2_single_center(m)
    assert rtv2(f, tol=1e-11).value == pytest.approx(3.5 * unit, rel=1e-6)


def test_direct_1d_single_gaussian():
    f = KernelMachine(metric_from_matrix(np.eye(1)), [[0.0]], [1.0])
    assert rtv2_direct_1d(f, 1e-10) == pytest.approx(C1, abs=1e-9)


@pytest.mark.parametrize("seed", range(6))
def test_direct_1d_identity(seed):
    rng = np.random.default_rng(100 + seed)
    f = random_machine_1d(rng, int(rng.integers(1, 9)))
    tol = 1e-8
    est = rtv2(f, tol=tol)
    oracle = 2 / SQRT2PI * rtv2_direct_1d(f, tol)
    assert abs(est.value - oracle) <= 2 * (est.quadrature_error + 2 / SQRT2PI * tol)


def test_direct_1d_linear_in_single_coefficient():
    m = metric_from_matrix([[0.7]])
    base = rtv2_direct_1d(KernelMachine(m, [[0.0], [1.0]], [1.0, 0.0]), 1e-10)
    triple = rtv2_direct_1d(KernelMachine(m, [[0.0], [1.0]], [3.0, 0.0]), 1e-10)
    assert triple == pytest.approx(3 * base, abs=1e-8)


def test_threads_do_not_change_result():
    rng = np.random.default_rng(4)
    m = metric_from_matrix(random_spd(rng, 3))
    f = KernelMachine(m, rng.normal(size=(4, 3)), rng.normal(size=4))
    rule = sphere_rule(3, 4)
    one = rtv2(f, rule, threads=1)
    many = rtv2(f, rule, threads=4)
    assert one.value == many.value and one.quadrature_error == many.quadrature_error


def test_monte_carlo_d5_single_center():
    m = metric_from_matrix(np.eye(5))
    f = KernelMachine(m, [np.zeros(5)], [1.0])
    est = rtv2(f, sphere_rule(5, 6, seed=1))
    # isotropic: every direction contributes the same, so Monte Carlo is exact
    assert est.value == pytest.approx(rtv2_single_center(m), rel=1e-9)
    g = KernelMachine(metric_from_matrix(np.diag([1.0, 2, 3, 4, 5])), [np.zeros(5)], [1.0])
    est = rtv2(g, sphere_rule(5, 20, seed=2))
    assert abs(est.value - rtv2_single_center(g.metric)) <= est.quadrature_error
