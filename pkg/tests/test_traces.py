"""Trace-formula machinery: G factors, closed forms, oracles, eigensolver."""

import numpy as np
import pytest

from speriodic.boundary import make_boundary
from speriodic.errors import InsufficientOrder, SingularShift
from speriodic.fredholm import conditional_trace_closed
from speriodic.paths import CoeffPath
from speriodic.propagator import (fundamental_solution, iterated_integrals,
                                  monodromies_batch, monodromy)
from speriodic.trace_formulas import (bvp_eigenvalues, compositions,
                                      eigen_sum, g_factors,
                                      kernel_trace_oracle,
                                      smallest_singular_values, taylor_cm,
                                      trace_closed_m1, trace_closed_m2,
                                      trace_formula, trace_free_resolvent,
                                      trace_free_resolvent2, trace_report)


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def random_trigpoly(rng, n, T, degree=2, scale=0.8):
    c0 = rng.standard_normal((n, n))
    cos_t = rng.standard_normal((degree, n, n))
    sin_t = rng.standard_normal((degree, n, n))
    norm = np.linalg.norm(c0) + sum(map(np.linalg.norm, cos_t)) \
        + sum(map(np.linalg.norm, sin_t))
    f = scale / max(norm, 1e-12)
    return CoeffPath.trigpoly(T, c0 * f, cos_t * f, sin_t * f)


def scalar_antiperiodic_setup(T=1.0):
    b = make_boundary(-np.eye(1), T)
    d = CoeffPath.constant([[1.0 / T]], T)   # int d = 1
    flow0 = fundamental_solution(CoeffPath.zero(1, T))
    return b, d, flow0


# -- compositions and G factors ---------------------------------------------

def test_composition_count_is_power_of_two():
    for m in range(1, 6):
        comps = compositions(m)
        assert len(comps) == 2 ** (m - 1)
        assert all(sum(c) == m for c in comps)
        assert len(set(comps)) == len(comps)


def test_g_factors_zero_path():
    b, _, flow0 = scalar_antiperiodic_setup()
    mk = iterated_integrals(flow0, CoeffPath.zero(1, 1.0), 3)
    g = g_factors(mk, monodromy(flow0, b), 0.0)
    assert all(np.allclose(G, 0.0, atol=1e-14) for G in g.Gs)


def test_g_factors_scalar_value():
    b, d, flow0 = scalar_antiperiodic_setup()
    mk = iterated_integrals(flow0, d, 2)
    g = g_factors(mk, monodromy(flow0, b), 0.0, check_cyclic=True)
    # M = -1, lambda = 1, M (M - lambda)^{-1} = 1/2
    assert g.Gs[0][0, 0] == pytest.approx(0.5, abs=1e-12)
    assert g.Gs[1][0, 0] == pytest.approx(0.25, abs=1e-12)


def test_g_factors_constant_commuting():
    A = np.array([[0.3, 0.1], [0.0, -0.2]])
    T = 1.0
    b = make_boundary(-np.eye(2), T)
    flow0 = fundamental_solution(CoeffPath.zero(2, T))
    mk = iterated_integrals(flow0, CoeffPath.constant(A, T), 3)
    M = monodromy(flow0, b)
    g = g_factors(mk, M, 0.0)
    W = M @ np.linalg.inv(M - np.eye(2))
    fact = 1.0
    for k, G in enumerate(g.Gs, start=1):
        fact *= k
        assert np.allclose(G, np.linalg.matrix_power(A * T, k) / fact @ W,
                           atol=1e-10)


def test_g_factors_singular_shift():
    b, d, flow0 = scalar_antiperiodic_setup()
    mk = iterated_integrals(flow0, d, 1)
    with pytest.raises(SingularShift):
        g_factors(mk, monodromy(flow0, b), 1j * np.pi)  # e^{i pi} = -1 = M


# -- closed trace formulas ---------------------------------------------------

def test_trace_formula_scalar_anchor_values():
    b, d, flow0 = scalar_antiperiodic_setup()
    mk = iterated_integrals(flow0, d, 4)
    g = g_factors(mk, monodromy(flow0, b), 0.0)
    assert trace_formula(g, 1, d) == pytest.approx(0.0, abs=1e-12)
    # sum over eigenvalues i pi (2k+1): sum 1/alpha^2 = -1/4
    assert trace_formula(g, 2, d) == pytest.approx(-0.25, abs=1e-12)
    with pytest.raises(InsufficientOrder):
        trace_formula(g, 5, d)


def test_trace_formula_zero_path():
    b, _, flow0 = scalar_antiperiodic_setup()
    z = CoeffPath.zero(1, 1.0)
    mk = iterated_integrals(flow0, z, 3)
    g = g_factors(mk, monodromy(flow0, b), 0.0)
    for m in (1, 2, 3):
        assert abs(trace_formula(g, m, z)) < 1e-13


def test_taylor_cm_low_orders_and_consistency():
    rng = np.random.default_rng(21)
    T = 1.0
    b = make_boundary(rotation(1.2), T)
    D0 = CoeffPath.constant(rng.standard_normal((2, 2)) * 0.3, T)
    D = random_trigpoly(rng, 2, T)
    flow0 = fundamental_solution(D0)
    mk = iterated_integrals(flow0, D, 4)
    g = g_factors(mk, monodromy(flow0, b), 0.3)
    G1, G2 = g.Gs[0], g.Gs[1]
    assert taylor_cm(g, 1) == pytest.approx(complex(np.trace(G1)), rel=1e-12)
    want2 = np.trace(G2) - 0.5 * np.trace(G1 @ G1)
    assert taylor_cm(g, 2) == pytest.approx(complex(want2), rel=1e-12)
    for m in (2, 3, 4):
        assert trace_formula(g, m, D) == pytest.approx(-m * taylor_cm(g, m),
                                                       rel=1e-12)


def test_taylor_cm_matches_circle_fit_of_log_determinant():
    rng = np.random.default_rng(22)
    T = 1.0
    b = make_boundary(rotation(1.2), T)
    D0 = CoeffPath.constant(rng.standard_normal((2, 2)) * 0.3, T)
    D = random_trigpoly(rng, 2, T)
    nu = 0.3
    flow0 = fundamental_solution(D0)
    mk = iterated_integrals(flow0, D, 4)
    M = monodromy(flow0, b)
    g = g_factors(mk, M, nu)
    lam = np.exp(nu * T)

    r, Mn = 0.05, 64
    alphas = r * np.exp(2j * np.pi * np.arange(Mn) / Mn)
    gammas = monodromies_batch(D0, D, alphas, rtol=1e-12)
    dets = np.linalg.det(b.S[None] @ gammas - lam * np.eye(2)[None])
    h = np.log(dets / np.linalg.det(M - lam * np.eye(2)))
    coeffs = np.fft.fft(h) / Mn
    for m in range(1, 5):
        cm = taylor_cm(g, m)
        got = coeffs[m] / r ** m
        assert abs(got - cm) / abs(cm) < 1e-6


def test_closed_m1_m2_match_composition_route():
    rng = np.random.default_rng(23)
    T = 1.0
    b = make_boundary(rotation(0.7), T)
    D0 = CoeffPath.constant(rng.standard_normal((2, 2)) * 0.4, T)
    D = random_trigpoly(rng, 2, T)
    nu = 0.2 + 0.1j
    flow0 = fundamental_solution(D0)
    mk = iterated_integrals(flow0, D, 2)
    g = g_factors(mk, monodromy(flow0, b), nu)
    assert trace_closed_m1(D, flow0, b, nu, mk=mk) == pytest.approx(
        trace_formula(g, 1, D), abs=1e-13)
    assert trace_closed_m2(D, flow0, b, nu, mk=mk) == pytest.approx(
        trace_formula(g, 2, D), abs=1e-13)


def test_trace_formula_m1_reduces_to_free_resolvent_form():
    rng = np.random.default_rng(24)
    T = 1.0
    b = make_boundary(rotation(2 * np.pi / 5), T)
    D = random_trigpoly(rng, 2, T)
    flow0 = fundamental_solution(CoeffPath.zero(2, T))
    for nu in [0.0, 0.4, 0.2 + 0.3j]:
        mk = iterated_integrals(flow0, D, 1)
        g = g_factors(mk, monodromy(flow0, b), nu)
        lhs = trace_formula(g, 1, D)
        rhs = trace_free_resolvent(D, b, nu)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))
    # at nu = 0 this is also the conditional trace of D (d/dt)^{-1}
    mk = iterated_integrals(flow0, D, 1)
    g = g_factors(mk, monodromy(flow0, b), 0.0)
    assert trace_formula(g, 1, D) == pytest.approx(
        conditional_trace_closed(D, b), abs=1e-12)


def test_free_resolvent2_examples_and_derivative():
    T = 1.3
    b = make_boundary(-np.eye(1), T)
    d = CoeffPath.constant([[1.0 / T]], T)
    assert trace_free_resolvent2(d, b, 0.0) == pytest.approx(T / 4, abs=1e-12)
    zero_mean = CoeffPath.trigpoly(T, [[0.0]], cos_terms=[[[1.0]]])
    assert abs(trace_free_resolvent2(zero_mean, b, 0.5)) < 1e-14
    # matches the nu-derivative of the first-order form
    h = 1e-5
    for nu in [0.0, 0.3]:
        fd = (trace_free_resolvent(d, b, nu + h)
              - trace_free_resolvent(d, b, nu - h)) / (2 * h)
        assert abs(trace_free_resolvent2(d, b, nu) - fd) < 1e-6


# -- kernel-quadrature oracle -------------------------------------------------

def test_kernel_oracle_scalar_analytic_value():
    b, d, flow0 = scalar_antiperiodic_setup()
    got = kernel_trace_oracle(d, flow0, b, 0.0, 2)
    assert got == pytest.approx(-0.25, abs=1e-8)


def test_kernel_oracle_zero_path():
    b, _, flow0 = scalar_antiperiodic_setup()
    z = CoeffPath.zero(1, 1.0)
    assert abs(kernel_trace_oracle(z, flow0, b, 0.0, 2)) < 1e-14
    assert abs(kernel_trace_oracle(z, flow0, b, 0.0, 3)) < 1e-14


def test_kernel_oracle_matches_trace_formula_n2():
    rng = np.random.default_rng(25)
    T = 1.0
    b = make_boundary(rotation(2 * np.pi / 5), T)
    D0 = CoeffPath.constant(rng.standard_normal((2, 2)) * 0.3, T)
    D = random_trigpoly(rng, 2, T)
    nu = 0.25
    flow0 = fundamental_solution(D0)
    mk = iterated_integrals(flow0, D, 3)
    g = g_factors(mk, monodromy(flow0, b), nu)
    want2 = trace_formula(g, 2, D)
    got2 = kernel_trace_oracle(D, flow0, b, nu, 2)
    assert abs(got2 - want2) / abs(want2) < 1e-6
    want3 = trace_formula(g, 3, D)
    got3 = kernel_trace_oracle(D, flow0, b, nu, 3)
    assert abs(got3 - want3) / abs(want3) < 1e-4


def test_kernel_oracle_scalar_m3_value():
    # eigenvalues i pi (2k+1): sum 1/alpha^3 = 0 by symmetry
    b, d, flow0 = scalar_antiperiodic_setup()
    got = kernel_trace_oracle(d, flow0, b, 0.0, 3)
    assert abs(got) < 1e-8


# -- boundary eigenvalues -----------------------------------------------------

def test_bvp_eigenvalues_scalar_exponential():
    T = 1.0
    b = make_boundary(-np.eye(1), T)
    d = CoeffPath.trigpoly(T, [[1.0]], cos_terms=[[[0.7]]])  # int d = 1
    eigs = bvp_eigenvalues(None, d, b, (0.0, 4 * np.pi))
    assert eigs.count == 4
    want = np.array([1j * np.pi, -1j * np.pi, 3j * np.pi, -3j * np.pi])
    got = np.array(sorted(eigs.roots, key=lambda z: z.imag))
    assert np.allclose(got, np.sort_complex(want), atol=1e-8)
    assert all(m == 1 for m in eigs.multiplicities)
    assert np.all(eigs.residuals <= 1e-10 * eigs.scale)
    sv = smallest_singular_values(eigs, None, d, b)
    assert np.all(sv <= 1e-8)


def test_bvp_eigenvalues_zero_path_counts_nothing():
    b = make_boundary(-np.eye(1), 1.0)
    eigs = bvp_eigenvalues(None, CoeffPath.zero(1, 1.0), b, (0.0, 10.0))
    assert eigs.count == 0
    assert eigs.roots.size == 0


def test_eigen_sum_scalar_antiperiodic():
    T = 1.0
    b = make_boundary(-np.eye(1), T)
    d = CoeffPath.constant([[1.0]], T)
    eigs = bvp_eigenvalues(None, d, b, (0.0, 40 * np.pi))
    val, tail = eigen_sum(eigs, 2)
    assert abs(val.imag) < 1e-10           # roots come in +/- pairs
    assert abs(val - (-0.25)) <= tail
    assert tail < 0.01
    with pytest.raises(ValueError):
        eigen_sum(eigs, 1)                 # linear growth: not absolutely summable


def test_trace_report_cross_method():
    b, d, flow0 = scalar_antiperiodic_setup()
    rep = trace_report(d, b, 0.0, 2,
                       schedule=[50 * np.pi, 100 * np.pi, 200 * np.pi],
                       contour=(0.0, 40 * np.pi))
    for v in (rep.value_formula, rep.value_truncated, rep.value_oracle):
        assert v == pytest.approx(-0.25, abs=1e-5)
    assert abs(rep.value_eigsum - (-0.25)) <= rep.eigsum_tail
    assert rep.discrepancies["formula_vs_oracle"] < 1e-5
