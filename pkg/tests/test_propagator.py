"""Flow, monodromy, iterated-integral and Green-kernel tests.

Oracles: scaling-and-squaring matrix exponential (scipy), closed-form scalar
quadratures, and brute-force nested Gauss quadrature for ordered integrals.
"""

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from speriodic._quad import gauss_rule
from speriodic.boundary import make_boundary
from speriodic.errors import DimensionMismatch
from speriodic.paths import CoeffPath
from speriodic.propagator import (fundamental_solution, green_kernel,
                                  iterated_integrals, monodromy)


def nested_ordered_integral(f, T, depth, order=24):
    """Oracle: int_0^T f(t1) int_0^{t1} f(t2) ... dt recursively by Gauss.

    Independent of the augmented-ODE route; cost order**depth.
    """
    xg, wg = gauss_rule(order)

    def level(upper, d):
        half = 0.5 * upper
        nodes = half * (xg + 1.0)
        acc = 0.0
        for x, w in zip(nodes, wg):
            term = f(x)
            if d > 1:
                term = term @ level(x, d - 1)
            acc = acc + (half * w) * term
        return acc

    return level(T, depth)


def test_zero_field_gives_identity():
    fl = fundamental_solution(CoeffPath.zero(2, 1.0))
    for t in [0.0, 0.3, 1.0]:
        assert np.allclose(fl.gamma(t), np.eye(2), atol=1e-12)


def test_constant_field_matches_matrix_exponential():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 3)) * 0.8
    T = 1.7
    fl = fundamental_solution(CoeffPath.constant(A, T))
    want = expm(A * T)
    assert np.linalg.norm(fl.monodromy_raw - want) / np.linalg.norm(want) < 1e-10


def test_scalar_cosine_closes_to_identity():
    T = 2.0
    d = CoeffPath.trigpoly(T, [[0.0]], cos_terms=[[[1.0]]])
    fl = fundamental_solution(d)
    assert abs(fl.monodromy_raw[0, 0] - 1.0) < 1e-10


def test_liouville_identity():
    rng = np.random.default_rng(1)
    paths = [
        CoeffPath.constant(rng.standard_normal((2, 2)), 1.0),
        CoeffPath.trigpoly(1.0, rng.standard_normal((2, 2)) * 0.4,
                           cos_terms=rng.standard_normal((2, 2, 2)) * 0.3,
                           sin_terms=rng.standard_normal((2, 2, 2)) * 0.3),
        CoeffPath.poly(0.8, rng.standard_normal((3, 2, 2)) * 0.5),
    ]
    for p in paths:
        assert fundamental_solution(p).liouville_residual() < 1e-8


def test_inverse_consistency_along_checkpoints():
    rng = np.random.default_rng(2)
    p = CoeffPath.trigpoly(1.3, rng.standard_normal((2, 2)) * 0.5,
                           cos_terms=rng.standard_normal((1, 2, 2)) * 0.5)
    fl = fundamental_solution(p)
    for t in fl.checkpoint_times:
        assert np.linalg.norm(fl.gamma(t) @ fl.gamma_inv(t) - np.eye(2)) < 1e-10
    # between checkpoints the dense interpolant stays close as well
    for t in np.linspace(0, 1.3, 13):
        assert np.linalg.norm(fl.gamma(t) @ fl.gamma_inv(t) - np.eye(2)) < 1e-8


def test_cocycle_restart():
    rng = np.random.default_rng(3)
    p = CoeffPath.trigpoly(1.0, rng.standard_normal((2, 2)) * 0.6,
                           sin_terms=rng.standard_normal((1, 2, 2)) * 0.6)
    fl = fundamental_solution(p)
    t1 = 0.4
    res = solve_ivp(lambda t, y: (p(t) @ y.reshape(2, 2)).ravel(),
                    (t1, 1.0), fl.gamma(t1).astype(complex).ravel(),
                    rtol=1e-12, atol=1e-13)
    restart = res.y[:, -1].reshape(2, 2)
    ref = fl.gamma(1.0)
    assert np.linalg.norm(restart - ref) / np.linalg.norm(ref) < 1e-9


def test_monodromy_cases():
    S = np.array([[0.0, -1.0], [1.0, 0.0]])
    b = make_boundary(S, 1.0)
    fl0 = fundamental_solution(CoeffPath.zero(2, 1.0))
    assert np.allclose(monodromy(fl0, b), S, atol=1e-12)

    # scalar with int d = c under antiperiodic boundary
    c = 0.37
    d = CoeffPath.constant([[c]], 1.0)
    bm = make_boundary(-np.eye(1), 1.0)
    m = monodromy(fundamental_solution(d), bm)
    assert m[0, 0] == pytest.approx(-np.exp(c), rel=1e-10)

    rng = np.random.default_rng(4)
    A = rng.standard_normal((2, 2)) * 0.5
    bi = make_boundary(np.eye(2), 1.0)
    m2 = monodromy(fundamental_solution(CoeffPath.constant(A, 1.0)), bi)
    assert np.allclose(m2, expm(A), rtol=1e-9, atol=1e-12)

    with pytest.raises(DimensionMismatch):
        monodromy(fl0, bm)


def test_iterated_integrals_constant_commuting():
    A = np.array([[0.2, 0.1], [-0.3, 0.4]])
    T = 1.4
    fl0 = fundamental_solution(CoeffPath.zero(2, T))
    mk = iterated_integrals(fl0, CoeffPath.constant(A, T), 4)
    fact = 1.0
    for k, M in enumerate(mk.Ms, start=1):
        fact *= k
        want = np.linalg.matrix_power(A * T, k) / fact
        assert np.allclose(M, want, atol=1e-10)


def test_iterated_integrals_zero_path():
    fl0 = fundamental_solution(CoeffPath.zero(2, 1.0))
    mk = iterated_integrals(fl0, CoeffPath.zero(2, 1.0), 3)
    for M in mk.Ms:
        assert np.allclose(M, 0.0, atol=1e-14)


def test_iterated_integrals_vs_nested_quadrature_oracle():
    rng = np.random.default_rng(5)
    T = 1.0
    D0 = CoeffPath.constant(rng.standard_normal((2, 2)) * 0.3, T)
    D = CoeffPath.trigpoly(T, rng.standard_normal((2, 2)) * 0.4,
                           cos_terms=rng.standard_normal((1, 2, 2)) * 0.4)
    fl0 = fundamental_solution(D0)
    mk = iterated_integrals(fl0, D, 3)

    def dhat(t):
        return fl0.gamma_inv(t) @ D(t) @ fl0.gamma(t)

    for k in range(1, 4):
        want = nested_ordered_integral(dhat, T, k)
        got = mk.Ms[k - 1]
        assert np.linalg.norm(got - want) / max(np.linalg.norm(want), 1e-12) < 1e-7


def test_green_kernel_scalar_antiperiodic_half_jump():
    T = 1.0
    fl0 = fundamental_solution(CoeffPath.zero(1, T))
    b = make_boundary(-np.eye(1), T)
    K = green_kernel(fl0, b, 0.0)
    assert K(0.7, 0.2)[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert K(0.2, 0.7)[0, 0] == pytest.approx(-0.5, abs=1e-12)


def test_green_kernel_blockwise_antiperiodic():
    T = 1.0
    n = 3
    fl0 = fundamental_solution(CoeffPath.zero(n, T))
    b = make_boundary(-np.eye(n), T)
    K = green_kernel(fl0, b, 0.0)
    assert np.allclose(K(0.6, 0.1), 0.5 * np.eye(n), atol=1e-12)
    assert np.allclose(K(0.1, 0.6), -0.5 * np.eye(n), atol=1e-12)


def test_green_kernel_jump_relation():
    rng = np.random.default_rng(6)
    T = 1.2
    D0 = CoeffPath.trigpoly(T, rng.standard_normal((2, 2)) * 0.4,
                            sin_terms=rng.standard_normal((1, 2, 2)) * 0.4)
    b = make_boundary(np.array([[0, -1.0], [1.0, 0]]), T)
    K = green_kernel(fundamental_solution(D0), b, 0.2 + 0.1j)
    t = 0.5
    eps = 1e-9
    jump = K(t + eps, t) - K(t - eps, t)
    assert np.linalg.norm(jump - np.eye(2)) < 1e-7


def test_green_kernel_solves_bvp_residual():
    rng = np.random.default_rng(7)
    T = 1.0
    D0 = CoeffPath.constant(rng.standard_normal((2, 2)) * 0.5, T)
    b = make_boundary(-np.eye(2), T)
    nu = 0.3
    fl0 = fundamental_solution(D0)
    K = green_kernel(fl0, b, nu)
    v = np.array([1.0, -0.5])

    xg, wg = gauss_rule(40)

    def z(t):
        acc = np.zeros(2, dtype=complex)
        # split the s-integral at the kernel jump s = t
        for (a, bnd) in [(0.0, t), (t, T)]:
            half = 0.5 * (bnd - a)
            mid = 0.5 * (bnd + a)
            for x, w in zip(xg, wg):
                s = mid + half * x
                acc += half * w * (K(t, s) @ v)
        return acc

    h = 1e-5
    for t in [0.2, 0.55, 0.9]:
        dz = (z(t + h) - z(t - h)) / (2 * h)
        resid = dz - (D0(t) - nu * np.eye(2)) @ z(t) - v
        assert np.linalg.norm(resid) < 1e-8
    # boundary condition z(0) = S z(T)
    assert np.linalg.norm(z(0.0) - b.S @ z(T)) < 1e-8
