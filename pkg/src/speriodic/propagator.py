"""Fundamental solutions, monodromy, iterated integrals and resolvent kernels.

The flow of dx/dt = D(t) x is integrated with an embedded RK 5(4) pair with
dense output.  The inverse gamma(t)^{-1} is carried as a second unknown via
dY/dt = -Y D (avoids conditioning loss from explicit inversion).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .boundary import BoundaryData
from .errors import DimensionMismatch, IntegratorFailure, SingularBoundary
from .paths import CoeffPath

DEFAULT_TOL = (1e-12, 1e-10)  # (abs, rel)


@dataclass(frozen=True)
class Flow:
    """Fundamental solution gamma(t) with dense output and inverse access."""

    source: CoeffPath
    monodromy_raw: np.ndarray  # gamma(T)
    tol: tuple
    checkpoint_times: np.ndarray
    _sol: object

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def T(self) -> float:
        return self.source.T

    def gamma(self, t) -> np.ndarray:
        """gamma(t); t scalar or array, returns t.shape + (n, n)."""
        return self._dense(t, 0)

    def gamma_inv(self, t) -> np.ndarray:
        """gamma(t)^{-1} from the adjoint unknown."""
        return self._dense(t, 1)

    def _dense(self, t, block: int):
        t = np.asarray(t, dtype=float)
        n = self.n
        y = self._sol(np.atleast_1d(t).ravel())
        mats = y.T.reshape(-1, 2, n, n)[:, block]
        if t.ndim == 0:
            return mats[0]
        return mats.reshape(t.shape + (n, n))

    def liouville_residual(self) -> float:
        """Relative defect of det gamma(T) = exp(int tr D dt)."""
        target = np.exp(self.source.trace_integral())
        return abs(np.linalg.det(self.monodromy_raw) - target) / abs(target)


def _flow_rhs(path: CoeffPath):
    n = path.n

    def rhs(t, y):
        d = path(t)
        m = y.reshape(2, n, n)
        return np.concatenate([(d @ m[0]).ravel(), (-m[1] @ d).ravel()])

    return rhs


def fundamental_solution(D: CoeffPath, tol: tuple = DEFAULT_TOL) -> Flow:
    """Integrate gamma' = D gamma, gamma(0) = I together with its inverse."""
    n = D.n
    y0 = np.concatenate([np.eye(n, dtype=complex).ravel()] * 2)
    res = solve_ivp(_flow_rhs(D), (0.0, D.T), y0, method="RK45",
                    dense_output=True, atol=tol[0], rtol=tol[1])
    if not res.success:
        raise IntegratorFailure(res.message)
    gammaT = res.y[:, -1].reshape(2, n, n)[0]
    return Flow(source=D, monodromy_raw=gammaT, tol=tol,
                checkpoint_times=res.t.copy(), _sol=res.sol)


def monodromy(flow: Flow, b: BoundaryData) -> np.ndarray:
    """M = S gamma(T)."""
    if b.n != flow.n:
        raise DimensionMismatch(f"boundary dim {b.n} != flow dim {flow.n}")
    return b.S @ flow.monodromy_raw


@dataclass(frozen=True)
class IteratedIntegrals:
    """Time-ordered integrals M_k of the conjugated path gamma0^{-1} D gamma0."""

    K: int
    Ms: list
    base_flow: Flow


def iterated_integrals(flow0: Flow, D: CoeffPath, K: int,
                       tol: tuple = DEFAULT_TOL) -> IteratedIntegrals:
    """All orders M_1..M_K in one augmented linear solve.

    The chain Gamma_k' = Dhat Gamma_{k-1}, Gamma_0 = I with
    Dhat = gamma0^{-1} D gamma0 gives M_k = Gamma_k(T); this is the k-th
    Taylor coefficient of the perturbed transfer matrix in the coupling
    parameter.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if D.n != flow0.n:
        raise DimensionMismatch("path and base flow dimensions differ")
    n = D.n

    def rhs(t, y):
        dhat = flow0.gamma_inv(t) @ D(t) @ flow0.gamma(t)
        g = y.reshape(K, n, n)
        out = np.empty_like(g)
        out[0] = dhat
        for k in range(1, K):
            out[k] = dhat @ g[k - 1]
        return out.ravel()

    y0 = np.zeros(K * n * n, dtype=complex)
    res = solve_ivp(rhs, (0.0, D.T), y0, method="RK45",
                    atol=tol[0], rtol=tol[1])
    if not res.success:
        raise IntegratorFailure(res.message)
    mats = res.y[:, -1].reshape(K, n, n)
    return IteratedIntegrals(K=K, Ms=[mats[k].copy() for k in range(K)],
                             base_flow=flow0)


@dataclass(frozen=True)
class GreenKernel:
    """Resolvent kernel of d/dt - D0 + nu under the S-boundary condition.

    K(t,s) = gamma(t) (Q + [s<t] I) gamma(s)^{-1} with
    gamma(t) = exp(-nu t) gamma0(t) and Q = (I - S gamma(T))^{-1} S gamma(T);
    z(t) = int K(t,s) f(s) ds solves z' = (D0 - nu) z + f, z(0) = S z(T).
    """

    flow0: Flow
    b: BoundaryData
    nu: complex
    Q: np.ndarray

    def gamma(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-self.nu * t)[..., None, None] * self.flow0.gamma(t) \
            if t.ndim else np.exp(-self.nu * t) * self.flow0.gamma(t)

    def gamma_inv(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(self.nu * t)[..., None, None] * self.flow0.gamma_inv(t) \
            if t.ndim else np.exp(self.nu * t) * self.flow0.gamma_inv(t)

    def __call__(self, t: float, s: float) -> np.ndarray:
        inc = np.eye(self.b.n) if s < t else np.zeros((self.b.n, self.b.n))
        return self.gamma(t) @ (self.Q + inc) @ self.gamma_inv(s)


def green_kernel(flow0: Flow, b: BoundaryData, nu: complex = 0.0,
                 sing_eps: float = 1e-12) -> GreenKernel:
    """Build the kernel evaluator; SingularBoundary if I - S gamma(T) is
    numerically singular."""
    if b.n != flow0.n:
        raise DimensionMismatch("boundary and flow dimensions differ")
    SgT = np.exp(-nu * b.T) * (b.S @ flow0.monodromy_raw)
    A = np.eye(b.n) - SgT
    try:
        Ainv = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise SingularBoundary(str(exc)) from exc
    if np.linalg.norm(Ainv, 2) > 1.0 / sing_eps:
        raise SingularBoundary("||(I - S gamma(T))^{-1}|| exceeds 1e12")
    return GreenKernel(flow0=flow0, b=b, nu=complex(nu), Q=Ainv @ SgT)


def monodromies_batch(D0: Optional[CoeffPath], Dt: CoeffPath,
                      alphas: np.ndarray, rtol: float = 1e-10,
                      atol: float = 1e-12) -> np.ndarray:
    """gamma_alpha(T) for dx/dt = (D0 + alpha Dt) x, batched over alphas.

    One stacked solve; the step controller adapts to the stiffest member.
    Returns shape (len(alphas), n, n).
    """
    alphas = np.asarray(alphas, dtype=complex).ravel()
    n = Dt.n
    B = alphas.shape[0]
    eye = np.eye(n, dtype=complex)
    y0 = np.tile(eye.ravel(), B)

    def rhs(t, y):
        g = y.reshape(B, n, n)
        dt_val = Dt(t)
        acc = alphas[:, None, None] * (dt_val @ g)
        if D0 is not None:
            acc += D0(t) @ g
        return acc.ravel()

    res = solve_ivp(rhs, (0.0, Dt.T), y0, method="RK45", rtol=rtol, atol=atol)
    if not res.success:
        raise IntegratorFailure(res.message)
    return res.y[:, -1].reshape(B, n, n)
