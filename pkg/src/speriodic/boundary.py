"""Boundary matrix decomposition and the spectrum of d/dt under x(0) = S x(T).

The boundary operator d/dt with domain {z : z(0) = S z(T)} has pure point
spectrum.  Writing U* S U = diag(exp(-i theta_j)) with theta_j in [0, 2pi)
sorted ascending (kernel angles first), the eigenpairs are

    lambda = i * (theta_j + 2 k pi) / T,
    phi(t) = T^{-1/2} exp(i (theta_j/T + 2 k pi / T) t) U e_j,

for j = 1..n and integer winding k.  The normalization constant of the
boundary matrix is C(S) = T^{-k0} / det[(S - I)|_W], W = ker(S - I)^perp.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import NonPositivePeriod, NotOrthogonal

THETA_EPS = 1e-10  # angles below this count as kernel directions


@dataclass(frozen=True)
class BoundaryData:
    """Validated boundary matrix with its unitary eigenstructure."""

    S: np.ndarray
    T: float
    U: np.ndarray          # unitary, S @ U[:, j] = exp(-i theta_j) U[:, j]
    thetas: np.ndarray     # ascending in [0, 2pi), first k0 exactly zero
    k0: int
    c_of_s: float          # signed C(S)
    abs_c_of_s: float

    @property
    def n(self) -> int:
        return self.S.shape[0]

    @cached_property
    def nus(self) -> np.ndarray:
        """Base frequencies nu_j = theta_j / T."""
        return self.thetas / self.T


@dataclass(frozen=True)
class DdtMode:
    """One eigenmode of d/dt under the S-boundary condition."""

    j: int                 # branch index, 1-based
    k: int                 # winding number
    mu: float              # frequency; eigenvalue is i * mu
    lam: complex
    vector: np.ndarray     # U e_j
    is_kernel: bool

    def eigenfunction(self, t, T: float) -> np.ndarray:
        """Values of (1/sqrt(T)) exp(i mu t) U e_j; shape t.shape + (n,)."""
        t = np.asarray(t, dtype=float)
        phase = np.exp(1j * self.mu * t) / np.sqrt(T)
        return phase[..., None] * self.vector


def make_boundary(S, T: float) -> BoundaryData:
    """Validate S and build its diagonalization, angles, k0 and C(S).

    Raises NotOrthogonal if ||S^T S - I|| > 1e-10 and NonPositivePeriod if
    T <= 0.  C(S) is evaluated as T^{-k0} / prod_{j>k0} (exp(-i theta_j) - 1)
    and asserted real to 1e-10.
    """
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if S.shape[0] != S.shape[1] or S.shape[0] < 1:
        raise NotOrthogonal(f"S must be square, got shape {S.shape}")
    if not (T > 0):
        raise NonPositivePeriod(f"period must be positive, got {T}")
    n = S.shape[0]
    defect = np.linalg.norm(S.T @ S - np.eye(n), 2)
    if defect > 1e-10:
        raise NotOrthogonal(f"||S^T S - I|| = {defect:.3e} > 1e-10")

    # complex Schur form of a normal matrix: Z unitary, diag(Tm) = eigenvalues
    Tm, Z = scipy.linalg.schur(S.astype(complex), output="complex")
    eigs = np.diag(Tm)
    thetas = np.mod(-np.angle(eigs), 2.0 * np.pi)
    thetas[np.minimum(thetas, 2.0 * np.pi - thetas) < THETA_EPS] = 0.0
    order = np.argsort(thetas, kind="stable")
    thetas = thetas[order]
    U = Z[:, order]
    k0 = int(np.count_nonzero(thetas == 0.0))

    resid = np.linalg.norm(S @ U - U @ np.diag(np.exp(-1j * thetas)), 2)
    if resid > 1e-10:
        raise NotOrthogonal(f"eigendecomposition residual {resid:.3e}")

    if k0 == n:
        c = complex(T ** (-n))
    else:
        det_w = np.prod(np.exp(-1j * thetas[k0:]) - 1.0)
        c = T ** (-k0) / det_w
    if abs(c.imag) > 1e-10 * max(1.0, abs(c)):
        raise NotOrthogonal(f"C(S) not real: {c}")
    c_of_s = float(c.real)
    return BoundaryData(S=S, T=float(T), U=U, thetas=thetas, k0=k0,
                        c_of_s=c_of_s, abs_c_of_s=abs(c_of_s))


def ddt_spectrum(b: BoundaryData, cutoff: float) -> list[DdtMode]:
    """All modes with |mu| <= cutoff, ordered by |lambda| then (j, k).

    The symmetric magnitude cutoff makes the returned frequency multiset
    invariant under mu -> -mu (angles come in conjugate pairs).
    """
    if not (cutoff > 0):
        raise ValueError("cutoff must be positive")
    step = 2.0 * np.pi / b.T
    modes = []
    for j in range(b.n):
        nu = b.nus[j]
        kmin = int(np.ceil((-cutoff - nu) / step - 1e-12))
        kmax = int(np.floor((cutoff - nu) / step + 1e-12))
        for k in range(kmin, kmax + 1):
            mu = nu + k * step
            modes.append(DdtMode(j=j + 1, k=k, mu=mu, lam=1j * mu,
                                 vector=b.U[:, j].copy(),
                                 is_kernel=(j < b.k0 and k == 0)))
    modes.sort(key=lambda m: (abs(m.lam), m.j, m.k))
    return modes


def spectrum_is_symmetric(modes, tol: float = 1e-9) -> bool:
    """Check the frequency multiset is symmetric under mu -> -mu."""
    mus = np.sort([m.mu for m in modes])
    return bool(np.allclose(mus, -mus[::-1], atol=tol))
