"""Truncated operators in the d/dt eigenbasis; conditional traces and
determinants.

Conditional quantities are limits of finite sections over the symmetric
magnitude cutoff |mu| <= Lambda; asymmetric mode sets are rejected because
the limits depend on the truncation family.  Determinants are accumulated in
log form (modulus + phase) so sections of dimension ~10^3-10^4 cannot
overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._quad import panel_nodes, richardson
from .boundary import BoundaryData, DdtMode, ddt_spectrum, spectrum_is_symmetric
from .errors import (AsymmetricCutoff, NonConvergent, SingularShift,
                     SingularTruncation)
from .paths import CoeffPath
from .propagator import Flow

OPKINDS = ("resolvent_base", "mult_resolvent", "F")


@dataclass(frozen=True)
class TruncatedOperator:
    """Dense section of an operator in the ordered d/dt eigenbasis."""

    modes: list
    matrix: np.ndarray
    meta: str = ""

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class DetResult:
    """Sectional determinant values along a cutoff schedule."""

    value: complex              # at the largest cutoff
    log_value: complex
    method: str
    cutoffs: list
    extrapolated: complex
    error_estimate: float
    values: list = field(default_factory=list)  # per-cutoff values


def _oscillatory_nodes(D: CoeffPath, max_abs_freq: float, panels, order):
    """Panel-Gauss nodes resolving exp(i w t) up to |w| = max_abs_freq."""
    T = D.T
    if panels is None:
        panels = max(16, int(np.ceil(max_abs_freq * T / np.pi)) + 8)
    x, w, _ = panel_nodes(0.0, T, panels, order)
    return x, w


def fourier_entry(D: CoeffPath, b: BoundaryData, mode_k: DdtMode,
                  mode_l: DdtMode, panels=None, order: int = 10) -> complex:
    """Matrix element (1/T) int e^{i(mu_k - mu_l)t} u_l^* D(t) u_k dt."""
    dmu = mode_k.mu - mode_l.mu
    x, w = _oscillatory_nodes(D, abs(dmu), panels, order)
    vals = D(x)
    s = np.einsum("i,tij,j->t", np.conj(mode_l.vector), vals, mode_k.vector)
    return complex(np.sum(w * np.exp(1j * dmu * x) * s) / D.T)


def _mult_matrix(D: CoeffPath, b: BoundaryData, modes: list,
                 panels=None, order: int = 10) -> np.ndarray:
    """All elements <D phi_col, phi_row> at once.

    Entries depend on the winding difference only within a branch pair, so
    each pair needs one vector of oscillatory integrals (Toeplitz fill).
    """
    d = len(modes)
    B = np.zeros((d, d), dtype=complex)
    if D.kind == "zero" or d == 0:
        return B
    T = b.T
    step = 2.0 * np.pi / T
    mus = np.array([m.mu for m in modes])
    x, w = _oscillatory_nodes(D, 2 * np.max(np.abs(mus)), panels, order)
    vals = D(x)

    by_branch: dict[int, list[int]] = {}
    for idx, m in enumerate(modes):
        by_branch.setdefault(m.j, []).append(idx)

    for ja, idx_a in by_branch.items():          # column branch
        ua = modes[idx_a[0]].vector
        ka = np.array([modes[i].k for i in idx_a])
        nu_a = b.nus[ja - 1]
        for jb, idx_b in by_branch.items():      # row branch
            ub = modes[idx_b[0]].vector
            kb = np.array([modes[i].k for i in idx_b])
            nu_b = b.nus[jb - 1]
            s = np.einsum("i,tij,j->t", np.conj(ub), vals, ua)
            mmin = int(ka.min() - kb.max())
            mmax = int(ka.max() - kb.min())
            ms = np.arange(mmin, mmax + 1)
            freqs = (nu_a - nu_b) + step * ms
            ws = w * s / T
            ghat = np.empty(ms.shape[0], dtype=complex)
            for lo in range(0, ms.shape[0], 256):   # bound the phase matrix
                hi = min(lo + 256, ms.shape[0])
                ghat[lo:hi] = np.exp(1j * np.outer(freqs[lo:hi], x)) @ ws
            rel = ka[None, :] - kb[:, None] - mmin
            B[np.ix_(idx_b, idx_a)] = ghat[rel]
    return B


def assemble(opkind: str, D: CoeffPath, b: BoundaryData, cutoff: float,
             nu: complex = 0.0, D0: CoeffPath | None = None,
             flow0: Flow | None = None, panels=None,
             order: int = 10) -> TruncatedOperator:
    """Build the dense section of one of the supported operators.

    resolvent_base : (D + P0 - nu) (d/dt + P0)^{-1}
    mult_resolvent : D (d/dt + P0)^{-1}
    F              : D (d/dt - D0 + nu)^{-1}, truncate-then-invert

    For ``F`` the base operator d/dt - D0 + nu must be invertible; when a
    base flow is supplied this is checked through
    det(S gamma_{D0}(T) e^{-nu T} - I) != 0.
    """
    if opkind not in OPKINDS:
        raise ValueError(f"unknown opkind {opkind!r}")
    modes = ddt_spectrum(b, cutoff)
    d = len(modes)
    lam = np.array([m.lam for m in modes])
    delta = np.array([1.0 if m.is_kernel else 0.0 for m in modes])
    BD = _mult_matrix(D, b, modes, panels, order)

    if opkind in ("resolvent_base", "mult_resolvent"):
        A = BD.copy()
        if opkind == "resolvent_base":
            A[np.diag_indices(d)] += delta - nu
        A /= (lam + delta)[None, :]
        return TruncatedOperator(modes, A, meta=f"{opkind} nu={nu}")

    if flow0 is not None:
        SgT = np.exp(-nu * b.T) * (b.S @ flow0.monodromy_raw)
        scale = max(1.0, np.linalg.norm(SgT, 2)) ** b.n
        if abs(np.linalg.det(SgT - np.eye(b.n))) <= 1e-12 * scale:
            raise SingularShift("d/dt - D0 + nu is not invertible")
    B0 = _mult_matrix(D0, b, modes, panels, order) if D0 is not None \
        else np.zeros((d, d), dtype=complex)
    L = np.diag(lam + nu) - B0
    try:
        F = np.linalg.solve(L.T, BD.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularTruncation(str(exc)) from exc
    if not np.all(np.isfinite(F)):
        raise SingularTruncation("non-finite entries after inversion")
    return TruncatedOperator(modes, F, meta=f"F nu={nu}")


def conditional_trace_from_integral(Dint: np.ndarray, b: BoundaryData) -> complex:
    """Conditional trace of D (d/dt + P0)^{-1} given Dint = int_0^T D dt.

    Kernel branches contribute (1/T) int Dhat_jj dt; each non-kernel branch
    contributes the principal-value series sum_k 1/(i (nu_j + 2k pi/T)),
    which equals -(i/2) cot(theta_j / 2) per unit of int Dhat_jj dt and is
    exactly zero at theta_j = pi.
    """
    dhat_diag = np.einsum("ij,jk,ki->i", np.conj(b.U.T), Dint, b.U)
    total = complex(np.sum(dhat_diag[: b.k0])) / b.T
    for j in range(b.k0, b.n):
        th = b.thetas[j]
        if abs(th - np.pi) < 1e-14:
            continue
        total += -0.5j / np.tan(0.5 * th) * dhat_diag[j]
    return complex(total)


def conditional_trace_closed(D: CoeffPath, b: BoundaryData) -> complex:
    return conditional_trace_from_integral(D.integral(), b)


def conditional_trace_truncated(top: TruncatedOperator) -> complex:
    """Trace of the section; requires a symmetric magnitude cutoff."""
    if not spectrum_is_symmetric(top.modes):
        raise AsymmetricCutoff("mode set is not symmetric under mu -> -mu")
    return complex(np.trace(top.matrix))


def power_traces(top: TruncatedOperator, m_max: int) -> list[complex]:
    """[Tr F, Tr F^2, ..., Tr F^m_max] of the section."""
    traces = []
    P = np.eye(top.dim, dtype=complex)
    for _ in range(m_max):
        P = P @ top.matrix
        traces.append(complex(np.trace(P)))
    return traces


def conditional_det(D: CoeffPath, b: BoundaryData, nu: complex,
                    schedule, method: str = "plain_truncation",
                    panels=None, order: int = 10) -> DetResult:
    """det[(d/dt - D + nu)(d/dt + P0)^{-1}] along a cutoff schedule.

    plain_truncation evaluates det(I - A_N) by LU in log form and
    extrapolates in 1/Lambda.  det2_times_trace splits off the regularized
    determinant det((I - A_N) e^{A_N}) and restores the trace factor from
    the closed-form conditional trace, exploiting that the two factors
    converge separately.
    """
    schedule = list(schedule)
    if sorted(schedule) != schedule or len(set(schedule)) != len(schedule):
        raise ValueError("schedule must be strictly increasing")
    if method not in ("plain_truncation", "det2_times_trace"):
        raise ValueError(f"unknown method {method!r}")

    shift_int = D.integral() - nu * b.T * np.eye(b.n)
    trace_limit = conditional_trace_from_integral(shift_int, b) + b.k0

    values = []
    for lam in schedule:
        top = assemble("resolvent_base", D, b, lam, nu=nu,
                       panels=panels, order=order)
        A = top.matrix
        sign, logabs = np.linalg.slogdet(np.eye(top.dim) - A)
        logdet = np.log(sign) + logabs
        if method == "plain_truncation":
            values.append(complex(np.exp(logdet)))
        else:
            logdet2 = logdet + np.trace(A)
            values.append(complex(np.exp(logdet2 - trace_limit)))

    extrapolated, err = richardson(values, schedule)
    diffs = [abs(v1 - v0) for v0, v1 in zip(values, values[1:])]
    if len(diffs) >= 2 and diffs[-1] > diffs[0] and \
            diffs[-1] > 1e-13 * (1.0 + abs(values[-1])):
        raise NonConvergent("successive cutoff differences do not decrease")

    v = values[-1]
    log_value = complex(np.log(abs(v)) + 1j * np.angle(v)) if v != 0 else complex("-inf")
    return DetResult(value=v, log_value=log_value, method=method,
                     cutoffs=schedule, extrapolated=extrapolated,
                     error_estimate=float(err), values=values)


def plemelj_coefficients(traces) -> complex:
    """Taylor coefficient a_m of det(id + alpha F) from Tr F^1..Tr F^m.

    a_m is the m x m determinant with Tr(F^{i-j+1}) below and on the
    diagonal and the integers m-1, m-2, ..., 1 on the superdiagonal.
    """
    traces = list(traces)
    m = len(traces)
    if m < 1:
        raise ValueError("need at least Tr F")
    A = np.zeros((m, m), dtype=complex)
    for i in range(m):
        if i + 1 < m:
            A[i, i + 1] = m - 1 - i
        for j in range(i + 1):
            A[i, j] = traces[i - j]
    return complex(np.linalg.det(A))
