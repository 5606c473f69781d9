"""Both sides of the Hill-type determinant identity and the quotient form.

The identity connects the conditional determinant of
(d/dt - D + nu)(d/dt + P0)^{-1} with a finite monodromy determinant:

    (-1)^n |C(S)| exp(-n nu T / 2) exp(-(1/2) int tr D dt)
        * det(S gamma_D(T) - exp(nu T) I).

Zeros of either side in nu locate Floquet multipliers of S gamma_D(T).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryData
from .errors import SingularDenominator
from .fredholm import DetResult, conditional_det
from .paths import CoeffPath
from .propagator import Flow, fundamental_solution

REL_FLOOR = 1e-300


@dataclass(frozen=True)
class HillReport:
    """Result of one two-sided verification run."""

    lhs: DetResult
    rhs: complex
    rel_error: float
    tol: float
    passed: bool
    singular: bool
    inputs_digest: str


def inputs_digest(D: CoeffPath, b: BoundaryData, nu: complex, schedule) -> str:
    """Stable short identifier of (D, S, T, nu, schedule)."""
    h = hashlib.sha256()
    h.update(D.kind.encode())
    h.update(np.asarray([D.n, D.T], dtype=float).tobytes())
    if D.kind == "trigpoly":
        for part in D.data:
            h.update(np.ascontiguousarray(part).tobytes())
    elif D.data is not None:
        h.update(np.ascontiguousarray(D.data).tobytes())
    h.update(np.ascontiguousarray(b.S).tobytes())
    h.update(np.asarray([b.T, nu.real, nu.imag], dtype=float).tobytes())
    h.update(np.asarray(schedule, dtype=float).tobytes())
    return h.hexdigest()[:16]


def hill_rhs(flowD: Flow, b: BoundaryData, nu: complex) -> complex:
    """Monodromy side of the identity.

    A zero return is legitimate: it signals exp(nu T) in the spectrum of
    S gamma_D(T).
    """
    # the two equivalent sign conventions must agree for a valid boundary
    n, k0 = b.n, b.k0
    assert (-1.0) ** k0 * b.c_of_s == (-1.0) ** n * b.abs_c_of_s
    T = b.T
    M = b.S @ flowD.monodromy_raw
    pref = (-1.0) ** n * b.abs_c_of_s * np.exp(-n * nu * T / 2.0) \
        * np.exp(-0.5 * flowD.source.trace_integral())
    return complex(pref * np.linalg.det(M - np.exp(nu * T) * np.eye(n)))


def _rhs_scale(flowD: Flow, b: BoundaryData, nu: complex) -> float:
    M = b.S @ flowD.monodromy_raw
    pref = b.abs_c_of_s * abs(np.exp(-b.n * nu * b.T / 2.0)) \
        * abs(np.exp(-0.5 * flowD.source.trace_integral()))
    return pref * (np.linalg.norm(M, 2) + abs(np.exp(nu * b.T))) ** b.n


def hill_verify(D: CoeffPath, b: BoundaryData, nu: complex, schedule,
                method: str = "plain_truncation", panels=None,
                order: int = 10) -> HillReport:
    """Compute both sides independently and compare.

    Verification passes when the relative error is below
    max(5e-3, 3 * extrapolation error); when both sides vanish together
    (a multiplier sits exactly at exp(nu T)) absolute values are compared
    instead and the report is flagged singular.
    """
    nu = complex(nu)
    flowD = fundamental_solution(D)
    rhs = hill_rhs(flowD, b, nu)
    lhs = conditional_det(D, b, nu, schedule, method=method,
                          panels=panels, order=order)
    rel_error = abs(lhs.extrapolated - rhs) / max(abs(rhs), REL_FLOOR)
    scale = _rhs_scale(flowD, b, nu)
    singular = abs(rhs) < 1e-6 * max(scale, 1e-30)
    tol = max(5e-3, 3.0 * lhs.error_estimate / max(abs(rhs), REL_FLOOR))
    if singular:
        passed = abs(lhs.extrapolated - rhs) <= max(1e-4 * max(scale, 1.0),
                                                    3.0 * lhs.error_estimate)
    else:
        passed = rel_error <= tol
    return HillReport(lhs=lhs, rhs=rhs, rel_error=float(rel_error),
                      tol=float(tol), passed=bool(passed), singular=singular,
                      inputs_digest=inputs_digest(D, b, nu, schedule))


def det_quotient(D1: CoeffPath, D: CoeffPath, b: BoundaryData,
                 nu: complex) -> complex:
    """det[(d/dt - D1 + nu)(d/dt - D)^{-1}] in closed monodromy form.

    Equals exp(-n nu T/2) exp(-(1/2) int tr(D1 - D) dt)
    det(S gamma_{D1}(T) - exp(nu T) I) / det(S gamma_D(T) - I); requires
    d/dt - D invertible, i.e. det(S gamma_D(T) - I) != 0.
    """
    nu = complex(nu)
    T = b.T
    fl1 = fundamental_solution(D1)
    fl = fundamental_solution(D)
    Mden = b.S @ fl.monodromy_raw
    den = np.linalg.det(Mden - np.eye(b.n))
    scale = max(1.0, np.linalg.norm(Mden, 2)) ** b.n
    if abs(den) <= 1e-12 * scale:
        raise SingularDenominator("det(S gamma_D(T) - I) vanishes")
    M1 = b.S @ fl1.monodromy_raw
    num = np.linalg.det(M1 - np.exp(nu * T) * np.eye(b.n))
    pref = np.exp(-b.n * nu * T / 2.0) \
        * np.exp(-0.5 * (D1.trace_integral() - D.trace_integral()))
    return complex(pref * num / den)
