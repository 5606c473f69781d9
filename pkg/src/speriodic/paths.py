"""Time-dependent coefficient matrices D(t) on [0, T].

A path is one of: zero, constant, trigonometric polynomial at the base
frequencies 2*pi*k/T, matrix polynomial in t, or sampled values on a uniform
grid (cubic interpolation; results then carry the interpolation error).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.interpolate import CubicSpline

from ._quad import integrate_path

KINDS = ("zero", "constant", "trigpoly", "poly", "samples")


@dataclass(frozen=True)
class CoeffPath:
    """Continuous n x n matrix-valued coefficient path on [0, T]."""

    kind: str
    n: int
    T: float
    data: Any = None
    _spline: Any = field(default=None, repr=False, compare=False)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n: int, T: float) -> "CoeffPath":
        return cls("zero", n, float(T))

    @classmethod
    def constant(cls, A, T: float) -> "CoeffPath":
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        return cls("constant", A.shape[0], float(T), A)

    @classmethod
    def trigpoly(cls, T: float, const, cos_terms=(), sin_terms=()) -> "CoeffPath":
        """D(t) = const + sum_m cos_terms[m-1] cos(2pi m t/T) + sin_terms[m-1] sin(...)."""
        const = np.atleast_2d(np.asarray(const, dtype=complex))
        n = const.shape[0]
        cos_terms = np.asarray(cos_terms, dtype=complex).reshape(-1, n, n)
        sin_terms = np.asarray(sin_terms, dtype=complex).reshape(-1, n, n)
        deg = max(cos_terms.shape[0], sin_terms.shape[0])
        cos_full = np.zeros((deg, n, n), dtype=complex)
        sin_full = np.zeros((deg, n, n), dtype=complex)
        cos_full[: cos_terms.shape[0]] = cos_terms
        sin_full[: sin_terms.shape[0]] = sin_terms
        return cls("trigpoly", n, float(T), (const, cos_full, sin_full))

    @classmethod
    def poly(cls, T: float, coeffs) -> "CoeffPath":
        """D(t) = sum_j coeffs[j] * t**j."""
        coeffs = np.asarray(coeffs, dtype=complex)
        coeffs = coeffs.reshape(-1, coeffs.shape[-1], coeffs.shape[-1])
        return cls("poly", coeffs.shape[-1], float(T), coeffs)

    @classmethod
    def samples(cls, T: float, values) -> "CoeffPath":
        values = np.asarray(values, dtype=complex)
        values = values.reshape(values.shape[0], values.shape[-1], values.shape[-1])
        if values.shape[0] < 4:
            raise ValueError("samples path needs at least 4 grid values")
        grid = np.linspace(0.0, T, values.shape[0])
        spline = CubicSpline(grid, values, axis=0)
        return cls("samples", values.shape[-1], float(T), values, spline)

    # -- evaluation --------------------------------------------------------

    def __call__(self, t):
        """Evaluate D(t); t may be a scalar or any-shape array.

        Returns shape t.shape + (n, n).
        """
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        ts = np.atleast_1d(t).ravel()
        out = self._eval(ts).reshape(t.shape + (self.n, self.n))
        return out[()] if not scalar else out.reshape(self.n, self.n)

    def _eval(self, ts: np.ndarray) -> np.ndarray:
        m, n = ts.shape[0], self.n
        if self.kind == "zero":
            return np.zeros((m, n, n), dtype=complex)
        if self.kind == "constant":
            return np.broadcast_to(self.data, (m, n, n)).astype(complex)
        if self.kind == "trigpoly":
            const, cos_c, sin_c = self.data
            w = 2.0 * np.pi / self.T
            out = np.broadcast_to(const, (m, n, n)).astype(complex).copy()
            for j in range(cos_c.shape[0]):
                ph = (j + 1) * w * ts
                out += np.cos(ph)[:, None, None] * cos_c[j]
                out += np.sin(ph)[:, None, None] * sin_c[j]
            return out
        if self.kind == "poly":
            out = np.zeros((m, n, n), dtype=complex)
            for j, A in enumerate(self.data):
                out += (ts**j)[:, None, None] * A
            return out
        return np.asarray(self._spline(ts), dtype=complex)

    # -- exact integrals ---------------------------------------------------

    def integral(self) -> np.ndarray:
        """int_0^T D(t) dt, closed form per kind (spline-exact for samples)."""
        n, T = self.n, self.T
        if self.kind == "zero":
            return np.zeros((n, n), dtype=complex)
        if self.kind == "constant":
            return self.data * T
        if self.kind == "trigpoly":
            # harmonics at 2*pi*k/T integrate to zero over a full period
            return self.data[0] * T
        if self.kind == "poly":
            return sum(A * T ** (j + 1) / (j + 1) for j, A in enumerate(self.data))
        return np.asarray(self._spline.integrate(0.0, T), dtype=complex)

    def average(self) -> np.ndarray:
        return self.integral() / self.T

    def trace_integral(self) -> complex:
        return complex(np.trace(self.integral()))

    # -- algebra -----------------------------------------------------------

    def minus_constant(self, C) -> "CoeffPath":
        """Path t -> D(t) - C for a constant matrix C (stays in kind)."""
        C = np.asarray(C, dtype=complex)
        if self.kind == "zero":
            return CoeffPath.constant(-C, self.T)
        if self.kind == "constant":
            return CoeffPath.constant(self.data - C, self.T)
        if self.kind == "trigpoly":
            const, cos_c, sin_c = self.data
            return CoeffPath("trigpoly", self.n, self.T, (const - C, cos_c, sin_c))
        if self.kind == "poly":
            coeffs = self.data.copy()
            coeffs[0] = coeffs[0] - C
            return CoeffPath("poly", self.n, self.T, coeffs)
        return CoeffPath.samples(self.T, self.data - C)

    def cumulative(self) -> "CoeffPath":
        """Antiderivative path A(t) = int_0^t D(s) ds.

        For trigpoly this requires a zero constant term (otherwise the
        antiderivative leaves the trig-polynomial class).
        """
        n, T = self.n, self.T
        if self.kind == "zero":
            return CoeffPath.zero(n, T)
        if self.kind == "constant":
            return CoeffPath.poly(T, [np.zeros((n, n)), self.data])
        if self.kind == "trigpoly":
            const, cos_c, sin_c = self.data
            if np.max(np.abs(const)) > 1e-14 * max(1.0, np.max(np.abs(cos_c), initial=0.0)):
                raise ValueError("cumulative() of a trigpoly needs zero mean")
            w = 2.0 * np.pi / T
            deg = cos_c.shape[0]
            new_cos = np.array([-sin_c[j] / ((j + 1) * w) for j in range(deg)])
            new_sin = np.array([cos_c[j] / ((j + 1) * w) for j in range(deg)])
            # A(0) = 0 fixes the constant term
            c0 = -np.sum(new_cos, axis=0) if deg else np.zeros((n, n), dtype=complex)
            return CoeffPath("trigpoly", n, T, (c0, new_cos, new_sin))
        if self.kind == "poly":
            coeffs = [np.zeros((n, n), dtype=complex)]
            coeffs += [A / (j + 1) for j, A in enumerate(self.data)]
            return CoeffPath("poly", n, T, np.asarray(coeffs))
        anti = self._spline.antiderivative()
        grid = np.linspace(0.0, T, max(4 * self.data.shape[0], 64))
        return CoeffPath.samples(T, np.asarray(anti(grid), dtype=complex))

    def quad_integral(self, f=None, panels: int = 32, order: int = 8):
        """Quadrature of f(D(t)) over [0, T]; f defaults to identity."""
        if f is None:
            return integrate_path(self._eval, 0.0, self.T, panels, order)
        return integrate_path(lambda ts: f(self._eval(ts)), 0.0, self.T, panels, order)
