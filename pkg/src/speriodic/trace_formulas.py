"""Power traces Tr(F^m) of F = D (d/dt - D0 + nu)^{-1}: closed formulas,
independent quadrature oracles, and the boundary-eigenvalue route.

The closed route expresses Tr(F^m) through finitely many matrix traces of
G_k = M_k M (M - e^{nu T} I)^{-1} built from the time-ordered integrals M_k
and the monodromy M = S gamma_0(T):

    Tr(F)   = (1/2) int tr D dt - Tr(G_1),
    Tr(F^m) = m sum_{k=1}^m ((-1)^k / k) sum_{j_1+..+j_k=m} Tr(G_{j_1}..G_{j_k}).

The oracle route integrates the cyclic kernel trace of the resolvent Green
kernel by tensor-product Gauss quadrature, resolving the kernel jump along
panel-aligned simplices.  The eigenvalue route sums 1/alpha^m over boundary
eigenvalues located by the argument principle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._quad import gauss_rule, panel_nodes, richardson
from .boundary import BoundaryData
from .errors import (ContourThroughZero, InsufficientOrder, NonIntegerWinding,
                     SingularShift)
from .fredholm import assemble, power_traces
from .paths import CoeffPath
from .propagator import (Flow, IteratedIntegrals, fundamental_solution,
                         green_kernel, iterated_integrals, monodromies_batch,
                         monodromy)

# ---------------------------------------------------------------------------
# G factors and composition sums


@dataclass(frozen=True)
class GFactors:
    """Products M_k M (M - lambda I)^{-1} feeding the trace formulas."""

    M: np.ndarray
    lam: complex           # e^{nu T}
    Gs: list
    T: float

    @property
    def order(self) -> int:
        return len(self.Gs)


def _shift_scale(M: np.ndarray, lam: complex) -> float:
    n = M.shape[0]
    return (np.linalg.norm(M, 2) + abs(lam)) ** n


def g_factors(mk: IteratedIntegrals, M: np.ndarray, nu: complex,
              check_cyclic: bool = False) -> GFactors:
    """Build G_1..G_K; SingularShift when e^{nu T} is a Floquet multiplier."""
    T = mk.base_flow.T
    lam = complex(np.exp(complex(nu) * T))
    n = M.shape[0]
    shifted = M - lam * np.eye(n)
    if abs(np.linalg.det(shifted)) <= 1e-12 * max(1.0, _shift_scale(M, lam)):
        raise SingularShift("e^{nu T} is in the spectrum of S gamma_0(T)")
    W = M @ np.linalg.inv(shifted)
    Gs = [Mk @ W for Mk in mk.Ms]
    if check_cyclic:
        # the two factor orderings are trace-equivalent by cyclicity
        alt = [np.linalg.inv(shifted) @ M @ Mk for Mk in mk.Ms]
        for a in range(len(Gs)):
            for c in range(len(Gs)):
                t1 = np.trace(Gs[a] @ Gs[c])
                t2 = np.trace(alt[a] @ alt[c])
                assert abs(t1 - t2) <= 1e-12 * (1 + abs(t1))
    return GFactors(M=M, lam=lam, Gs=Gs, T=T)


@lru_cache(maxsize=None)
def compositions(m: int) -> tuple:
    """All ordered tuples of positive integers summing to m (2^(m-1) many)."""
    out = []
    for mask in range(1 << (m - 1)):
        parts, prev = [], 0
        for pos in range(1, m):
            if mask & (1 << (pos - 1)):
                parts.append(pos - prev)
                prev = pos
        parts.append(m - prev)
        out.append(tuple(parts))
    return tuple(out)


def _composition_sums(g: GFactors, m: int) -> dict:
    """k -> sum over compositions of m into k parts of Tr(G_{j1}..G_{jk})."""
    if g.order < m:
        raise InsufficientOrder(f"need G up to order {m}, have {g.order}")
    sums: dict[int, complex] = {}
    for comp in compositions(m):
        P = g.Gs[comp[0] - 1]
        for j in comp[1:]:
            P = P @ g.Gs[j - 1]
        sums[len(comp)] = sums.get(len(comp), 0.0) + complex(np.trace(P))
    return sums


def trace_formula(g: GFactors, m: int, D: CoeffPath) -> complex:
    """Tr(F^m) via the closed composition sums (conditional trace at m=1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        if g.order < 1:
            raise InsufficientOrder("need G_1")
        return complex(0.5 * D.trace_integral() - np.trace(g.Gs[0]))
    sums = _composition_sums(g, m)
    return complex(m * sum((-1.0) ** k / k * s for k, s in sums.items()))


def taylor_cm(g: GFactors, m: int) -> complex:
    """m-th Taylor coefficient of log det(S gamma_alpha(T) - lambda I)."""
    sums = _composition_sums(g, m)
    return complex(sum((-1.0) ** (k + 1) / k * s for k, s in sums.items()))


# ---------------------------------------------------------------------------
# Closed forms at low order and the free-resolvent reductions


def _w_factor(M: np.ndarray, lam: complex) -> np.ndarray:
    n = M.shape[0]
    shifted = M - lam * np.eye(n)
    if abs(np.linalg.det(shifted)) <= 1e-12 * max(1.0, _shift_scale(M, lam)):
        raise SingularShift("e^{nu T} is in the spectrum of the monodromy")
    return M @ np.linalg.inv(shifted)


def trace_closed_m1(D: CoeffPath, flow0: Flow, b: BoundaryData, nu: complex,
                    mk: IteratedIntegrals | None = None) -> complex:
    """(1/2) int tr D - Tr(M_1 M (M - e^{nu T})^{-1})."""
    if mk is None:
        mk = iterated_integrals(flow0, D, 1)
    W = _w_factor(monodromy(flow0, b), complex(np.exp(complex(nu) * b.T)))
    return complex(0.5 * D.trace_integral() - np.trace(mk.Ms[0] @ W))


def trace_closed_m2(D: CoeffPath, flow0: Flow, b: BoundaryData, nu: complex,
                    mk: IteratedIntegrals | None = None) -> complex:
    """-2 Tr(M_2 W) + Tr((M_1 W)^2) with W = M (M - e^{nu T})^{-1}."""
    if mk is None:
        mk = iterated_integrals(flow0, D, 2)
    W = _w_factor(monodromy(flow0, b), complex(np.exp(complex(nu) * b.T)))
    G1 = mk.Ms[0] @ W
    return complex(-2.0 * np.trace(mk.Ms[1] @ W) + np.trace(G1 @ G1))


def trace_free_resolvent(D: CoeffPath, b: BoundaryData, nu: complex) -> complex:
    """Conditional trace of D (d/dt + nu)^{-1}:
    -(1/2) Tr[int D dt (S + e^{nu T})(S - e^{nu T})^{-1}]."""
    om = complex(np.exp(complex(nu) * b.T))
    S = b.S
    if abs(np.linalg.det(S - om * np.eye(b.n))) <= 1e-12 * (1 + abs(om)) ** b.n:
        raise SingularShift("e^{nu T} is in the spectrum of S")
    arg = D.integral() @ (S + om * np.eye(b.n)) @ np.linalg.inv(S - om * np.eye(b.n))
    return complex(-0.5 * np.trace(arg))


def trace_free_resolvent2(D: CoeffPath, b: BoundaryData, nu: complex) -> complex:
    """nu-derivative of the free-resolvent trace:
    -T e^{nu T} Tr[int D dt S (S - e^{nu T})^{-2}]."""
    om = complex(np.exp(complex(nu) * b.T))
    S = b.S
    if abs(np.linalg.det(S - om * np.eye(b.n))) <= 1e-12 * (1 + abs(om)) ** b.n:
        raise SingularShift("e^{nu T} is in the spectrum of S")
    inv = np.linalg.inv(S - om * np.eye(b.n))
    return complex(-b.T * om * np.trace(D.integral() @ S @ inv @ inv))


# ---------------------------------------------------------------------------
# Kernel-quadrature oracle


def _dhat_at(D: CoeffPath, flow0: Flow, ts: np.ndarray) -> np.ndarray:
    return flow0.gamma_inv(ts) @ D(ts) @ flow0.gamma(ts)


def kernel_trace_oracle(D: CoeffPath, flow0: Flow, b: BoundaryData,
                        nu: complex, m: int, panels: int = 24,
                        order: int = 8) -> complex:
    """Tr(F^m) by m-fold Gauss quadrature of the cyclic kernel trace
    int..int tr(D(t1) K(t1,t2) D(t2) .. K(t_m,t1)) dt_1..dt_m.

    The kernel K(t,s) = gamma(t)(Q + [s<t] I) gamma(s)^{-1} is smooth on
    either side of each diagonal t_i = t_{i+1}; cells of the tensor-product
    panel grid that meet a diagonal are reduced to ordered simplices with
    fresh interior Gauss nodes.  Supported orders: m = 2 and m = 3.
    """
    if m not in (2, 3):
        raise ValueError("kernel oracle supports m = 2 or 3")
    gk = green_kernel(flow0, b, nu)
    Q = gk.Q
    n = b.n
    QI = Q + np.eye(n)

    # panel grid and weighted conjugated path values
    T = flow0.T
    x, w, edges = panel_nodes(0.0, T, panels, order)
    A = (w[:, None, None] * _dhat_at(D, flow0, x)).reshape(panels, order, n, n)
    B = A.sum(axis=1)                                       # (P, n, n)

    def prefix(mats):
        out = np.zeros_like(mats)
        out[1:] = np.cumsum(mats, axis=0)[:-1]
        return out

    def suffix(mats):
        out = np.zeros_like(mats)
        out[:-1] = np.cumsum(mats[::-1], axis=0)[::-1][1:]
        return out

    pre, suf = prefix(B), suffix(B)

    # same-panel pair objects: fresh inner nodes on [a_p, t_i]
    xg, wg = gauss_rule(order)
    a_p = edges[:-1]
    t_out = x.reshape(panels, order)
    hw = 0.5 * (edges[1] - edges[0]) * wg                   # outer weights
    half = 0.5 * (t_out - a_p[:, None])                     # (P, q)
    inner_nodes = a_p[:, None, None] + half[:, :, None] * (xg + 1.0)
    dh_outer = _dhat_at(D, flow0, t_out.ravel()).reshape(panels, order, n, n)
    dh_inner = _dhat_at(D, flow0, inner_nodes.ravel()).reshape(
        panels, order, order, n, n)
    inner_int = np.einsum("q,pi,piqjk->pijk", wg, half, dh_inner)
    tri_qi = np.einsum("i,pijk,kl,pilm->pjm", hw, dh_outer, QI, inner_int)
    tri_q = np.einsum("i,pijk,kl,pilm->pjm", hw, inner_int, Q, dh_outer)
    pair = tri_qi + tri_q

    if m == 2:
        off = np.einsum("pij,jk,pkl,li->", B, QI, pre, Q) \
            + np.einsum("pij,jk,pkl,li->", B, Q, suf, QI)
        diag = np.einsum("pii->", tri_qi @ Q) + np.einsum("pii->", tri_q @ QI)
        return complex(off + diag)

    total = 0.0 + 0.0j

    # strict panel orderings (six regions, constants Q + sigma I)
    J = np.einsum("pij,jk,pkl->pil", B, QI, pre)
    total += np.einsum("pij,jk,pkl,li->", B, QI, prefix(J), Q)   # p1>p2>p3
    Wm = np.einsum("pij,jk,pkl->pil", pre, Q, B)
    total += np.einsum("pij,jk,pkl,li->", B, QI, prefix(Wm), Q)  # p2<p3<p1
    total += np.einsum("pij,jk,pkl,lm,pmr,ri->",
                       B, Q, suf, QI, pre, Q)                    # p3<p1<p2
    U = np.einsum("pij,jk,pkl->pil", suf, QI, B)
    total += np.einsum("pij,jk,pkl,li->", B, Q, suffix(U), QI)   # p1<p3<p2
    total += np.einsum("pij,jk,pkl,lm,pmr,ri->",
                       B, QI, pre, Q, suf, QI)                   # p2<p1<p3
    Y = np.einsum("pij,jk,pkl->pil", B, Q, suf)
    total += np.einsum("pij,jk,pkl,li->", B, Q, suffix(Y), QI)   # p1<p2<p3

    # exactly two times share a panel: the three cyclic patterns coincide
    shared2 = np.einsum("pij,jk,pkl,li->", pair, QI, pre, Q) \
        + np.einsum("pij,jk,pkl,li->", pair, Q, suf, QI)
    total += 3.0 * shared2

    # all three in one panel: two cyclic classes of ordered simplices
    half2 = 0.5 * (inner_nodes - a_p[:, None, None])        # (P, q, q)
    deep = a_p[:, None, None, None] + half2[..., None] * (xg + 1.0)
    dh_deep = _dhat_at(D, flow0, deep.ravel()).reshape(
        panels, order, order, order, n, n)
    csum = np.einsum("r,piq,piqrjk->piqjk", wg, half2, dh_deep)
    # S1: tr(Dh_a (Q+I) Dh_b (Q+I) Dh_c Q) over a > b > c in one panel
    mid1 = np.einsum("q,pi,piqjk,kl,piqlm->pijm", wg, half, dh_inner, QI, csum)
    s1 = np.einsum("i,pijk,kl,pilm,mj->", hw, dh_outer, QI, mid1, Q)
    # S2: tr(Dh_a (Q+I) Dh_c Q Dh_b Q) over a > b > c in one panel
    mid2 = np.einsum("q,pi,piqjk,kl,piqlm->pijm", wg, half, csum, Q, dh_inner)
    s2 = np.einsum("i,pijk,kl,pilm,mj->", hw, dh_outer, QI, mid2, Q)
    total += 3.0 * (s1 + s2)
    return complex(total)


# ---------------------------------------------------------------------------
# Boundary eigenvalues by the argument principle


@dataclass(frozen=True)
class BvpEigs:
    """Eigenvalues alpha of z' = (D0 + alpha D) z, z(0) = S z(T) in a disk."""

    contour: tuple
    count: int
    roots: np.ndarray
    multiplicities: list
    residuals: np.ndarray
    scale: float


class _DetFunction:
    """f(alpha) = det(S gamma_alpha(T) - I) with batched evaluation."""

    def __init__(self, D0, D, b, rtol=1e-10):
        self.D0 = D0
        self.D = D
        self.b = b
        self.rtol = rtol
        self.evals = 0

    def __call__(self, alphas) -> np.ndarray:
        alphas = np.asarray(alphas, dtype=complex).ravel()
        self.evals += alphas.size
        gammas = monodromies_batch(self.D0, self.D, alphas, rtol=self.rtol)
        mats = self.b.S[None] @ gammas - np.eye(self.b.n)[None]
        return np.linalg.det(mats)

    def with_derivative(self, alphas):
        alphas = np.asarray(alphas, dtype=complex).ravel()
        h = 1e-6 * (1.0 + np.abs(alphas))
        vals = self(np.concatenate([alphas, alphas + h, alphas - h]))
        k = alphas.shape[0]
        return vals[:k], (vals[k:2 * k] - vals[2 * k:]) / (2.0 * h)


def _circle_winding(fd: _DetFunction, center, radius, nodes=256):
    th = 2.0 * np.pi * np.arange(nodes) / nodes
    f, fp = fd.with_derivative(center + radius * np.exp(1j * th))
    if np.min(np.abs(f)) < 1e-12 * np.max(np.abs(f)):
        raise ContourThroughZero("|f| nearly vanishes on the contour")
    w = radius / nodes * np.sum(fp / f * np.exp(1j * th))
    return w, float(np.max(np.abs(f)))


def _rect_moments(fd: _DetFunction, cx, cy, hx, hy, pmax, order=32):
    """Moments (1/2pi i) oint alpha^p f'/f over a rectangle boundary."""
    xg, wg = gauss_rule(order)
    corners = [complex(cx - hx, cy - hy), complex(cx + hx, cy - hy),
               complex(cx + hx, cy + hy), complex(cx - hx, cy + hy)]
    alphas, dzs = [], []
    for a0, a1 in zip(corners, corners[1:] + corners[:1]):
        mid, hl = 0.5 * (a0 + a1), 0.5 * (a1 - a0)
        alphas.append(mid + hl * xg)
        dzs.append(hl * wg)
    alphas = np.concatenate(alphas)
    dzs = np.concatenate(dzs)
    f, fp = fd.with_derivative(alphas)
    if np.min(np.abs(f)) < 1e-12 * max(np.max(np.abs(f)), 1e-300):
        raise ContourThroughZero("rectangle edge passes too close to a zero")
    base = fp / f * dzs / (2j * np.pi)
    return np.array([np.sum(base * alphas**p) for p in range(pmax + 1)])


def _roots_from_moments(moments) -> np.ndarray:
    """Newton identities: power sums -> monic polynomial -> root estimates."""
    count = int(round(moments[0].real))
    if count == 0:
        return np.zeros(0, dtype=complex)
    p = moments[1:count + 1]
    e = np.zeros(count + 1, dtype=complex)
    e[0] = 1.0
    for k in range(1, count + 1):
        acc = 0.0 + 0.0j
        for i in range(1, k + 1):
            acc += (-1.0) ** (i - 1) * e[k - i] * p[i - 1]
        e[k] = acc / k
    coeffs = [(-1.0) ** k * e[k] for k in range(count + 1)]
    return np.roots(coeffs)


def _collect_roots(fd, cx, cy, hx, hy, max_leaf, depth=0):
    moments = _rect_moments(fd, cx, cy, hx, hy, 0, order=16)
    w = moments[0]
    count = int(round(w.real))
    if abs(w - count) > 1e-3:
        moments = _rect_moments(fd, cx, cy, hx, hy, 0, order=48)
        w = moments[0]
        count = int(round(w.real))
        if abs(w - count) > 1e-3:
            raise NonIntegerWinding(f"rectangle winding {w}")
    if count == 0:
        return []
    if count <= max_leaf or depth >= 12:
        mom = _rect_moments(fd, cx, cy, hx, hy, count)
        if abs(mom[0] - count) > 1e-3:
            raise NonIntegerWinding("moment count drifted")
        return list(_roots_from_moments(mom))
    # split at a jittered interior cross when an edge would hit a zero
    for frac in (0.5, 0.531, 0.462, 0.577):
        xs = cx - hx + 2 * hx * frac
        ys = cy - hy + 2 * hy * frac
        quads = [(0.5 * (cx - hx + xs), 0.5 * (cy - hy + ys),
                  0.5 * (xs - cx + hx), 0.5 * (ys - cy + hy)),
                 (0.5 * (xs + cx + hx), 0.5 * (cy - hy + ys),
                  0.5 * (cx + hx - xs), 0.5 * (ys - cy + hy)),
                 (0.5 * (cx - hx + xs), 0.5 * (ys + cy + hy),
                  0.5 * (xs - cx + hx), 0.5 * (cy + hy - ys)),
                 (0.5 * (xs + cx + hx), 0.5 * (ys + cy + hy),
                  0.5 * (cx + hx - xs), 0.5 * (cy + hy - ys))]
        try:
            roots = []
            for (qx, qy, qhx, qhy) in quads:
                roots += _collect_roots(fd, qx, qy, qhx, qhy, max_leaf,
                                        depth + 1)
            return roots
        except ContourThroughZero:
            continue
    raise ContourThroughZero("no clean subdivision found")


def _local_winding(fd, center, radius, nodes=64) -> int:
    th = 2.0 * np.pi * np.arange(nodes) / nodes
    f, fp = fd.with_derivative(center + radius * np.exp(1j * th))
    w = radius / nodes * np.sum(fp / f * np.exp(1j * th))
    k = int(round(w.real))
    if abs(w - k) > 1e-2:
        raise NonIntegerWinding(f"local winding {w} not integral")
    return k


def bvp_eigenvalues(D0: CoeffPath | None, D: CoeffPath, b: BoundaryData,
                    contour: tuple, max_leaf: int = 5,
                    rtol: float = 1e-10) -> BvpEigs:
    """Count and locate eigenvalues of (D0 + alpha D) inside a disk.

    Counting integrates f'/f over the circle (trapezoid, spectrally accurate
    for the periodic integrand); localization recurses over a quadtree of
    rectangles with per-leaf moment extraction, then Newton refinement and
    local-winding multiplicity assignment.
    """
    center, radius = complex(contour[0]), float(contour[1])
    fd = _DetFunction(D0, D, b, rtol=rtol)
    try:
        w, scale = _circle_winding(fd, center, radius)
    except ContourThroughZero:
        radius *= 1.003
        w, scale = _circle_winding(fd, center, radius)
    count = int(round(w.real))
    if abs(w - count) > 1e-3:
        w, scale = _circle_winding(fd, center, radius, nodes=1024)
        count = int(round(w.real))
        if abs(w - count) > 1e-3:
            raise NonIntegerWinding(f"disk winding {w}")
    if count == 0:
        return BvpEigs(contour=(center, radius), count=0,
                       roots=np.zeros(0, complex), multiplicities=[],
                       residuals=np.zeros(0), scale=scale)

    raw = np.array(_collect_roots(fd, center.real, center.imag,
                                  radius, radius, max_leaf), dtype=complex)

    # Newton refinement with damped steps, batched over all candidates
    z = raw.copy()
    for _ in range(60):
        f, fp = fd.with_derivative(z)
        if np.max(np.abs(f)) < 1e-12 * scale:
            break
        step = f / fp
        big = np.abs(step) > 0.1 * (1.0 + np.abs(z))
        step[big] *= 0.1 * (1.0 + np.abs(z[big])) / np.abs(step[big])
        z = z - step

    # cluster nearby refinements; multiplicity candidates = cluster sizes
    reps: list[complex] = []
    mults: list[int] = []
    for zi in sorted(z, key=lambda v: (v.real, v.imag)):
        for r_i, rep in enumerate(reps):
            if abs(zi - rep) < 1e-5 * (1.0 + abs(rep)):
                reps[r_i] = (rep * mults[r_i] + zi) / (mults[r_i] + 1)
                mults[r_i] += 1
                break
        else:
            reps.append(zi)
            mults.append(1)

    # confirm multiplicities by local winding where neighborhoods are clean
    final_mults = []
    for r_i, rep in enumerate(reps):
        rad = 1e-3 * (1.0 + abs(rep))
        others = [abs(rep - o) for o_i, o in enumerate(reps) if o_i != r_i]
        if others:
            rad = min(rad, 0.3 * min(others))
        try:
            final_mults.append(_local_winding(fd, rep, rad))
        except NonIntegerWinding:
            final_mults.append(mults[r_i])

    reps_arr = np.array(reps, dtype=complex)
    inside = np.abs(reps_arr - center) <= radius * (1.0 + 1e-9)
    reps_arr = reps_arr[inside]
    final_mults = [mm for mm, keep in zip(final_mults, inside) if keep]
    residuals = np.abs(fd(reps_arr)) if reps_arr.size else np.zeros(0)
    if int(sum(final_mults)) != count:
        raise NonIntegerWinding(
            f"located multiplicity {sum(final_mults)} != disk count {count}")
    return BvpEigs(contour=(center, radius), count=count, roots=reps_arr,
                   multiplicities=final_mults, residuals=residuals,
                   scale=scale)


def smallest_singular_values(eigs: BvpEigs, D0, D, b) -> np.ndarray:
    """sigma_min(S gamma_alpha(T) - I) at each located root."""
    if eigs.roots.size == 0:
        return np.zeros(0)
    gammas = monodromies_batch(D0, D, eigs.roots)
    mats = b.S[None] @ gammas - np.eye(b.n)[None]
    return np.array([np.linalg.svd(mm, compute_uv=False)[-1] for mm in mats])


def eigen_sum(eigs: BvpEigs, m: int) -> tuple[complex, float]:
    """Partial power sum sum mult / alpha^m with a spacing-based tail bound.

    The tail model fits |alpha_j| ~ c j^p on the sorted magnitudes; the
    bound integrates the fitted decay beyond the found range (x1.5 safety).
    m = 1 is admitted only for super-linear growth (p >= 1.5), where the
    full sum converges absolutely.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    mags = np.sort(np.repeat(np.abs(eigs.roots), eigs.multiplicities))
    J = mags.size
    value = complex(sum(mult / alpha**m
                        for alpha, mult in zip(eigs.roots, eigs.multiplicities)))
    if J < 4:
        return value, float("inf")
    js = np.arange(1, J + 1)
    top = slice(J // 2, J)
    p_hat, logc = np.polyfit(np.log(js[top]), np.log(mags[top]), 1)
    c_hat = np.exp(logc)
    if m == 1 and p_hat < 1.5:
        raise ValueError("m = 1 sums require super-linear eigenvalue growth")
    pm = p_hat * m
    if pm <= 1.0:
        return value, float("inf")
    tail = c_hat ** (-m) * J ** (1.0 - pm) / (pm - 1.0)
    return value, float(1.5 * tail)


# ---------------------------------------------------------------------------
# Multi-method report


@dataclass(frozen=True)
class TraceReport:
    """Values of Tr(F^m) from every applicable method."""

    m: int
    value_formula: complex
    value_truncated: complex
    truncated_error: float
    value_oracle: complex | None = None
    value_eigsum: complex | None = None
    eigsum_tail: float | None = None
    discrepancies: dict = field(default_factory=dict)


def trace_report(D: CoeffPath, b: BoundaryData, nu: complex, m: int,
                 schedule, D0: CoeffPath | None = None, contour=None,
                 oracle_panels: int = 24, oracle_order: int = 8) -> TraceReport:
    """Evaluate Tr(F^m) by every route that applies and cross-tabulate."""
    base = D0 if D0 is not None else CoeffPath.zero(b.n, b.T)
    flow0 = fundamental_solution(base)
    mk = iterated_integrals(flow0, D, max(m, 1))
    g = g_factors(mk, monodromy(flow0, b), nu)
    v_formula = trace_formula(g, m, D)

    vals = []
    for lam in schedule:
        top = assemble("F", D, b, lam, nu=nu, D0=D0, flow0=flow0)
        vals.append(power_traces(top, m)[m - 1])
    v_trunc, err = richardson(vals, list(schedule))

    v_oracle = None
    if m in (2, 3):
        v_oracle = kernel_trace_oracle(D, flow0, b, nu, m,
                                       panels=oracle_panels,
                                       order=oracle_order)
    v_eig, tail = None, None
    if contour is not None:
        shifted = base.minus_constant(complex(nu) * np.eye(b.n)) \
            if nu else base
        eigs = bvp_eigenvalues(shifted, D, b, contour)
        try:
            v_eig, tail = eigen_sum(eigs, m)
        except ValueError:
            v_eig, tail = None, None

    disc = {"formula_vs_truncated": abs(v_formula - v_trunc)}
    if v_oracle is not None:
        disc["formula_vs_oracle"] = abs(v_formula - v_oracle)
    if v_eig is not None:
        disc["formula_vs_eigsum"] = abs(v_formula - v_eig)
    return TraceReport(m=m, value_formula=v_formula, value_truncated=v_trunc,
                       truncated_error=float(err), value_oracle=v_oracle,
                       value_eigsum=v_eig, eigsum_tail=tail,
                       discrepancies=disc)
