"""Composite Gauss-Legendre quadrature helpers shared across modules.

All integrands here are smooth on each panel; panel counts are chosen by
callers to resolve oscillation or kink locations.
"""

from __future__ import annotations

import numpy as np

_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the Gauss-Legendre rule on [-1, 1]."""
    rule = _GAUSS_CACHE.get(order)
    if rule is None:
        rule = np.polynomial.legendre.leggauss(order)
        _GAUSS_CACHE[order] = rule
    return rule


def panel_nodes(a: float, b: float, panels: int, order: int):
    """Composite Gauss nodes/weights on [a, b] split into equal panels.

    Returns (x, w, edges) with x, w of shape (panels * order,) and edges of
    shape (panels + 1,).
    """
    xg, wg = gauss_rule(order)
    edges = np.linspace(a, b, panels + 1)
    h = (b - a) / panels
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + 0.5 * h * xg[None, :]).ravel()
    w = np.broadcast_to(0.5 * h * wg[None, :], (panels, order)).ravel()
    return x, w.copy(), edges


def integrate_values(values: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted sum over the leading axis: sum_i w_i * values[i]."""
    return np.tensordot(w, values, axes=(0, 0))


def integrate_path(f, a: float, b: float, panels: int = 32, order: int = 8):
    """Integrate a vectorized matrix/scalar function over [a, b]."""
    x, w, _ = panel_nodes(a, b, panels, order)
    return integrate_values(np.asarray(f(x)), w)


def ordered_double(f, g, T: float, panels: int = 32, order: int = 8):
    """Time-ordered product integral I = int_0^T f(t) @ (int_0^t g(s) ds) dt.

    f and g are vectorized callables returning (m, n, n) arrays.  The inner
    prefix integral is evaluated exactly per outer node: cumulative panel
    integrals of g plus a fresh Gauss rule on the partial panel.
    """
    x, w, edges = panel_nodes(0.0, T, panels, order)
    fx = np.asarray(f(x))
    n = fx.shape[-1]

    gx = np.asarray(g(x)).reshape(panels, order, n, n)
    _, wg = gauss_rule(order)
    h = T / panels
    panel_ints = np.einsum("q,pqij->pij", 0.5 * h * wg, gx)
    prefix = np.zeros((panels, n, n), dtype=panel_ints.dtype)
    prefix[1:] = np.cumsum(panel_ints, axis=0)[:-1]

    # partial inner integrals int_{a_p}^{t_i} g for every outer node t_i
    xg, wg1 = gauss_rule(order)
    a_p = edges[:-1]
    t_out = x.reshape(panels, order)
    half = 0.5 * (t_out - a_p[:, None])                      # (panels, order)
    inner_nodes = a_p[:, None, None] + half[:, :, None] * (xg[None, None, :] + 1.0)
    g_inner = np.asarray(g(inner_nodes.ravel())).reshape(panels, order, order, n, n)
    partial = np.einsum("q,pi,piqjk->pijk", wg1, half, g_inner)

    inner = prefix[:, None, :, :] + partial                  # (panels, order, n, n)
    fz = fx.reshape(panels, order, n, n)
    wz = w.reshape(panels, order)
    return np.einsum("pi,pijk,pikl->jl", wz, fz, inner)


def richardson(values, cutoffs):
    """Extrapolate a sequence assumed to converge like v + c / cutoff.

    Returns (extrapolated, error_estimate).  With a single value the
    estimate is infinite-order pessimistic (the value itself is returned
    with zero step information).
    """
    values = list(values)
    cutoffs = list(cutoffs)
    if len(values) == 1:
        return values[0], abs(values[0]) * np.inf
    extr = values[0]
    for (v0, l0, v1, l1) in zip(values, cutoffs, values[1:], cutoffs[1:]):
        extr = (v1 * l1 - v0 * l0) / (l1 - l0)
    err = abs(values[-1] - extr)
    return extr, err
