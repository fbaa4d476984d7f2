"""Fundamental tensor ``g_ij(v) = (1/2) d^2(F^2)/dv^i dv^j`` by three routes.

* :func:`metric_tensor`: vertical (``v``) finite differences of ``F^2/2``.
* :func:`metric_tensor_horizontal`: Funk only; horizontal (``x``) differences
  through ``g = F_xx / F - F_x F_x^T / F^2``, valid because ``F_x = F F_v``.
* :func:`metric_tensor_graph_oracle`: closed form from the second-order jets
  of the boundary sheets over the chart ``x + E' z + s v``; no differencing.

Also: the ``g_v`` inner product, the Okada identity residual and the
pointwise uniform-convexity estimate.
"""

from __future__ import annotations

import numpy as np

from . import diff
from .diff import DiffScheme
from .domain import ConvexBody, boundary_graph_jet, check_clearance, sample_directions
from .errors import NotSPDError
from .finsler import FUNK, HILBERT, REVERSE_FUNK, MetricKind, _prepare, norm_batch

DEFAULT_SCHEME = DiffScheme()
# the horizontal route is a plain second difference of F (roundoff ~ eps / h^2),
# so it runs on a wider step than the nested outer derivatives
HORIZONTAL_WIDEN = 3.0


def _is_spd(g) -> bool:
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        return False
    return True


def _symmetrize(g):
    return 0.5 * (g + np.swapaxes(g, 0, 1))


def safe_radius(body: ConvexBody, x) -> float:
    """Half the smallest boundary distance along the differencing directions."""
    _, dirs = diff._pair_directions(body.n)
    tp, tm = body.chord_params(x, dirs)
    return 0.5 * float(min(tp.min(), tm.min()))


def vertical_tensors(kind: MetricKind, body: ConvexBody, X, v, h: float, levels: int = 2):
    """``g(x_k, v)`` for every row of ``X`` from one shared vertical stencil.

    Returns ``(g, err)`` shaped ``(m, n, n)``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m, n = X.shape

    def half_sq(W):
        k = len(W)
        XX = np.repeat(X, k, axis=0)
        WW = np.tile(W, (m, 1))
        F = norm_batch(kind, body, XX, WW).reshape(m, k)
        return 0.5 * F.T**2

    _, _, hess, herr = diff.gradient_hessian(half_sq, v, h, levels)
    g = np.moveaxis(hess, -1, 0)
    return _symmetrize_batch(g), np.moveaxis(herr, -1, 0)


def _symmetrize_batch(g):
    return 0.5 * (g + np.swapaxes(g, -1, -2))


def metric_tensor(kind, body: ConvexBody, x, v, scheme: DiffScheme = DEFAULT_SCHEME, return_error=False):
    """Fundamental tensor by vertical central differences of ``F^2/2``."""
    kind = MetricKind.parse(kind)
    x, v = _prepare(body, x, v)
    tp, tm = body.chord_params(x, v)
    check_clearance(body, tp, tm, v)
    for attempt in range(2):
        h = scheme.step * np.linalg.norm(v)
        g, err = vertical_tensors(kind, body, x, v, h, scheme.levels)
        g, err = g[0], err[0]
        if _is_spd(g):
            return (g, err) if return_error else g
        scheme = scheme.shrunk()
    raise NotSPDError("vertical Hessian of F^2/2 is not positive definite")


def metric_tensor_horizontal(body: ConvexBody, x, v, scheme: DiffScheme = DEFAULT_SCHEME, kind=FUNK):
    """Funk tensor from horizontal differences of ``F`` at fixed ``v``."""
    kind = MetricKind.parse(kind)
    if kind is HILBERT:
        raise ValueError("the horizontal route needs F_x = +-F F_v (Funk or reverse Funk)")
    x, v = _prepare(body, x, v)
    tp, tm = body.chord_params(x, v)
    check_clearance(body, tp, tm, v)
    radius = safe_radius(body, x)
    for attempt in range(2):
        h = HORIZONTAL_WIDEN * scheme.step * scheme.outer_factor * radius

        def F_of_x(X):
            return norm_batch(kind, body, X, np.broadcast_to(v, X.shape))

        grad, _, hess, _ = diff.gradient_hessian(F_of_x, x, h, scheme.levels)
        F = float(norm_batch(kind, body, x, v)[0])
        g = _symmetrize(hess / F - np.outer(grad, grad) / F**2)
        if _is_spd(g):
            return g
        scheme = scheme.shrunk()
    raise NotSPDError("horizontal tensor is not positive definite")


def _chart_tensor(kind: MetricKind, jet) -> np.ndarray:
    n = jet.frame.shape[0]

    def pad(grad, hess, lead):
        d = np.append(grad, lead)
        H = np.zeros((n, n))
        H[:-1, :-1] = hess
        return d, H

    # forward gap h - t and backward gap t - b at t = 0, with their jets
    dH, HH = pad(jet.grad_h, jet.hess_h, -1.0)
    dT, HT = pad(-jet.grad_b, -jet.hess_b, 1.0)
    gap_f, gap_b = jet.h0, -jet.b0
    if kind is FUNK:
        return -HH / gap_f + np.outer(dH, dH) / gap_f**2
    if kind is REVERSE_FUNK:
        return -HT / gap_b + np.outer(dT, dT) / gap_b**2
    mixed = dH / gap_f - dT / gap_b
    return 0.25 * (-(HH + HT) * (1.0 / gap_f + 1.0 / gap_b) + np.outer(mixed, mixed))


def metric_tensor_graph_oracle(kind, body: ConvexBody, x, v) -> np.ndarray:
    """Closed-form tensor from boundary-graph jets, mapped back to ambient coordinates."""
    kind = MetricKind.parse(kind)
    x, v = _prepare(body, x, v)
    jet = boundary_graph_jet(body, x, v)
    check_clearance(body, jet.h0, -jet.b0, v)
    g_chart = _chart_tensor(kind, jet)
    E_inv = np.linalg.inv(jet.frame)
    return _symmetrize(E_inv.T @ g_chart @ E_inv)


def inner_product(g, w1, w2) -> float:
    return float(np.asarray(w1, dtype=float) @ np.asarray(g, dtype=float) @ np.asarray(w2, dtype=float))


def okada_residual(kind, body: ConvexBody, x, v, scheme: DiffScheme = DEFAULT_SCHEME) -> float:
    """``max_i |dF/dx^i - sigma F dF/dv^i|`` with ``sigma = +1`` (Funk) or ``-1`` (reverse Funk)."""
    kind = MetricKind.parse(kind)
    if kind is HILBERT:
        raise ValueError("the Okada identity concerns the Funk metric and its reverse")
    sigma = 1.0 if kind is FUNK else -1.0
    x, v = _prepare(body, x, v)
    tp, tm = body.chord_params(x, v)
    check_clearance(body, tp, tm, v)
    radius = safe_radius(body, x)

    def F_of_x(X):
        return norm_batch(kind, body, X, np.broadcast_to(v, X.shape))

    def F_of_v(W):
        return norm_batch(kind, body, np.broadcast_to(x, W.shape), W)

    dFx, _ = diff.gradient(F_of_x, x, scheme.step * scheme.outer_factor * radius, scheme.levels)
    dFv, _ = diff.gradient(F_of_v, v, scheme.step * scheme.outer_factor * np.linalg.norm(v), scheme.levels)
    F = float(norm_batch(kind, body, x, v)[0])
    return float(np.max(np.abs(dFx - sigma * F * dFv)))


def uniform_convexity_estimate(kind, body: ConvexBody, x, direction_samples: int = 100, seed: int = 0,
                               scheme: DiffScheme = DEFAULT_SCHEME) -> float:
    """``max F(w) / sqrt(g_v(w, w))`` over seeded unit ``v`` and ``w`` (all pairs) at ``x``."""
    kind = MetricKind.parse(kind)
    x = np.asarray(x, dtype=float)
    n = body.n
    vs = sample_directions(n, direction_samples, np.random.default_rng([seed, 0]))
    ws = sample_directions(n, direction_samples, np.random.default_rng([seed, 1]))
    eye = np.eye(n)
    vs = np.concatenate([eye, -eye, vs])
    ws = np.concatenate([eye, -eye, ws])
    Fw = norm_batch(kind, body, np.broadcast_to(x, ws.shape), ws)
    best = 0.0
    for v in vs:
        g = metric_tensor(kind, body, x, v, scheme)
        q = np.einsum("ki,ij,kj->k", ws, g, ws)
        best = max(best, float(np.max(Fw / np.sqrt(q))))
    return best
