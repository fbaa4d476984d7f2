"""Finsler Ricci curvature through the Riemannian metric of a geodesic field.

For a projectively flat metric the constant field ``V(y) = w / F(y, w)``
has straight unit-speed geodesics as integral curves, and since ``g`` is
0-homogeneous in the direction, ``g_{V(y)} = g_w(y)``.  The Finsler
``Ric(v)`` equals the Riemannian Ricci curvature of that field in direction
``v``, which we evaluate from the first and second coordinate derivatives
of ``g_w`` by central differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import diff
from .diff import DiffScheme
from .domain import ConvexBody, check_clearance
from .errors import NotSPDError, ToleranceError, ZeroVectorError
from .finsler import MetricKind, _prepare, norm_batch
from .tensor import DEFAULT_SCHEME, metric_tensor_graph_oracle, safe_radius, vertical_tensors


@dataclass(frozen=True)
class MetricField:
    """Batched metric field ``Y (m, n) -> g (m, n, n)`` with a provenance tag."""

    evaluate: Callable[[np.ndarray], np.ndarray]
    provenance: tuple
    body: ConvexBody | None = None

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            return self.evaluate(y[None, :])[0]
        return self.evaluate(y)


@dataclass(frozen=True)
class CurvatureReport:
    ricci_value: float
    christoffel_norm: float
    stencil_step: float
    estimated_error: float


def geodesic_metric_field(kind, body: ConvexBody, w, scheme: DiffScheme = DEFAULT_SCHEME,
                          route: str = "fd") -> MetricField:
    """``y -> g_{V(y)}`` for the straight geodesic field ``V(y) = w / F(y, w)``.

    ``route="fd"`` uses vertical differences (one batched kernel call per
    evaluation), ``route="graph"`` the closed-form boundary-jet tensor.
    """
    kind = MetricKind.parse(kind)
    w = np.asarray(w, dtype=float)
    if np.linalg.norm(w) == 0:
        raise ZeroVectorError("field direction must be nonzero")
    if route == "fd":
        h = scheme.step * np.linalg.norm(w)

        def evaluate(Y):
            g, _ = vertical_tensors(kind, body, Y, w, h, scheme.levels)
            return g

    elif route == "graph":

        def evaluate(Y):
            return np.array([metric_tensor_graph_oracle(kind, body, y, w) for y in Y])

    else:
        raise ValueError(f"unknown tensor route {route!r}")
    return MetricField(evaluate, ("geodesic_field", kind.value, tuple(w.tolist()), route), body)


def synthetic_field(func, provenance="synthetic") -> MetricField:
    """Wrap a pointwise ``y -> g(y)`` callable as a batched field."""

    def evaluate(Y):
        return np.array([func(y) for y in Y])

    return MetricField(evaluate, (provenance,))


def klein_field(n: int) -> MetricField:
    """Klein-model metric of the unit ball (constant sectional curvature -1)."""

    def g(y):
        s = 1.0 - y @ y
        return np.eye(n) / s + np.outer(y, y) / s**2

    return synthetic_field(g, "klein")


def _field_jets(field: MetricField, x, h, levels):
    def flat(Y):
        G = field.evaluate(Y)
        return G.reshape(len(Y), -1)

    n = x.size
    grad, _, hess, herr = diff.gradient_hessian(flat, x, h, levels)
    g = field(x)
    return g, grad.reshape(n, n, n), hess.reshape(n, n, n, n), herr.reshape(n, n, n, n)


def _christoffel_from(g, dg):
    # first kind: G[l, i, j] = (d_i g_jl + d_j g_il - d_l g_ij) / 2
    first = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
    return first, np.linalg.solve(g, first.reshape(len(g), -1)).reshape(first.shape)


def _step_for(field: MetricField, x, scheme: DiffScheme, step: float | None):
    if step is not None:
        return step
    if field.body is not None:
        return scheme.step * scheme.outer_factor * safe_radius(field.body, x)
    return scheme.step * scheme.outer_factor


def christoffel(field: MetricField, x, scheme: DiffScheme = DEFAULT_SCHEME, step: float | None = None):
    """Second-kind symbols ``Gamma[k, i, j]`` of the field at ``x``."""
    x = np.asarray(x, dtype=float)
    h = _step_for(field, x, scheme, step)

    def flat(Y):
        return field.evaluate(Y).reshape(len(Y), -1)

    n = x.size
    dg, _ = diff.gradient(flat, x, h, scheme.levels)
    g = field(x)
    _check_spd(g)
    _, gamma = _christoffel_from(g, dg.reshape(n, n, n))
    return gamma


def _check_spd(g):
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise NotSPDError("metric field is not positive definite at the base point") from None


def ricci_tensor(field: MetricField, x, scheme: DiffScheme = DEFAULT_SCHEME, step: float | None = None):
    """Ricci tensor ``R_km``, Christoffel symbols and a linearized error bound tensor."""
    x = np.asarray(x, dtype=float)
    h = _step_for(field, x, scheme, step)
    g, dg, ddg, ddg_err = _field_jets(field, x, h, scheme.levels)
    _check_spd(g)
    ginv = np.linalg.inv(g)
    first, gamma = _christoffel_from(g, dg)
    # ddg[a, b, i, j] = d_a d_b g_ij ; R_iklm with Ric_km = g^il R_iklm
    second = 0.5 * (
        np.einsum("klim->iklm", ddg)
        + np.einsum("imkl->iklm", ddg)
        - np.einsum("kmil->iklm", ddg)
        - np.einsum("ilkm->iklm", ddg)
    )
    quad = np.einsum("np,nkl,pim->iklm", g, gamma, gamma) - np.einsum("np,nkm,pil->iklm", g, gamma, gamma)
    riem = second + quad
    ric = np.einsum("il,iklm->km", ginv, riem)
    err = 0.5 * np.einsum("il,klim->km", np.abs(ginv), ddg_err) * 4.0
    return 0.5 * (ric + ric.T), gamma, err, h


def ricci_of_field(field: MetricField, x, v, scheme: DiffScheme = DEFAULT_SCHEME, step: float | None = None):
    ric, gamma, err, h = ricci_tensor(field, x, scheme, step)
    v = np.asarray(v, dtype=float)
    return CurvatureReport(float(v @ ric @ v), float(np.linalg.norm(gamma)), float(h), float(np.abs(v) @ err @ np.abs(v)))


def ricci(kind, body: ConvexBody, x, v, scheme: DiffScheme = DEFAULT_SCHEME, tol: float | None = None,
          route: str = "graph") -> CurvatureReport:
    """Finsler Ricci curvature ``Ric(v)``, quadratic in ``v``."""
    kind = MetricKind.parse(kind)
    x, v = _prepare(body, x, v)
    tp, tm = body.chord_params(x, v)
    check_clearance(body, tp, tm, v)
    field = geodesic_metric_field(kind, body, v, scheme, route)
    rep = ricci_of_field(field, x, v, scheme)
    if tol is not None and not rep.estimated_error <= tol:
        raise ToleranceError(f"Ricci error estimate {rep.estimated_error:.3g} exceeds {tol:.3g}")
    return rep


def finsler_speed(kind, body, Y, w):
    """``F(y, w)`` for each row of ``Y`` (helper for field unit-speed checks)."""
    Y = np.atleast_2d(Y)
    return norm_batch(MetricKind.parse(kind), body, Y, np.broadcast_to(w, Y.shape))
