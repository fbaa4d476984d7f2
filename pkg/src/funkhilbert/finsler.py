"""Funk, reverse Funk and Hilbert norms, distances and straight-line geodesics.

Everything is expressed through chord parameters: for a line ``x + u v``
with boundary hits at ``u = t_plus`` and ``u = -t_minus``,

* Funk:          ``F(x, v) = 1 / t_plus``
* reverse Funk:  ``F(x, v) = 1 / t_minus``
* Hilbert:       ``F(x, v) = (1/t_plus + 1/t_minus) / 2``

and the distance from ``x`` to ``x + v`` along the same chord is
``log(t_plus / (t_plus - 1))`` (Funk) etc.  Working in chord parameters keeps
nearby-point distances free of cancellation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .domain import ConvexBody, _check_vector, check_clearance
from .errors import NearBoundaryError, OutsideError


class MetricKind(enum.Enum):
    FUNK = "funk"
    REVERSE_FUNK = "rfunk"
    HILBERT = "hilbert"

    @classmethod
    def parse(cls, value) -> "MetricKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"reversefunk": "rfunk", "reverse_funk": "rfunk", "reverse-funk": "rfunk"}
        return cls(aliases.get(key, key))


FUNK = MetricKind.FUNK
REVERSE_FUNK = MetricKind.REVERSE_FUNK
HILBERT = MetricKind.HILBERT


@dataclass(frozen=True)
class TangentVector:
    x: np.ndarray
    v: np.ndarray

    def __iter__(self):
        return iter((self.x, self.v))


def norm_from_chord(kind: MetricKind, tp, tm):
    if kind is FUNK:
        return 1.0 / tp
    if kind is REVERSE_FUNK:
        return 1.0 / tm
    return 0.5 * (1.0 / tp + 1.0 / tm)


def norm_batch(kind: MetricKind, body: ConvexBody, X, V) -> np.ndarray:
    """Finsler norms for a batch of tangent vectors; no interior/clearance checks."""
    X = np.atleast_2d(X)
    V = np.atleast_2d(V)
    if kind is FUNK:
        return 1.0 / body.forward_hits(X, V)
    if kind is REVERSE_FUNK:
        return 1.0 / body.forward_hits(X, -V)
    tp, tm = body.chord_params(X, V)
    return 0.5 * (1.0 / tp + 1.0 / tm)


def _prepare(body, x, v):
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_vector(x, v)
    if not body.phi(x) < 0:
        raise OutsideError(f"point {x.tolist()} is not interior")
    return x, v


def finsler_norm(kind, body: ConvexBody, x, v) -> float:
    kind = MetricKind.parse(kind)
    x, v = _prepare(body, x, v)
    tp, tm = body.chord_params(x, v)
    check_clearance(body, tp, tm, v)
    return float(norm_from_chord(kind, tp[0], tm[0]))


def _pair_parameters(body, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    for p in (x, y):
        if not body.phi(p) < 0:
            raise OutsideError(f"point {p.tolist()} is not interior")
    v = y - x
    if np.linalg.norm(v) == 0.0:
        return None
    tp, tm = body.chord_params(x, v)
    return float(tp[0]), float(tm[0])


def funk_distance(body: ConvexBody, x, y) -> float:
    """``d_F(x, y) = log(t_plus / (t_plus - 1))`` along ``v = y - x``."""
    tt = _pair_parameters(body, x, y)
    if tt is None:
        return 0.0
    return float(-np.log1p(-1.0 / tt[0]))


def hilbert_distance(body: ConvexBody, x, y) -> float:
    tt = _pair_parameters(body, x, y)
    if tt is None:
        return 0.0
    tp, tm = tt
    return float(0.5 * (-np.log1p(-1.0 / tp) + np.log1p(1.0 / tm)))


def distance(kind, body: ConvexBody, x, y) -> float:
    kind = MetricKind.parse(kind)
    if kind is FUNK:
        return funk_distance(body, x, y)
    if kind is REVERSE_FUNK:
        return funk_distance(body, y, x)
    return hilbert_distance(body, x, y)


def distances_from(kind, body: ConvexBody, x, Y) -> np.ndarray:
    """Distances ``d(x, y)`` for each interior row ``y`` of ``Y`` (batched)."""
    kind = MetricKind.parse(kind)
    x = np.asarray(x, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    V = Y - x
    out = np.zeros(len(Y))
    moving = np.linalg.norm(V, axis=1) > 0
    if not moving.any():
        return out
    tp, tm = body.chord_params(x, V[moving])
    forward = -np.log1p(-1.0 / tp)
    backward = np.log1p(1.0 / tm)
    if kind is FUNK:
        out[moving] = forward
    elif kind is REVERSE_FUNK:
        out[moving] = backward
    else:
        out[moving] = 0.5 * (forward + backward)
    return out


def unit_speed_offset(kind: MetricKind, tp, tm, s):
    """Chord parameter ``u(s)`` at Finsler arclength ``s`` (direction already unit)."""
    if kind is FUNK:
        return -tp * np.expm1(-s)
    if kind is REVERSE_FUNK:
        return tm * np.expm1(s)
    e2s = np.exp(2.0 * s)
    return tp * tm * np.expm1(2.0 * s) / (tp + tm * e2s)


def unit_speed_velocity(kind: MetricKind, tp, tm, s):
    """``du/ds`` matching :func:`unit_speed_offset`."""
    if kind is FUNK:
        return tp * np.exp(-s)
    if kind is REVERSE_FUNK:
        return tm * np.exp(s)
    e2s = np.exp(2.0 * s)
    return 2.0 * tp * tm * e2s * (tp + tm) / (tp + tm * e2s) ** 2


def geodesic_point(kind, body: ConvexBody, x, v, s: float) -> np.ndarray:
    """Point at arclength ``s >= 0`` along the unit-speed geodesic leaving ``x`` in direction ``v``."""
    kind = MetricKind.parse(kind)
    x, v = _prepare(body, x, v)
    if s < 0:
        raise ValueError("arclength must be nonnegative")
    vhat = v / finsler_norm(kind, body, x, v)
    if s == 0:
        return x.copy()
    tp, tm = body.chord_params(x, vhat)
    tp, tm = float(tp[0]), float(tm[0])
    if kind is REVERSE_FUNK and s >= np.log1p(tp / tm):
        raise NearBoundaryError("reverse Funk geodesic leaves the domain (not forward complete)")
    return x + unit_speed_offset(kind, tp, tm, s) * vhat


def exp_map(kind, body: ConvexBody, x, v) -> np.ndarray:
    """``exp_x(v)``: geodesic point at arclength ``F(x, v)`` in direction ``v``."""
    kind = MetricKind.parse(kind)
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.linalg.norm(v) == 0.0:
        if not body.phi(x) < 0:
            raise OutsideError(f"point {x.tolist()} is not interior")
        return x.copy()
    return geodesic_point(kind, body, x, v, finsler_norm(kind, body, x, v))
