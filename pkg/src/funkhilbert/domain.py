"""Smooth strongly convex domains and their chord / boundary-graph geometry.

A domain is the sublevel set ``D = {phi < 0}`` of a convex defining
function.  Three families are supported:

``ellipsoid``
    ``phi(x) = |diag(1/a) R^T (x - c)|^2 - 1``.
``pnorm_ball``
    ``phi(x) = sum |(x_i - c_i)/r|^p - 1`` with ``p >= 2``.  Not strongly
    convex at the axis points when ``p > 2``; admitted as a stress input.
``logsumexp``
    ``phi(x) = log(sum_k exp(beta (a_k . x - b_k))) / beta``, a smoothed
    polytope.

Everything metric-related is built on :func:`chord`, which returns the
forward and backward boundary hits of the line ``x + u v``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linprog, minimize

from . import kernels
from ._kernels_py import ELLIPSOID, LOGSUMEXP, PNORM
from .errors import (
    BadSpecError,
    NearBoundaryError,
    NoConvergeError,
    OutsideError,
    TangentRayError,
    ZeroVectorError,
)

ZERO_VECTOR_RTOL = 1e-14
NEAR_BOUNDARY_RTOL = 1e-6

_FAMILY_CODES = {"ellipsoid": ELLIPSOID, "pnorm_ball": PNORM, "logsumexp": LOGSUMEXP}


def _vec(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise BadSpecError(f"{name} must be a flat list of numbers")
    if not np.all(np.isfinite(arr)):
        raise BadSpecError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class DomainSpec:
    """Serializable description of a domain (JSON ``"type"`` discriminant)."""

    kind: str
    center: tuple = ()
    semi_axes: tuple = ()
    rotation: tuple | None = None
    radius: float = 1.0
    p: float = 2.0
    normals: tuple = ()
    offsets: tuple = ()
    beta: float = 1.0

    @property
    def dimension(self) -> int:
        if self.kind == "logsumexp":
            return len(self.normals[0]) if self.normals else 0
        return len(self.center)

    @classmethod
    def from_dict(cls, data: dict) -> "DomainSpec":
        kind = data.get("type")
        try:
            if kind == "ellipsoid":
                center = tuple(_vec(data["center"], "center"))
                axes = tuple(_vec(data["semi_axes"], "semi_axes"))
                rot = data.get("rotation")
                if rot is not None:
                    rot = tuple(tuple(row) for row in np.asarray(rot, dtype=float).tolist())
                spec = cls(kind, center=center, semi_axes=axes, rotation=rot)
            elif kind == "pnorm_ball":
                spec = cls(
                    kind,
                    center=tuple(_vec(data["center"], "center")),
                    radius=float(data["radius"]),
                    p=float(data["p"]),
                )
            elif kind == "logsumexp":
                facets = data["facets"]
                normals = tuple(tuple(_vec(f["normal"], "normal")) for f in facets)
                offsets = tuple(float(f["offset"]) for f in facets)
                spec = cls(kind, normals=normals, offsets=offsets, beta=float(data["beta"]))
            else:
                raise BadSpecError(f"unknown domain type {kind!r}")
        except (KeyError, TypeError, IndexError) as exc:
            raise BadSpecError(f"malformed {kind} spec: {exc}") from None
        spec.validate()
        return spec

    def to_dict(self) -> dict:
        if self.kind == "ellipsoid":
            out = {"type": "ellipsoid", "center": list(self.center), "semi_axes": list(self.semi_axes)}
            if self.rotation is not None:
                out["rotation"] = [list(r) for r in self.rotation]
            return out
        if self.kind == "pnorm_ball":
            return {"type": "pnorm_ball", "center": list(self.center), "radius": self.radius, "p": self.p}
        return {
            "type": "logsumexp",
            "facets": [{"normal": list(a), "offset": b} for a, b in zip(self.normals, self.offsets)],
            "beta": self.beta,
        }

    def validate(self) -> None:
        n = self.dimension
        if n < 2:
            raise BadSpecError(f"dimension must be at least 2, got {n}")
        if self.kind == "ellipsoid":
            if len(self.semi_axes) != n:
                raise BadSpecError("semi_axes length does not match center")
            if min(self.semi_axes) <= 0:
                raise BadSpecError("semi_axes must be positive")
            if self.rotation is not None:
                rot = np.asarray(self.rotation, dtype=float)
                if rot.shape != (n, n):
                    raise BadSpecError("rotation must be an n x n matrix")
                if not np.allclose(rot.T @ rot, np.eye(n), atol=1e-10):
                    raise BadSpecError("rotation is not orthogonal")
        elif self.kind == "pnorm_ball":
            if not self.radius > 0:
                raise BadSpecError("radius must be positive")
            if not self.p >= 2:
                raise BadSpecError(f"exponent p must be >= 2, got {self.p}")
        elif self.kind == "logsumexp":
            if any(len(a) != n for a in self.normals):
                raise BadSpecError("facet normals have inconsistent dimensions")
            if len(self.offsets) != len(self.normals):
                raise BadSpecError("one offset per facet required")
            if not self.beta > 0:
                raise BadSpecError("beta must be positive")
            if np.linalg.matrix_rank(np.asarray(self.normals)) < n:
                raise BadSpecError("facet normals do not span R^n")
        else:
            raise BadSpecError(f"unknown domain type {self.kind!r}")


def read_spec(path) -> DomainSpec:
    with open(Path(path), encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise BadSpecError(f"{path}: invalid JSON ({exc})") from None
    return DomainSpec.from_dict(data)


def ellipsoid(semi_axes, center=None, rotation=None) -> "ConvexBody":
    semi_axes = list(map(float, semi_axes))
    center = [0.0] * len(semi_axes) if center is None else list(map(float, center))
    rot = None if rotation is None else tuple(map(tuple, np.asarray(rotation, dtype=float).tolist()))
    return load_domain(DomainSpec("ellipsoid", center=tuple(center), semi_axes=tuple(semi_axes), rotation=rot))


def unit_ball(n: int = 2) -> "ConvexBody":
    return ellipsoid([1.0] * n)


def pnorm_ball(p: float, radius: float = 1.0, center=(0.0, 0.0)) -> "ConvexBody":
    return load_domain(DomainSpec("pnorm_ball", center=tuple(map(float, center)), radius=float(radius), p=float(p)))


def logsumexp_body(normals, offsets, beta: float) -> "ConvexBody":
    normals = tuple(tuple(map(float, a)) for a in normals)
    return load_domain(DomainSpec("logsumexp", normals=normals, offsets=tuple(map(float, offsets)), beta=float(beta)))


def regular_polygon_body(sides: int = 6, beta: float = 3.0, offset: float = 1.0) -> "ConvexBody":
    """Smoothed regular polygon in the plane (facet normals at equal angles)."""
    ang = 2 * np.pi * np.arange(sides) / sides
    normals = np.column_stack([np.cos(ang), np.sin(ang)])
    return logsumexp_body(normals, [offset] * sides, beta)


@dataclass(frozen=True)
class ChordData:
    t_plus: float
    t_minus: float
    b_point: np.ndarray
    a_point: np.ndarray


@dataclass(frozen=True)
class BoundaryGraphJet:
    frame: np.ndarray
    h0: float
    grad_h: np.ndarray
    hess_h: np.ndarray
    b0: float
    grad_b: np.ndarray
    hess_b: np.ndarray


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """Immutable domain with exact ``phi``, gradient and Hessian."""

    spec: DomainSpec
    n: int
    family: int
    center: np.ndarray
    mat: np.ndarray
    offsets: np.ndarray
    s1: float
    s2: float
    box_lo: np.ndarray
    box_hi: np.ndarray
    reference_point: np.ndarray = field(repr=False)

    @property
    def diameter(self) -> float:
        """Diagonal of the bounding box (an upper bound on the Euclidean diameter)."""
        return float(np.linalg.norm(self.box_hi - self.box_lo))

    @property
    def strongly_convex_family(self) -> bool:
        return not (self.family == PNORM and self.s2 > 2)

    # phi and its derivatives accept a single point or an (m, n) batch
    def phi(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == ELLIPSOID:
            y = x - self.center
            return np.einsum("...i,ij,...j->...", y, self.mat, y) - 1.0
        if self.family == PNORM:
            return np.sum(np.abs((x - self.center) / self.s1) ** self.s2, axis=-1) - 1.0
        s = self.s1 * (x @ self.mat.T - self.offsets)
        smax = s.max(axis=-1, keepdims=True)
        return (np.squeeze(smax, -1) + np.log(np.exp(s - smax).sum(axis=-1))) / self.s1

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == ELLIPSOID:
            return 2.0 * (x - self.center) @ self.mat.T
        if self.family == PNORM:
            z = (x - self.center) / self.s1
            return self.s2 * np.copysign(np.abs(z) ** (self.s2 - 1), z) / self.s1
        w = self._softmax(x)
        return w @ self.mat

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == ELLIPSOID:
            return 2.0 * np.broadcast_to(self.mat, x.shape[:-1] + self.mat.shape).copy()
        if self.family == PNORM:
            z = (x - self.center) / self.s1
            d = self.s2 * (self.s2 - 1) * np.abs(z) ** (self.s2 - 2) / self.s1**2
            return d[..., :, None] * np.eye(self.n)
        w = self._softmax(x)
        abar = w @ self.mat
        second = np.einsum("...k,ki,kj->...ij", w, self.mat, self.mat)
        return self.s1 * (second - abar[..., :, None] * abar[..., None, :])

    def _softmax(self, x):
        s = self.s1 * (x @ self.mat.T - self.offsets)
        e = np.exp(s - s.max(axis=-1, keepdims=True))
        return e / e.sum(axis=-1, keepdims=True)

    def contains(self, x) -> np.ndarray:
        return self.phi(x) < 0.0

    def forward_hits(self, X, V) -> np.ndarray:
        """Forward hit parameters for a batch of lines; raises on any failure."""
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=float)
        V = np.ascontiguousarray(np.atleast_2d(V), dtype=float)
        if X.shape[0] == 1 and V.shape[0] > 1:
            X = np.ascontiguousarray(np.broadcast_to(X, V.shape))
        norms = np.linalg.norm(V, axis=1)
        umax = 1.01 * self.diameter / norms
        t, status, _ = kernels.solve_forward(
            self.family, X, V, umax, self.center, self.mat, self.offsets, self.s1, self.s2
        )
        if np.any(status):
            if np.any(status == 1):
                bad = X[np.argmax(status == 1)]
                raise OutsideError(f"point {bad.tolist()} is not interior")
            raise NoConvergeError("chord root solver failed (unbounded domain?)")
        return t

    def chord_params(self, X, V):
        """Batch ``(t_plus, t_minus)`` for lines ``X + u V``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        V = np.atleast_2d(np.asarray(V, dtype=float))
        if X.shape[0] == 1 and V.shape[0] > 1:
            X = np.broadcast_to(X, V.shape)
        if V.shape[0] == 1 and X.shape[0] > 1:
            V = np.broadcast_to(V, X.shape)
        both_x = np.concatenate([X, X])
        both_v = np.concatenate([V, -V])
        t = self.forward_hits(both_x, both_v)
        m = X.shape[0]
        return t[:m], t[m:]


def _box_for(spec: DomainSpec, center, mat):
    n = spec.dimension
    if spec.kind == "ellipsoid":
        half = np.sqrt(np.diag(np.linalg.inv(mat)))
        return center - half, center + half
    if spec.kind == "pnorm_ball":
        return center - spec.radius, center + spec.radius
    A = np.asarray(spec.normals, dtype=float)
    b = np.asarray(spec.offsets, dtype=float)
    lo, hi = np.empty(n), np.empty(n)
    for i in range(n):
        for sign, target in ((1.0, lo), (-1.0, hi)):
            c = np.zeros(n)
            c[i] = sign
            res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * n, method="highs")
            if res.status == 3:
                raise BadSpecError("facets do not bound a region (normals must positively span R^n)")
            if res.status != 0:
                raise BadSpecError(f"facet polytope is empty or degenerate: {res.message}")
            target[i] = res.x[i]
    pad = 1e-9 * (1 + np.max(hi - lo))
    return lo - pad, hi + pad


def load_domain(spec: DomainSpec) -> ConvexBody:
    """Build a :class:`ConvexBody` from a validated spec."""
    spec.validate()
    n = spec.dimension
    offsets = np.zeros(0)
    s1 = s2 = 0.0
    if spec.kind == "ellipsoid":
        center = np.asarray(spec.center, dtype=float)
        rot = np.eye(n) if spec.rotation is None else np.asarray(spec.rotation, dtype=float)
        inv_a2 = 1.0 / np.asarray(spec.semi_axes, dtype=float) ** 2
        mat = (rot * inv_a2) @ rot.T
        mat = 0.5 * (mat + mat.T)
    elif spec.kind == "pnorm_ball":
        center = np.asarray(spec.center, dtype=float)
        mat = np.zeros((1, 1))
        s1, s2 = spec.radius, spec.p
        if spec.p > 2:
            warnings.warn(
                f"p={spec.p} ball is not strongly convex at its axis points; curvature checks may degrade",
                stacklevel=2,
            )
    else:
        mat = np.asarray(spec.normals, dtype=float)
        offsets = np.asarray(spec.offsets, dtype=float)
        center = np.zeros(n)
        s1 = spec.beta

    lo, hi = _box_for(spec, center, mat)
    body = ConvexBody(
        spec, n, _FAMILY_CODES[spec.kind], np.ascontiguousarray(center), np.ascontiguousarray(mat),
        np.ascontiguousarray(offsets), float(s1), float(s2), lo, hi, np.zeros(n),
    )
    if spec.kind == "logsumexp":
        res = minimize(lambda z: float(body.phi(z)), 0.5 * (lo + hi), jac=lambda z: body.grad(z), method="BFGS")
        ref = res.x
        if not body.phi(ref) < 0:
            raise BadSpecError("logsumexp body is empty (phi >= 0 everywhere)")
    else:
        ref = center.copy()
    object.__setattr__(body, "reference_point", ref)
    _check_derivatives(body)
    return body


def _check_derivatives(body: ConvexBody) -> None:
    rng = np.random.default_rng(0)
    half = 0.5 * (body.box_hi - body.box_lo)
    for _ in range(3):
        x = body.reference_point + 0.3 * half * rng.uniform(-1, 1, body.n)
        h = 1e-6 * (1 + np.max(half))
        eye = np.eye(body.n)
        fd_grad = np.array([(body.phi(x + h * e) - body.phi(x - h * e)) / (2 * h) for e in eye])
        fd_hess = np.array([(body.grad(x + h * e) - body.grad(x - h * e)) / (2 * h) for e in eye])
        g, H = body.grad(x), body.hess(x)
        scale = 1 + np.abs(g).max() + np.abs(H).max()
        if np.abs(fd_grad - g).max() > 1e-5 * scale or np.abs(fd_hess - H).max() > 1e-5 * scale:
            raise BadSpecError("defining function derivatives are inconsistent")
        if np.linalg.eigvalsh(0.5 * (H + H.T)).min() < -1e-9 * scale:
            raise BadSpecError("defining function is not convex")


def classify_point(body: ConvexBody, x, tol: float = 1e-9) -> str:
    x = np.asarray(x, dtype=float)
    val = float(body.phi(x))
    scale = float(np.linalg.norm(body.grad(x)))
    if val < -tol * scale:
        return "interior"
    if abs(val) <= tol * scale:
        return "boundary"
    return "exterior"


def _check_vector(x, v):
    if np.linalg.norm(v) < ZERO_VECTOR_RTOL * (1 + np.linalg.norm(x)):
        raise ZeroVectorError("direction vector is numerically zero")


def chord(body: ConvexBody, x, v) -> ChordData:
    """Boundary hits ``b = x + t_plus v`` and ``a = x - t_minus v``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_vector(x, v)
    if not body.phi(x) < 0:
        raise OutsideError(f"point {x.tolist()} is not interior")
    tp, tm = body.chord_params(x, v)
    tp, tm = float(tp[0]), float(tm[0])
    return ChordData(tp, tm, x + tp * v, x - tm * v)


def check_clearance(body: ConvexBody, tp, tm, v) -> None:
    """Raise :class:`NearBoundaryError` when the base point hugs the boundary."""
    gap = np.min(np.minimum(tp, tm) * np.linalg.norm(np.atleast_2d(v), axis=-1))
    if gap < NEAR_BOUNDARY_RTOL * body.diameter:
        raise NearBoundaryError(f"point is within {gap:.3g} of the boundary")


def householder_frame(v) -> np.ndarray:
    """Orthogonal matrix whose last column is ``v/|v|``."""
    v = np.asarray(v, dtype=float)
    n = v.size
    u = v / np.linalg.norm(v)
    en = np.zeros(n)
    en[-1] = 1.0
    w = u - en
    nw = np.linalg.norm(w)
    if nw < 1e-14:
        return np.eye(n)
    w /= nw
    return np.eye(n) - 2.0 * np.outer(w, w)


def _sheet_jet(body, hit, Ep, v):
    g = body.grad(hit)
    H = body.hess(hit)
    gh = float(g @ v)
    if abs(gh) <= 1e-12 * np.linalg.norm(g) * np.linalg.norm(v):
        raise TangentRayError("chord meets the boundary tangentially")
    gz = Ep.T @ g
    grad = -gz / gh
    Gzz = Ep.T @ H @ Ep
    Gzh = Ep.T @ H @ v
    Ghh = float(v @ H @ v)
    hess = -(Gzz + np.outer(Gzh, grad) + np.outer(grad, Gzh) + Ghh * np.outer(grad, grad)) / gh
    return grad, 0.5 * (hess + hess.T)


def boundary_graph_jet(body: ConvexBody, x, v) -> BoundaryGraphJet:
    """Implicit-function jets of the forward/backward boundary sheets over the chart ``x + E' z + s v``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    ch = chord(body, x, v)
    Q = householder_frame(v)
    Ep = Q[:, :-1]
    frame = np.column_stack([Ep, v])
    grad_h, hess_h = _sheet_jet(body, ch.b_point, Ep, v)
    grad_b, hess_b = _sheet_jet(body, ch.a_point, Ep, v)
    return BoundaryGraphJet(frame, ch.t_plus, grad_h, hess_h, -ch.t_minus, grad_b, hess_b)


def sample_directions(n: int, count: int, rng) -> np.ndarray:
    d = rng.standard_normal((count, n))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def boundary_curvature_min(body: ConvexBody, points) -> np.ndarray:
    """Smallest principal curvature of the boundary at each given boundary point."""
    points = np.atleast_2d(points)
    out = np.empty(len(points))
    for k, p in enumerate(points):
        g = body.grad(p)
        ng = np.linalg.norm(g)
        Q = householder_frame(g)[:, :-1]
        II = Q.T @ body.hess(p) @ Q / ng
        out[k] = np.linalg.eigvalsh(0.5 * (II + II.T)).min()
    return out


def strong_convexity_margin(body: ConvexBody, sample_count: int = 256, seed: int = 0) -> float:
    """Minimum sampled principal curvature of the boundary.

    The first ``2n`` samples are the rays along ``+-e_i`` from the reference
    point; the rest are seeded random directions.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    eye = np.eye(body.n)
    fixed = np.concatenate([eye, -eye])[:sample_count]
    dirs = np.concatenate([fixed, sample_directions(body.n, max(0, sample_count - len(fixed)), rng)])
    x0 = body.reference_point
    tp = body.forward_hits(x0, dirs)
    pts = x0 + tp[:, None] * dirs
    return float(boundary_curvature_min(body, pts).min())
