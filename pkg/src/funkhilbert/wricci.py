"""Weighted Ricci curvature of ``(D, F, Lebesgue)`` and closed-form checks.

Along the unit-speed geodesic ``eta`` with ``eta'(0) = v`` the Lebesgue
measure decomposes as ``exp(-Psi) vol_g``; in ambient coordinates
``Psi(s) = log det g(eta(s), eta'(s)) / 2`` up to an additive constant.
With ``psi1 = Psi'(0)`` and ``psi2 = Psi''(0)`` (arclength derivatives):

* ``Ric_n = Ric + psi2`` if ``psi1 == 0`` else ``-inf``
* ``Ric_N = Ric + psi2 - psi1**2 / (N - n)`` for ``n < N < inf``
* ``Ric_inf = Ric + psi2``

Closed forms used as oracles: Funk has ``psi1 = (n+1)/2``, ``psi2 = 0``,
``Ric = -(n-1)/4``; Hilbert at a point with chord parameters ``t+, t-``
(unit ``v``) has ``psi1 = (n+1)/2 (1/t+ - 1/t-)``, ``psi2 = (n+1)/(t+ t-)``
and ``Ric = -(n-1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diff
from .curvature import ricci
from .diff import DiffScheme
from .domain import ConvexBody, check_clearance, sample_directions, strong_convexity_margin
from .errors import BadNError, NearBoundaryError, UnitSpeedError
from .finsler import FUNK, HILBERT, REVERSE_FUNK, MetricKind, _prepare, finsler_norm
from .finsler import unit_speed_offset
from .tensor import DEFAULT_SCHEME, metric_tensor_graph_oracle, vertical_tensors

PSI_ZERO = 1e-6
ARC_STEP = 0.02

INF = math.inf


def parse_N(value, n: int) -> float:
    """Accept a number or the token ``inf``; reject ``N < n``."""
    if isinstance(value, str):
        token = value.strip().lower()
        if token in ("inf", "+inf", "infinity", "oo"):
            return INF
        try:
            value = float(token)
        except ValueError:
            raise BadNError(f"cannot parse N={value!r}") from None
    value = float(value)
    if math.isnan(value) or value < n:
        raise BadNError(f"N must lie in [n, inf] = [{n}, inf], got {value}")
    return value


def assemble(ric: float, psi1: float, psi2: float, n: int, N: float) -> float:
    """Weighted Ricci curvature for one ``N`` from its three ingredients."""
    if N == INF:
        return ric + psi2
    if N == n:
        return ric + psi2 if abs(psi1) <= PSI_ZERO else -INF
    return ric + psi2 - psi1**2 / (N - n)


def _sorted_Ns(N_list, n):
    return sorted({parse_N(N, n) for N in N_list})


def funk_oracle(n: int, N_list=(INF,)) -> dict:
    if n < 2:
        raise ValueError("dimension must be at least 2")
    Ns = _sorted_Ns(N_list, n)
    ric = -(n - 1) / 4.0
    psi1 = (n + 1) / 2.0
    return {
        "ric": ric,
        "psi1": psi1,
        "psi2": 0.0,
        "ric_inf": ric,
        "ric_N": [(N, assemble(ric, psi1, 0.0, n, N)) for N in Ns],
    }


def hilbert_oracle(t_plus: float, t_minus: float, n: int, N_list=(INF,)) -> dict:
    speed = 0.5 * (1.0 / t_plus + 1.0 / t_minus)
    if abs(speed - 1.0) > 1e-9:
        raise UnitSpeedError(f"chord parameters give F = {speed!r}, not 1")
    Ns = _sorted_Ns(N_list, n)
    ric = -(n - 1.0)
    psi1 = 0.5 * (n + 1) * (1.0 / t_plus - 1.0 / t_minus)
    psi2 = (n + 1) / (t_plus * t_minus)
    out = {"ric": ric, "psi1": psi1, "psi2": psi2, "ric_inf": ric + psi2, "ric_N": []}
    for N in Ns:
        if N == INF or N == n:
            out["ric_N"].append((N, assemble(ric, psi1, psi2, n, N)))
        else:
            # psi1^2 written through the product t+ t- (same value, fewer cancellations near t+ = t-)
            sq = (n + 1) ** 2 * (1.0 - 1.0 / (t_plus * t_minus))
            out["ric_N"].append((N, ric + psi2 - sq / (N - n)))
    return out


def _unit(kind, body, x, v):
    x, v = _prepare(body, x, v)
    F = finsler_norm(kind, body, x, v)
    return x, v / F, F


def _geodesic_points(kind, body, x, vhat, s):
    tp, tm = body.chord_params(x, vhat)
    return x + np.outer(unit_speed_offset(kind, float(tp[0]), float(tm[0]), np.asarray(s, dtype=float)), vhat)


def _log_det_half(kind, body, X, vhat, scheme, route):
    if route == "fd":
        g, _ = vertical_tensors(kind, body, X, vhat, scheme.step * np.linalg.norm(vhat), scheme.levels)
    else:
        g = np.array([metric_tensor_graph_oracle(kind, body, y, vhat) for y in X])
    sign, logdet = np.linalg.slogdet(g)
    return 0.5 * logdet


def _arc_limits(kind, body, x, vhat):
    """Arclength interval of the geodesic through ``x`` that stays inside ``D``."""
    tp, tm = body.chord_params(x, vhat)
    tp, tm = float(tp[0]), float(tm[0])
    if kind is FUNK:
        return -math.log1p(tm / tp), INF
    if kind is REVERSE_FUNK:
        return -INF, math.log1p(tp / tm)
    return -INF, INF


def psi_at(kind, body: ConvexBody, x, v, s, scheme: DiffScheme = DEFAULT_SCHEME, route: str = "graph"):
    """``Psi(s) = log det g(eta(s), eta'(s)) / 2`` (scalar or array ``s``).

    ``route`` picks the tensor: ``"graph"`` (closed-form boundary jets, the
    default, good to ~1e-12) or ``"fd"`` (vertical differences, ~1e-8).
    Second arclength derivatives amplify the latter past the 1e-3 level.
    """
    kind = MetricKind.parse(kind)
    x, vhat, F = _unit(kind, body, x, v)
    if abs(F - 1.0) > 1e-10:
        raise UnitSpeedError(f"psi_at expects a unit vector, got F = {F!r}")
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    lo, hi = _arc_limits(kind, body, x, vhat)
    if np.any(s_arr <= lo) or np.any(s_arr >= hi):
        raise NearBoundaryError("arclength leaves the domain")
    X = _geodesic_points(kind, body, x, vhat, s_arr)
    tp, tm = body.chord_params(X, np.broadcast_to(vhat, X.shape))
    check_clearance(body, tp, tm, vhat)
    out = _log_det_half(kind, body, X, vhat, scheme, route)
    return float(out[0]) if np.ndim(s) == 0 else out


def psi_derivatives(kind, body: ConvexBody, x, v, scheme: DiffScheme = DEFAULT_SCHEME, route: str = "graph",
                    step: float | None = None, return_error: bool = False):
    """Arclength derivatives ``(Psi'(0), Psi''(0))`` along the unit-speed geodesic."""
    kind = MetricKind.parse(kind)
    x, vhat, F = _unit(kind, body, x, v)
    lo, hi = _arc_limits(kind, body, x, vhat)
    h = ARC_STEP if step is None else step
    h = min(h, 0.1 * min(-lo, hi))
    tp, tm = body.chord_params(x, vhat)
    check_clearance(body, tp, tm, vhat)

    def psi_of(S):
        return _log_det_half(kind, body, _geodesic_points(kind, body, x, vhat, S[:, 0]), vhat, scheme, route)

    res = diff.directional_derivatives(psi_of, np.zeros(1), np.ones((1, 1)), h, scheme.levels, orders=(1, 2))
    (d1, e1), (d2, e2) = res[1], res[2]
    if return_error:
        return float(d1[0]), float(d2[0]), float(e1[0]), float(e2[0])
    return float(d1[0]), float(d2[0])


@dataclass
class WeightedRicciReport:
    kind: str
    x: list
    v: list
    t_plus: float
    t_minus: float
    ric: float
    psi1: float
    psi2: float
    ric_n: float
    ric_N: list
    ric_inf: float
    input_speed: float = 1.0
    ric_error: float = 0.0
    oracle: dict | None = None
    deviations: dict = field(default_factory=dict)

    def value_at(self, N):
        for key, val in self.ric_N:
            if key == N:
                return val
        raise KeyError(N)


def oracle_for(kind: MetricKind, n: int, tp: float, tm: float, Ns) -> dict | None:
    if kind is FUNK:
        return funk_oracle(n, Ns)
    if kind is HILBERT:
        return hilbert_oracle(tp, tm, n, Ns)
    # reverse Funk: the reversed geodesic sees the Funk picture with psi1 negated
    rec = funk_oracle(n, Ns)
    rec["psi1"] = -rec["psi1"]
    return rec


def _deviations(report: WeightedRicciReport, oracle: dict) -> dict:
    dev = {k: abs(getattr(report, k) - oracle[k]) for k in ("ric", "psi1", "psi2", "ric_inf")}
    ric_N_dev = []
    for (N, val), (_, ref) in zip(report.ric_N, oracle["ric_N"]):
        if math.isinf(val) and math.isinf(ref) and (val > 0) == (ref > 0):
            ric_N_dev.append((N, 0.0))
        else:
            ric_N_dev.append((N, abs(val - ref)))
    dev["ric_N"] = ric_N_dev
    return dev


def weighted_ricci(kind, body: ConvexBody, x, v, N_list=(INF,), scheme: DiffScheme = DEFAULT_SCHEME,
                   ricci_route: str = "graph", psi_route: str = "graph") -> WeightedRicciReport:
    """Assemble ``Ric_N`` for every requested ``N`` at the unit vector ``v / F(v)``."""
    kind = MetricKind.parse(kind)
    n = body.n
    Ns = _sorted_Ns(N_list, n)
    x, vhat, F = _unit(kind, body, x, v)
    tp, tm = body.chord_params(x, vhat)
    tp, tm = float(tp[0]), float(tm[0])
    rep_ric = ricci(kind, body, x, vhat, scheme, route=ricci_route)
    psi1, psi2 = psi_derivatives(kind, body, x, vhat, scheme, route=psi_route)
    ric = rep_ric.ricci_value
    report = WeightedRicciReport(
        kind=kind.value,
        x=x.tolist(),
        v=vhat.tolist(),
        t_plus=tp,
        t_minus=tm,
        ric=ric,
        psi1=psi1,
        psi2=psi2,
        ric_n=assemble(ric, psi1, psi2, n, n),
        ric_N=[(N, assemble(ric, psi1, psi2, n, N)) for N in Ns],
        ric_inf=ric + psi2,
        input_speed=F,
        ric_error=rep_ric.estimated_error,
    )
    oracle = oracle_for(kind, n, tp, tm, Ns)
    report.oracle = oracle
    report.deviations = _deviations(report, oracle)
    return report


def sample_tangent(body: ConvexBody, kind: MetricKind, seed: int, index: int, shrink: float = 0.85):
    """Seeded interior point and unit direction for sample ``index``.

    Uses its own generator keyed by ``(seed, index)`` so sweeps are
    order-independent.
    """
    rng = np.random.default_rng([seed, index])
    ref = body.reference_point
    while True:
        y = rng.uniform(body.box_lo, body.box_hi)
        if body.phi(y) < 0:
            break
    x = ref + shrink * (y - ref)
    v = sample_directions(body.n, 1, rng)[0]
    return x, v / finsler_norm(kind, body, x, v)


def default_Ns(n: int):
    return [n + 1, n + 2, 2 * n, INF]


def verify_theorems(kind, body: ConvexBody, sample_count: int = 30, seed: int = 0, tol: float = 2e-3,
                    psi_tol: float | None = None, N_list=None, scheme: DiffScheme = DEFAULT_SCHEME) -> dict:
    """Sweep seeded unit vectors and compare against the closed forms.

    Returns a plain dict: worst deviations per field, bound membership for
    Hilbert, failing sample indices and a pass flag.  Failures are data.
    """
    kind = MetricKind.parse(kind)
    n = body.n
    Ns = _sorted_Ns(default_Ns(n) if N_list is None else N_list, n)
    if psi_tol is None:
        psi_tol = 1e-5 if kind is FUNK else 1e-4
    margin = strong_convexity_margin(body, 256, seed)
    warnings = []
    if not margin > 1e-9:
        warnings.append(f"strong convexity margin {margin:.3g} is not positive at sampled boundary points")
    worst = {"ric": 0.0, "psi1": 0.0, "psi2": 0.0, "ric_inf": 0.0}
    worst_N = {N: 0.0 for N in Ns}
    ric_n_all_neg_inf = True
    bounds_ok = True
    failing = []
    ric_inf_values = []
    for i in range(sample_count):
        x, v = sample_tangent(body, kind, seed, i)
        rep = weighted_ricci(kind, body, x, v, Ns, scheme)
        ric_inf_values.append(rep.ric_inf)
        dev = rep.deviations
        bad = dev["psi1"] > psi_tol or dev["ric_inf"] > tol or dev["ric"] > tol
        for k in worst:
            worst[k] = max(worst[k], dev[k])
        for N, d in dev["ric_N"]:
            worst_N[N] = max(worst_N[N], d)
            bad |= d > tol
        if kind is FUNK or kind is REVERSE_FUNK:
            ric_n_all_neg_inf &= rep.ric_n == -INF
            bad |= rep.ric_n != -INF
        if kind is HILBERT:
            inside = -(n - 1) - tol < rep.ric_inf <= 2 + tol
            for N, val in rep.ric_N:
                if N == INF or N == n:
                    continue
                inside &= -(n - 1) - (n + 1) ** 2 / (N - n) - tol < val <= 2 + tol
            bounds_ok &= inside
            bad |= not inside
        if bad:
            failing.append(i)
    report = {
        "kind": kind.value,
        "n": n,
        "samples": sample_count,
        "seed": seed,
        "tol": tol,
        "psi_tol": psi_tol,
        "strong_convexity_margin": margin,
        "warnings": warnings,
        "max_dev": worst,
        "max_dev_ric_N": [(N, worst_N[N]) for N in Ns],
        "ric_inf_range": [min(ric_inf_values), max(ric_inf_values)] if ric_inf_values else [],
        "failing_samples": failing,
    }
    if kind is HILBERT:
        report["bounds_ok"] = bounds_ok
    else:
        report["ric_n_all_neg_inf"] = ric_n_all_neg_inf
    report["passed"] = not failing
    return report
