"""Lebesgue volume of forward metric balls and the Bishop-Gromov ratio check."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import quad

from .domain import ConvexBody
from .errors import BadKError, BadNError, OutsideError
from .finsler import HILBERT, MetricKind, distances_from

BATCH = 65536


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    std_error: float
    method: str
    samples: int
    seed: int

    def to_dict(self):
        return asdict(self)


def default_samples(n: int) -> int:
    return 200_000 if n <= 2 else 1_000_000


def _mc_distances(kind, body, x, samples, seed):
    """Distances from ``x`` to the interior uniform samples of the bounding box.

    Batches draw from substreams keyed by ``(seed, batch_index)``; points
    outside ``D`` get ``inf``.
    """
    out = np.empty(samples)
    done = 0
    batch = 0
    while done < samples:
        k = min(BATCH, samples - done)
        rng = np.random.default_rng([seed, batch])
        Y = rng.uniform(body.box_lo, body.box_hi, size=(k, body.n))
        inside = body.phi(Y) < 0
        d = np.full(k, np.inf)
        if inside.any():
            d[inside] = distances_from(kind, body, x, Y[inside])
        out[done:done + k] = d
        done += k
        batch += 1
    return out


def _grid_distances(kind, body, x, per_axis):
    axes = [np.linspace(lo, hi, per_axis, endpoint=False) + 0.5 * (hi - lo) / per_axis
            for lo, hi in zip(body.box_lo, body.box_hi)]
    Y = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, body.n)
    inside = body.phi(Y) < 0
    d = np.full(len(Y), np.inf)
    d[inside] = distances_from(kind, body, x, Y[inside])
    return d


def ball_volume_profile(kind, body: ConvexBody, x, radii, method: str = "monte_carlo",
                        samples: int | None = None, seed: int = 0) -> list[VolumeEstimate]:
    """Volume estimates for several radii from one shared sample set."""
    kind = MetricKind.parse(kind)
    x = np.asarray(x, dtype=float)
    if not body.phi(x) < 0:
        raise OutsideError(f"ball center {x.tolist()} is not interior")
    radii = [float(r) for r in radii]
    if any(r < 0 for r in radii):
        raise ValueError("radii must be nonnegative")
    samples = default_samples(body.n) if samples is None else int(samples)
    box_volume = float(np.prod(body.box_hi - body.box_lo))
    if method == "monte_carlo":
        d = _mc_distances(kind, body, x, samples, seed)
        out = []
        for r in radii:
            if r == 0:
                out.append(VolumeEstimate(0.0, 0.0, method, samples, seed))
                continue
            p = float(np.count_nonzero(d <= r)) / samples
            se = box_volume * math.sqrt(p * (1.0 - p) / samples)
            out.append(VolumeEstimate(box_volume * p, se, method, samples, seed))
        return out
    if method == "grid":
        per_axis = max(2, int(round(samples ** (1.0 / body.n))))
        fine = _grid_distances(kind, body, x, per_axis)
        # coarse grid is deliberately not nested in the fine one
        per_coarse = per_axis // 2 + 1
        coarse = _grid_distances(kind, body, x, per_coarse)
        cell_f = box_volume / per_axis**body.n
        cell_c = box_volume / per_coarse**body.n
        out = []
        for r in radii:
            vf = cell_f * np.count_nonzero(fine <= r) if r > 0 else 0.0
            vc = cell_c * np.count_nonzero(coarse <= r) if r > 0 else 0.0
            # coarse/fine discrepancy as the error scale (boundary-cell dominated)
            out.append(VolumeEstimate(float(vf), float(abs(vf - vc)), method, per_axis**body.n, seed))
        return out
    raise ValueError(f"unknown volume method {method!r}")


def forward_ball_volume(kind, body: ConvexBody, x, r: float, method: str = "monte_carlo",
                        samples: int | None = None, seed: int = 0) -> VolumeEstimate:
    """Lebesgue measure of ``{y in D : d(x, y) <= r}``."""
    return ball_volume_profile(kind, body, x, [r], method, samples, seed)[0]


def corollary_K(kind, n: int, N: float) -> float:
    """Lower weighted-Ricci bound ``K`` valid on every domain for this metric."""
    kind = MetricKind.parse(kind)
    if N == math.inf:
        return -(n - 1) / 4.0 if kind is not HILBERT else -(n - 1.0)
    if kind is HILBERT:
        return -(n - 1.0) - (n + 1) ** 2 / (N - n)
    return -(n - 1) / 4.0 - (n + 1) ** 2 / (4.0 * (N - n))


def model_volume(r: float, K: float, N: float) -> float:
    """``int_0^r sinh(t sqrt(-K/(N-1)))^(N-1) dt`` (normalization constant dropped)."""
    k = math.sqrt(-K / (N - 1.0))
    val, _ = quad(lambda t: math.sinh(k * t) ** (N - 1.0), 0.0, r, epsrel=1e-10, epsabs=0.0, limit=200)
    return val


def bishop_gromov_check(kind, body: ConvexBody, x, N: float, K: float, r_grid, samples: int | None = None,
                        seed: int = 0, sigmas: float = 3.0) -> dict:
    """Monotonicity of ``vol B+(x, r) / V_{K,N}(r)`` along ``r_grid``.

    An increase between consecutive radii is flagged only when it exceeds
    ``sigmas`` combined standard errors.
    """
    kind = MetricKind.parse(kind)
    n = body.n
    if not N > n or math.isinf(N):
        raise BadNError(f"Bishop-Gromov needs n < N < inf, got N={N}")
    if not K < 0:
        raise BadKError(f"K must be negative, got {K}")
    radii = sorted(float(r) for r in r_grid)
    if any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    vols = ball_volume_profile(kind, body, x, radii, "monte_carlo", samples, seed)
    dens = [model_volume(r, K, N) for r in radii]
    ratios = [v.value / dd for v, dd in zip(vols, dens)]
    errs = [v.std_error / dd for v, dd in zip(vols, dens)]
    violations = []
    for i in range(len(radii) - 1):
        rise = ratios[i + 1] - ratios[i]
        allowed = sigmas * math.hypot(errs[i], errs[i + 1])
        if rise > allowed:
            violations.append({"index": i, "r0": radii[i], "r1": radii[i + 1], "rise": rise, "allowed": allowed})
    return {
        "kind": kind.value,
        "n": n,
        "N": N,
        "K": K,
        "x": np.asarray(x, dtype=float).tolist(),
        "radii": radii,
        "volumes": [v.value for v in vols],
        "std_errors": [v.std_error for v in vols],
        "model_volumes": dens,
        "ratios": ratios,
        "ratio_errors": errs,
        "violations": violations,
        "samples": vols[0].samples if vols else 0,
        "seed": seed,
    }
