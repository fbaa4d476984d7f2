"""Acceptance criteria 1-10.

Each test records one ``CRITERION k: PASS|FAIL`` line (printed in the pytest
terminal summary, or directly when this file is run as a script) and then
asserts.  Tolerances are the stated ones; nothing is loosened here.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from funkhilbert.curvature import klein_field, ricci, ricci_of_field
from funkhilbert.domain import sample_directions, unit_ball
from funkhilbert.finsler import FUNK, HILBERT, REVERSE_FUNK, finsler_norm, funk_distance, hilbert_distance
from funkhilbert.measure import bishop_gromov_check, corollary_K, forward_ball_volume
from funkhilbert.tensor import (
    inner_product,
    metric_tensor,
    metric_tensor_graph_oracle,
    metric_tensor_horizontal,
    okada_residual,
    uniform_convexity_estimate,
)
from funkhilbert.wricci import sample_tangent, verify_theorems, weighted_ricci

from conftest import BODIES, interior_points

RESULTS: dict[int, str] = {}
BALL3 = unit_ball(3)
TENSOR_BODIES = dict(BODIES, ball3=BALL3)


def record(k, passed, detail, t0):
    line = f"CRITERION {k}: {'PASS' if passed else 'FAIL'}  {detail}  [{time.perf_counter() - t0:.1f}s]"
    RESULTS[k] = line
    print(line)
    return passed


def _ball_points(n, count, rng, rmax=0.99):
    d = sample_directions(n, count, rng)
    r = rmax * rng.uniform(0, 1, count) ** (1.0 / n)
    return d * r[:, None]


def test_criterion_1_distance_oracles():
    t0 = time.perf_counter()
    worst_klein = 0.0
    for n in (2, 3):
        ball = unit_ball(n)
        rng = np.random.default_rng([1, n])
        X, Y = _ball_points(n, 1000, rng), _ball_points(n, 1000, rng)
        for x, y in zip(X, Y):
            ref = math.acosh((1 - x @ y) / math.sqrt((1 - x @ x) * (1 - y @ y)))
            worst_klein = max(worst_klein, abs(hilbert_distance(ball, x, y) - ref))
    worst_sym = 0.0
    for name, body in BODIES.items():
        P = interior_points(body, 400, seed=2, shrink=0.98)
        for x, y in zip(P[:200], P[200:]):
            resid = 2 * hilbert_distance(body, x, y) - funk_distance(body, x, y) - funk_distance(body, y, x)
            worst_sym = max(worst_sym, abs(resid))
    ok = worst_klein <= 1e-10 and worst_sym <= 1e-12
    assert record(1, ok, f"max|d_H - arccosh| = {worst_klein:.2e} (<=1e-10), "
                  f"max|2d_H - d_F - d_F'| = {worst_sym:.2e} (<=1e-12)", t0)


def test_criterion_2_okada_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for name, body in BODIES.items():
        for kind in (FUNK, REVERSE_FUNK):
            for i in range(100):
                x, v = sample_tangent(body, kind, 2, i)
                worst = max(worst, okada_residual(kind, body, x, v))
    assert record(2, worst <= 1e-6, f"max Okada residual = {worst:.2e} (<=1e-6)", t0)


def _rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def test_criterion_3_tensor_agreement():
    t0 = time.perf_counter()
    worst_agree = worst_vv = 0.0
    for name, body in TENSOR_BODIES.items():
        for kind in (FUNK, HILBERT):
            for i in range(50):
                x, v = sample_tangent(body, kind, 3, i)
                gv = metric_tensor(kind, body, x, v)
                gg = metric_tensor_graph_oracle(kind, body, x, v)
                tensors = [gv, gg]
                if kind is FUNK:
                    tensors.append(metric_tensor_horizontal(body, x, v, kind=kind))
                for a in range(len(tensors)):
                    for b in range(a + 1, len(tensors)):
                        worst_agree = max(worst_agree, _rel(tensors[a], tensors[b]))
                F2 = finsler_norm(kind, body, x, v) ** 2
                for g in tensors:
                    worst_vv = max(worst_vv, abs(inner_product(g, v, v) / F2 - 1.0))
    ok = worst_agree <= 1e-5 and worst_vv <= 1e-7
    assert record(3, ok, f"max rel. Frobenius disagreement = {worst_agree:.2e} (<=1e-5), "
                  f"max |g_v(v,v)/F^2 - 1| = {worst_vv:.2e} (<=1e-7)", t0)


def test_criterion_4_ricci_constants():
    t0 = time.perf_counter()
    worst_dev = 0.0
    worst_spread = 0.0
    failures = []
    for name, body in BODIES.items():
        n = body.n
        for kind, const in ((FUNK, -(n - 1) / 4.0), (HILBERT, -(n - 1.0))):
            tol = 1e-3 if (kind is FUNK or n == 2) else 5e-3
            vals = np.array([ricci(kind, body, *sample_tangent(body, kind, 4, i)).ricci_value for i in range(30)])
            dev = float(np.max(np.abs(vals - const)))
            spread = float(vals.max() - vals.min())
            worst_dev = max(worst_dev, dev)
            if n == 2:
                worst_spread = max(worst_spread, spread)
            if dev > tol or (n == 2 and spread > 2e-3):
                failures.append(f"{name}/{kind.value}")
    worst_klein = 0.0
    for n in (2, 3):
        field = klein_field(n)
        rng = np.random.default_rng([4, n])
        for _ in range(10):
            x = 0.5 * rng.uniform(-1, 1, n) / math.sqrt(n)
            v = rng.standard_normal(n)
            v /= math.sqrt(v @ field(x) @ v)
            worst_klein = max(worst_klein, abs(ricci_of_field(field, x, v, step=1e-2).ricci_value + (n - 1)))
    ok = not failures and worst_klein <= 1e-4
    assert record(4, ok, f"max|Ric - const| = {worst_dev:.2e} (<=1e-3/5e-3), n=2 spread = {worst_spread:.2e} "
                  f"(<=2e-3), Klein gate dev = {worst_klein:.2e} (<=1e-4)"
                  + (f", failing: {failures}" if failures else ""), t0)


def test_criterion_5_funk_theorem():
    t0 = time.perf_counter()
    psi1 = ric_inf = ric_N = 0.0
    all_neg_inf = True
    for name, body in BODIES.items():
        rep = verify_theorems(FUNK, body, sample_count=30, seed=5, tol=2e-3, psi_tol=1e-5)
        psi1 = max(psi1, rep["max_dev"]["psi1"])
        ric_inf = max(ric_inf, rep["max_dev"]["ric_inf"])
        ric_N = max(ric_N, max(d for _, d in rep["max_dev_ric_N"]))
        all_neg_inf &= rep["ric_n_all_neg_inf"]
    ok = psi1 <= 1e-5 and ric_inf <= 2e-3 and ric_N <= 2e-3 and all_neg_inf
    assert record(5, ok, f"max|psi1 - (n+1)/2| = {psi1:.2e}, max|Ric_inf + (n-1)/4| = {ric_inf:.2e}, "
                  f"max|Ric_N - formula| = {ric_N:.2e}, Ric_n = -inf everywhere: {all_neg_inf}", t0)


def test_criterion_6_hilbert_theorem():
    t0 = time.perf_counter()
    psi1 = ric_inf = ric_N = 0.0
    bounds = True
    lo, hi = math.inf, -math.inf
    for name, body in BODIES.items():
        rep = verify_theorems(HILBERT, body, sample_count=30, seed=6, tol=2e-3, psi_tol=1e-4)
        psi1 = max(psi1, rep["max_dev"]["psi1"])
        ric_inf = max(ric_inf, rep["max_dev"]["ric_inf"])
        ric_N = max(ric_N, max(d for _, d in rep["max_dev_ric_N"]))
        bounds &= rep["bounds_ok"]
        lo, hi = min(lo, rep["ric_inf_range"][0]), max(hi, rep["ric_inf_range"][1])
    center = [weighted_ricci(HILBERT, unit_ball(n), np.zeros(n), np.eye(n)[0]).ric_inf for n in (2, 3)]
    center_dev = max(abs(c - 2.0) for c in center)
    ok = psi1 <= 1e-4 and ric_inf <= 2e-3 and ric_N <= 2e-3 and bounds and center_dev <= 2e-3
    assert record(6, ok, f"max|psi1 - oracle| = {psi1:.2e}, max|Ric_inf - oracle| = {ric_inf:.2e}, "
                  f"max|Ric_N - oracle| = {ric_N:.2e}, Ric_inf range [{lo:.4f}, {hi:.4f}], bounds held: {bounds}, "
                  f"center |Ric_inf - 2| = {center_dev:.2e}", t0)


def test_criterion_7_ball_volumes():
    t0 = time.perf_counter()
    disk = BODIES["disk"]
    worst_z = 0.0
    for kind, exact in ((FUNK, lambda r: math.pi * (1 - math.exp(-r)) ** 2),
                        (HILBERT, lambda r: math.pi * math.tanh(r) ** 2)):
        for r in (0.5, 1.0, 2.0):
            est = forward_ball_volume(kind, disk, [0.0, 0.0], r, samples=200_000, seed=0)
            worst_z = max(worst_z, abs(est.value - exact(r)) / est.std_error)
    assert record(7, worst_z <= 3.0, f"max |estimate - closed form| = {worst_z:.2f} standard errors (<=3)", t0)


def test_criterion_8_bishop_gromov():
    t0 = time.perf_counter()
    total = 0
    grid = [0.25 * k for k in range(1, 9)]
    for name in ("disk", "ellipse"):
        body = BODIES[name]
        N = body.n + 2
        for kind in (FUNK, HILBERT):
            rep = bishop_gromov_check(kind, body, body.reference_point, N, corollary_K(kind, body.n, N), grid, seed=0)
            total += len(rep["violations"])
    assert record(8, total == 0, f"{total} flagged violations beyond 3 sigma over 4 runs x 8 radii", t0)


def test_criterion_9_uniform_convexity():
    t0 = time.perf_counter()
    disk = BODIES["disk"]
    center = uniform_convexity_estimate(HILBERT, disk, [0.0, 0.0])
    funk = [uniform_convexity_estimate(FUNK, disk, [1 - 10.0**-k, 0.0]) for k in (2, 3, 4, 5)]
    increasing = all(a < b for a, b in zip(funk, funk[1:]))
    ok = abs(center - 1.0) <= 1e-6 and increasing and funk[-1] > 10
    assert record(9, ok, f"Hilbert center C = {center:.9f}, Funk C at 1-10^-k (k=2..5) = "
                  + ", ".join(f"{c:.1f}" for c in funk), t0)


def test_criterion_10_determinism(tmp_path):
    t0 = time.perf_counter()
    args = [sys.executable, "-m", "funkhilbert", "verify", "--metric", "hilbert", "--samples", "10", "--seed", "3"]
    runs = [subprocess.run(args, capture_output=True, check=False).stdout for _ in range(2)]
    ok = runs[0] == runs[1] and len(runs[0]) > 0
    assert record(10, ok, f"two verify runs, {len(runs[0])} bytes each, identical: {runs[0] == runs[1]}", t0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
