"""Compiled vs pure-numpy chord solver timing.

    python3 benchmarks/bench_kernels.py [--lanes 200000] [--repeat 5]

Lanes are uniform interior points of each body with Gaussian directions,
the same workload the Monte Carlo volume estimator generates.  Reports
the best of ``--repeat`` runs and the largest root disagreement.
"""

import argparse
import time
import warnings

import numpy as np

from funkhilbert import kernels
from funkhilbert.domain import ellipsoid, pnorm_ball, regular_polygon_body


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lanes", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.solve_forward_compiled is None:
        raise SystemExit("compiled extension not built; reinstall with Cython available")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        bodies = {
            "ellipse(2,1)": ellipsoid([2.0, 1.0]),
            "ellipsoid(2,1,1.5)": ellipsoid([2.0, 1.0, 1.5]),
            "p4 ball": pnorm_ball(4.0),
            "logsumexp hexagon": regular_polygon_body(6, beta=3.0),
        }
    rng = np.random.default_rng(0)
    print(f"{'body':<22}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>10}{'max |dt|':>12}")
    for name, body in bodies.items():
        X = rng.uniform(body.box_lo, body.box_hi, size=(args.lanes, body.n))
        X = X[body.phi(X) < 0]
        V = rng.standard_normal(X.shape)
        umax = 1.01 * body.diameter / np.linalg.norm(V, axis=1)
        call = (body.family, X, V, umax, body.center, body.mat, body.offsets, body.s1, body.s2)
        t_py = _best(lambda: kernels.solve_forward_py(*call), args.repeat)
        t_c = _best(lambda: kernels.solve_forward_compiled(*call), args.repeat)
        diff = np.max(np.abs(kernels.solve_forward_py(*call)[0] - kernels.solve_forward_compiled(*call)[0]))
        print(f"{name:<22}{t_py:>12.4f}{t_c:>14.4f}{t_py / t_c:>9.1f}x{diff:>12.1e}")


if __name__ == "__main__":
    main()
