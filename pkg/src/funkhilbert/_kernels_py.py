"""Pure numpy batch chord solver (fallback for the compiled ``_kernels``).

For each lane we find the unique root ``u* in (0, umax]`` of
``f(u) = phi(x + u v)``.  ``f`` is convex with ``f(0) < 0 < f(umax)``, so
Newton started at ``umax`` decreases monotonically onto the root; a
bisection safeguard on the running bracket catches the cases where
floating point breaks that picture.  All lanes iterate in lockstep and
drop out through a mask once converged.

Status codes: 0 ok, 1 start point not interior, 2 bracket failure or no
convergence within ``max_iter``.
"""

import numpy as np

ELLIPSOID = 0
PNORM = 1
LOGSUMEXP = 2


def _make_line(family, X, V, center, mat, offsets, s1, s2):
    """Return ``evaluate(u, idx) -> (f, df)`` restricted to lanes ``idx``."""
    if family == ELLIPSOID:
        y0 = X - center
        mv = V @ mat.T
        qa = np.einsum("ij,ij->i", V, mv)
        qb = np.einsum("ij,ij->i", y0, mv)
        qc = np.einsum("ij,ij->i", y0, y0 @ mat.T) - 1.0

        def evaluate(u, idx):
            a, b = qa[idx], qb[idx]
            return (a * u + 2.0 * b) * u + qc[idx], 2.0 * (a * u + b)

    elif family == PNORM:
        y0 = X - center
        r, p = s1, s2

        def evaluate(u, idx):
            z = (y0[idx] + u[:, None] * V[idx]) / r
            az = np.abs(z)
            f = np.sum(az**p, axis=1) - 1.0
            df = np.sum(p * np.copysign(az ** (p - 1.0), z) * V[idx] / r, axis=1)
            return f, df

    elif family == LOGSUMEXP:
        ax = X @ mat.T - offsets
        av = V @ mat.T
        beta = s1

        def evaluate(u, idx):
            s = beta * (ax[idx] + u[:, None] * av[idx])
            smax = s.max(axis=1)
            w = np.exp(s - smax[:, None])
            tot = w.sum(axis=1)
            return (smax + np.log(tot)) / beta, (w * av[idx]).sum(axis=1) / tot

    else:
        raise ValueError(f"unknown family code {family}")
    return evaluate


def solve_forward(family, X, V, umax, center, mat, offsets, s1, s2, max_iter=200):
    X = np.ascontiguousarray(X, dtype=float)
    V = np.ascontiguousarray(V, dtype=float)
    m = X.shape[0]
    evaluate = _make_line(family, X, V, center, mat, offsets, s1, s2)
    everyone = np.arange(m)
    t_out = np.full(m, np.nan)
    status = np.zeros(m, dtype=np.int8)
    iters = np.zeros(m, dtype=np.int32)

    f0, _ = evaluate(np.zeros(m), everyone)
    hi = np.asarray(umax, dtype=float).copy()
    fhi, dfhi = evaluate(hi, everyone)
    bad_start = ~(f0 < 0.0)
    bad_bracket = ~bad_start & ~(fhi > 0.0)
    status[bad_start] = 1
    status[bad_bracket] = 2

    active = np.flatnonzero(status == 0)
    lo = np.zeros(m)
    u = hi.copy()
    f = fhi.copy()
    df = dfhi.copy()
    it = 0
    while active.size and it < max_iter:
        it += 1
        iters[active] = it
        ua, fa, dfa = u[active], f[active], df[active]
        exact = fa == 0.0
        neg = fa < 0.0
        lo[active] = np.where(neg, ua, lo[active])
        hi[active] = np.where(~neg, ua, hi[active])
        loa, hia = lo[active], hi[active]
        with np.errstate(divide="ignore", invalid="ignore"):
            unew = np.where(dfa > 0.0, ua - fa / dfa, loa - 1.0)
        outside = ~((unew > loa) & (unew < hia))
        unew = np.where(outside, 0.5 * (loa + hia), unew)
        unew = np.where(exact, ua, unew)
        du = unew - ua
        fn, dfn = evaluate(unew, active)
        u[active] = unew
        f[active] = np.where(exact, fa, fn)
        df[active] = np.where(exact, dfa, dfn)
        done = exact | (np.abs(du) <= 1e-15 * np.abs(unew)) | (hia - loa <= 1e-15 * hia)
        active = active[~done]

    ok = status == 0
    tol = 1e-12 * (1.0 + np.abs(df))
    status[ok & (np.abs(f) > tol)] = 2
    t_out[ok] = u[ok]
    return t_out, status, iters
