"""Central finite differences with Richardson extrapolation.

All routines take a *batched* function ``f(points) -> values`` where
``points`` has shape ``(m, n)`` and ``values`` has shape ``(m, ...)``, so a
whole stencil is evaluated in one call (one trip through the chord kernel).
Stencils are the 5-point fourth-order ones; ``levels`` step sizes
``h, h/2, ...`` are combined by Richardson extrapolation on the ``h^4``
error term.  Each routine also returns an error estimate: the magnitude of
the last Richardson correction.
"""

from dataclasses import dataclass

import numpy as np

_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFFS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])


@dataclass(frozen=True)
class DiffScheme:
    """Step control for numerical differentiation.

    ``step`` is a fraction of the local safe radius (vertical derivatives use
    ``step * |v|``); ``levels`` is the number of Richardson step sizes.
    ``outer_factor`` scales the step of the outer (horizontal) derivatives
    taken of quantities that are themselves finite differences.
    """

    step: float = 1e-3
    levels: int = 2
    outer_factor: float = 10.0

    def shrunk(self, factor: float = 4.0) -> "DiffScheme":
        return DiffScheme(self.step / factor, self.levels, self.outer_factor)


def richardson(values, order: int = 4, ratio: float = 2.0):
    """Extrapolate a list of approximations taken at steps ``h, h/ratio, ...``.

    Returns ``(best, error_estimate)``.
    """
    table = [np.asarray(v, dtype=float) for v in values]
    if len(table) == 1:
        return table[0], np.zeros_like(table[0])
    err = np.zeros_like(table[0])
    p = order
    while len(table) > 1:
        fac = ratio**p
        new = [(fac * table[k + 1] - table[k]) / (fac - 1.0) for k in range(len(table) - 1)]
        err = np.abs(new[-1] - table[-1])
        table = new
        p += 2
    return table[0], err


def _stencil_points(x, directions, h, levels):
    # shape (levels, ndir, 5, n)
    steps = h / 2.0 ** np.arange(levels)
    pts = (
        x[None, None, None, :]
        + steps[:, None, None, None] * _OFFS[None, None, :, None] * directions[None, :, None, :]
    )
    return pts, steps


def directional_derivatives(f, x, directions, h, levels=2, orders=(1, 2)):
    """First and/or second derivatives of ``f`` along each unit direction.

    Returns a dict ``order -> (values, err)``, values shaped ``(ndir, ...)``.
    """
    x = np.asarray(x, dtype=float)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    pts, steps = _stencil_points(x, directions, h, levels)
    L, D = levels, directions.shape[0]
    flat = pts.reshape(-1, x.size)
    vals = np.asarray(f(flat))
    vals = vals.reshape((L, D, 5) + vals.shape[1:])
    out = {}
    extra = vals.ndim - 3
    for order in orders:
        w = _D1 if order == 1 else _D2
        approx = np.tensordot(vals, w, axes=([2], [0])) if extra == 0 else np.einsum("ldk...,k->ld...", vals, w)
        scale = steps.reshape((L,) + (1,) * (approx.ndim - 1)) ** order
        approx = approx / scale
        out[order] = richardson(list(approx))
    return out


def gradient(f, x, h, levels=2):
    """Gradient of ``f`` at ``x``; for array-valued ``f`` the derivative index is first."""
    n = np.asarray(x).size
    res = directional_derivatives(f, x, np.eye(n), h, levels, orders=(1,))
    return res[1]


def _pair_directions(n):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    dirs = [np.eye(n)[i] for i in range(n)]
    s = 1.0 / np.sqrt(2.0)
    for i, j in pairs:
        e = np.zeros(n)
        e[i], e[j] = s, s
        dirs.append(e.copy())
        e[j] = -s
        dirs.append(e)
    return pairs, np.array(dirs)


def gradient_hessian(f, x, h, levels=2):
    """Gradient and Hessian of ``f`` at ``x`` from one batched stencil.

    Mixed partials come from polarization,
    ``d_i d_j f = (D^2_{u+} f - D^2_{u-} f) / 2`` with ``u+- = (e_i +- e_j)/sqrt 2``,
    so every stencil is a 1D fourth-order one.  Returns
    ``(grad, grad_err, hess, hess_err)``; for array-valued ``f`` the
    derivative indices lead.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    pairs, dirs = _pair_directions(n)
    res = directional_derivatives(f, x, dirs, h, levels, orders=(1, 2))
    d1, e1 = res[1]
    d2, e2 = res[2]
    tail = d2.shape[1:]
    hess = np.empty((n, n) + tail)
    herr = np.empty((n, n) + tail)
    for i in range(n):
        hess[i, i] = d2[i]
        herr[i, i] = e2[i]
    for k, (i, j) in enumerate(pairs):
        plus, minus = n + 2 * k, n + 2 * k + 1
        hess[i, j] = hess[j, i] = 0.5 * (d2[plus] - d2[minus])
        herr[i, j] = herr[j, i] = 0.5 * (e2[plus] + e2[minus])
    return d1[:n], e1[:n], hess, herr
