import numpy as np
import pytest

from funkhilbert.diff import DiffScheme, gradient_hessian, richardson
from funkhilbert.finsler import FUNK, HILBERT, REVERSE_FUNK, finsler_norm
from funkhilbert.tensor import (
    inner_product,
    metric_tensor,
    metric_tensor_graph_oracle,
    metric_tensor_horizontal,
    okada_residual,
    uniform_convexity_estimate,
)

from conftest import interior_points


def test_richardson_removes_h2_term():
    h = 0.1 * 2.0 ** -np.arange(3)
    vals = 1.0 + 3.0 * h**2 + 5.0 * h**4
    best, _ = richardson(vals, order=2, ratio=2)
    assert best == pytest.approx(1.0, abs=1e-12)


def test_gradient_hessian_of_quadratic():
    A = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, -0.3], [0.0, -0.3, 3.0]])
    b = np.array([1.0, -2.0, 0.5])

    def f(X):
        return 0.5 * np.einsum("ki,ij,kj->k", X, A, X) + X @ b

    x = np.array([0.2, -0.1, 0.4])
    grad, _, hess, _ = gradient_hessian(f, x, 1e-2, 2)
    assert np.allclose(grad, A @ x + b, atol=1e-10)
    assert np.allclose(hess, A, atol=1e-8)


def test_center_tensor_is_identity(disk):
    for kind in (FUNK, REVERSE_FUNK, HILBERT):
        for v in ([1.0, 0.0], [0.6, 0.8]):
            assert np.allclose(metric_tensor(kind, disk, [0, 0], v), np.eye(2), atol=1e-7)
            assert np.allclose(metric_tensor_graph_oracle(kind, disk, [0, 0], v), np.eye(2), atol=1e-12)


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.mark.parametrize("kind", [FUNK, REVERSE_FUNK, HILBERT])
def test_routes_agree(body, kind):
    X = interior_points(body, 5, seed=31)
    V = np.random.default_rng(32).standard_normal(X.shape)
    for x, v in zip(X, V):
        gv = metric_tensor(kind, body, x, v)
        gg = metric_tensor_graph_oracle(kind, body, x, v)
        assert _rel(gv, gg) < 1e-5
        if kind is not HILBERT:
            assert _rel(metric_tensor_horizontal(body, x, v, kind=kind), gg) < 1e-5
        F = finsler_norm(kind, body, x, v)
        assert inner_product(gg, v, v) == pytest.approx(F**2, rel=1e-10)
        assert inner_product(gv, v, v) == pytest.approx(F**2, rel=1e-7)


def test_tensor_zero_homogeneous(ellipse):
    x, v = np.array([0.4, -0.3]), np.array([0.2, 0.7])
    g1 = metric_tensor_graph_oracle(HILBERT, ellipse, x, v)
    g2 = metric_tensor_graph_oracle(HILBERT, ellipse, x, 3.7 * v)
    assert np.allclose(g1, g2, rtol=1e-12)


@pytest.mark.parametrize("kind", [FUNK, REVERSE_FUNK])
def test_okada_identity(body, kind):
    X = interior_points(body, 5, seed=41)
    V = np.random.default_rng(42).standard_normal(X.shape)
    for x, v in zip(X, V):
        assert okada_residual(kind, body, x, v) <= 1e-6


def test_okada_rejects_hilbert(disk):
    with pytest.raises(ValueError):
        okada_residual(HILBERT, disk, [0, 0], [1, 0])


def test_horizontal_rejects_hilbert(disk):
    with pytest.raises(ValueError):
        metric_tensor_horizontal(disk, [0, 0], [1, 0], kind=HILBERT)


def test_step_override_still_accurate(ellipse):
    x, v = np.array([0.5, 0.1]), np.array([1.0, -0.4])
    g = metric_tensor(FUNK, ellipse, x, v, DiffScheme(step=5e-3))
    assert _rel(g, metric_tensor_graph_oracle(FUNK, ellipse, x, v)) < 1e-5


def test_uniform_convexity_center(disk):
    # both metrics are Euclidean at the center of the disk, so the ratio is 1
    assert uniform_convexity_estimate(HILBERT, disk, [0, 0], 40) == pytest.approx(1.0, abs=1e-6)
    assert uniform_convexity_estimate(FUNK, disk, [0, 0], 40) == pytest.approx(1.0, abs=1e-6)


def test_uniform_convexity_grows_toward_boundary(disk):
    est = [uniform_convexity_estimate(FUNK, disk, [1 - 10.0**-k, 0.0], 20) for k in (1, 2, 3)]
    assert est[0] < est[1] < est[2]
