import sys
import warnings

import numpy as np
import pytest

from funkhilbert.domain import ellipsoid, pnorm_ball, regular_polygon_body, unit_ball


def acceptance_bodies():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return {
            "disk": unit_ball(2),
            "ellipse": ellipsoid([2.0, 1.0]),
            "ellipsoid3": ellipsoid([2.0, 1.0, 1.5]),
            "hexagon": regular_polygon_body(6, beta=3.0),
            "p4ball": pnorm_ball(4.0),
        }


BODIES = acceptance_bodies()


@pytest.fixture(params=sorted(BODIES))
def body(request):
    return BODIES[request.param]


@pytest.fixture
def disk():
    return BODIES["disk"]


@pytest.fixture
def ellipse():
    return BODIES["ellipse"]


def interior_points(body, count, seed, shrink=0.9):
    """Seeded interior points: reference point plus a scaled fraction of the chord."""
    from funkhilbert.domain import sample_directions

    rng = np.random.default_rng(seed)
    dirs = sample_directions(body.n, count, rng)
    x0 = np.broadcast_to(body.reference_point, dirs.shape)
    tp, _ = body.chord_params(x0, dirs)
    frac = shrink * rng.uniform(0, 1, count) ** (1.0 / body.n)
    return x0 + (frac * tp)[:, None] * dirs


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
