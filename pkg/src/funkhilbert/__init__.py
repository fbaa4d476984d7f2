"""Funk, reverse Funk and Hilbert geometries of smooth convex bodies.

Distances, fundamental tensors, Ricci and weighted Ricci curvature, and
metric-ball volumes, with closed-form oracles for cross-checking.
"""

__version__ = "0.1.0"

from .domain import (
    ConvexBody,
    DomainSpec,
    classify_point,
    ellipsoid,
    load_domain,
    logsumexp_body,
    pnorm_ball,
    read_spec,
    regular_polygon_body,
    strong_convexity_margin,
    unit_ball,
)
from .errors import FinslerError
from .finsler import FUNK, HILBERT, REVERSE_FUNK, MetricKind, distance, finsler_norm, funk_distance, geodesic_point, hilbert_distance
from .tensor import metric_tensor, metric_tensor_graph_oracle, metric_tensor_horizontal, okada_residual, uniform_convexity_estimate
from .curvature import ricci
from .wricci import verify_theorems, weighted_ricci
from .measure import bishop_gromov_check, forward_ball_volume
