"""Command-line front end.

Exit codes: 0 ok, 2 usage error, 3 geometry error, 4 verification failure.
Reports go to stdout (or ``--output``) as JSON with fixed key order and
17 significant digits, or as two-column ``key,value`` CSV with the same
number formatting.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
import warnings

import numpy as np

from . import __version__
from .diff import DiffScheme
from .domain import classify_point, load_domain, read_spec, strong_convexity_margin, unit_ball
from .errors import FinslerError
from .finsler import HILBERT, MetricKind, distance, finsler_norm, funk_distance, hilbert_distance
from . import curvature, measure, tensor, wricci

EXIT_OK, EXIT_USAGE, EXIT_GEOMETRY, EXIT_VERIFY = 0, 2, 3, 4


class UsageError(Exception):
    pass


# -- serialization -----------------------------------------------------------

def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def to_json(obj, indent: int = 2) -> str:
    """Deterministic JSON: insertion-ordered keys, 17-digit floats, infinities as strings."""
    import json

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if o is None:
            return "null"
        if isinstance(o, str):
            return json.dumps(o)
        return format_number(o)

    return enc(_plain(obj), 0) + "\n"


def flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def to_csv(obj) -> str:
    out = io.StringIO()
    out.write("key,value\n")
    for key, val in flatten(_plain(obj)):
        if val is None:
            cell = ""
        elif isinstance(val, str):
            cell = val
        else:
            cell = format_number(val).strip('"')
        if any(c in cell for c in ',"\n'):
            cell = '"' + cell.replace('"', '""') + '"'
        out.write(f"{key},{cell}\n")
    return out.getvalue()


# -- argument helpers --------------------------------------------------------

def parse_vector(text: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse vector {text!r}; expected comma-separated decimals") from None
    if not vals:
        raise UsageError("empty vector literal")
    return np.array(vals)


def parse_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _build(path):
    return load_domain(read_spec(path))


def _body(args, *vectors):
    dims = {len(v) for v in vectors if v is not None}
    if len(dims) > 1:
        raise UsageError("point/vector literals have inconsistent dimensions")
    dim = dims.pop() if dims else None
    body = _build(args.domain) if args.domain else unit_ball(dim or 2)
    if dim is not None and dim != body.n:
        raise UsageError(f"literal has dimension {dim}, domain has dimension {body.n}")
    return body


def _scheme(args) -> DiffScheme:
    if getattr(args, "fd_step", None):
        if not args.fd_step > 0:
            raise UsageError("--fd-step must be positive")
        return DiffScheme(step=args.fd_step)
    return DiffScheme()


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _kind(args) -> MetricKind:
    return MetricKind.parse(args.metric)


# -- commands ----------------------------------------------------------------

def cmd_dist(args):
    _require(args, "from_", "to")
    x, y = parse_vector(args.from_), parse_vector(args.to)
    body = _body(args, x, y)
    kind = _kind(args)
    d_xy = distance(kind, body, x, y)
    d_yx = distance(kind, body, y, x)
    f_xy, f_yx = funk_distance(body, x, y), funk_distance(body, y, x)
    resid = abs(2 * hilbert_distance(body, x, y) - f_xy - f_yx)
    return {"metric": kind.value, "from": x, "to": y, "d_xy": d_xy, "d_yx": d_yx,
            "symmetrization_residual": resid}, EXIT_OK


def _report_dict(rep: wricci.WeightedRicciReport):
    out = {
        "kind": rep.kind, "x": rep.x, "v": rep.v, "input_speed": rep.input_speed,
        "t_plus": rep.t_plus, "t_minus": rep.t_minus,
        "ric": rep.ric, "psi1": rep.psi1, "psi2": rep.psi2,
        "ric_n": rep.ric_n,
        "ric_N": [{"N": N, "value": v} for N, v in rep.ric_N],
        "ric_inf": rep.ric_inf,
        "ric_error_estimate": rep.ric_error,
    }
    if rep.oracle is not None:
        o = rep.oracle
        out["oracle"] = {"ric": o["ric"], "psi1": o["psi1"], "psi2": o["psi2"], "ric_inf": o["ric_inf"],
                         "ric_N": [{"N": N, "value": v} for N, v in o["ric_N"]]}
        d = rep.deviations
        out["deviations"] = {"ric": d["ric"], "psi1": d["psi1"], "psi2": d["psi2"], "ric_inf": d["ric_inf"],
                             "ric_N": [{"N": N, "value": v} for N, v in d["ric_N"]]}
    return out


def cmd_wricci(args):
    _require(args, "point", "vector")
    x, v = parse_vector(args.point), parse_vector(args.vector)
    body = _body(args, x, v)
    Ns = [wricci.parse_N(t, body.n) for t in parse_list(args.N or "inf")]
    rep = wricci.weighted_ricci(_kind(args), body, x, v, Ns, _scheme(args))
    out = _report_dict(rep)
    tol = args.tol if args.tol is not None else 2e-3
    worst = max([rep.deviations[k] for k in ("ric", "psi1", "psi2", "ric_inf")]
                + [d for _, d in rep.deviations["ric_N"]])
    out["max_deviation"] = worst
    out["tol"] = tol
    code = EXIT_VERIFY if (args.strict and worst > tol) else EXIT_OK
    return out, code


def _sweep_tensors(kind, body, samples, seed, scheme):
    worst_vh = worst_graph = worst_vv = 0.0
    for i in range(samples):
        x, v = wricci.sample_tangent(body, kind, seed, 10_000 + i)
        g = tensor.metric_tensor(kind, body, x, v, scheme)
        gg = tensor.metric_tensor_graph_oracle(kind, body, x, v)
        worst_graph = max(worst_graph, np.linalg.norm(g - gg) / np.linalg.norm(gg))
        if kind is not HILBERT:
            gh = tensor.metric_tensor_horizontal(body, x, v, scheme, kind=kind)
            worst_vh = max(worst_vh, np.linalg.norm(g - gh) / np.linalg.norm(gh),
                           np.linalg.norm(gh - gg) / np.linalg.norm(gg))
        F = finsler_norm(kind, body, x, v)
        worst_vv = max(worst_vv, abs(tensor.inner_product(g, v, v) / F**2 - 1.0))
    return worst_graph, worst_vh, worst_vv


def cmd_verify(args):
    kind = _kind(args)
    body = _body(args)
    samples = args.samples if args.samples is not None else 30
    tol = args.tol if args.tol is not None else 2e-3
    scheme = _scheme(args)
    rep = wricci.verify_theorems(kind, body, samples, args.seed, tol, scheme=scheme)
    checks = []

    def add(name, value, limit, ok=None):
        passed = bool(value <= limit) if ok is None else bool(ok)
        checks.append({"check": name, "value": value, "limit": limit, "status": "PASS" if passed else "FAIL"})

    md = rep["max_dev"]
    add("max |psi1 - oracle|", md["psi1"], rep["psi_tol"])
    add("max |Ric - oracle|", md["ric"], tol)
    add("max |Ric_inf - oracle|", md["ric_inf"], tol)
    for N, d in rep["max_dev_ric_N"]:
        add(f"max |Ric_N - oracle| (N={N:g})", d, tol)
    if kind is HILBERT:
        add("Ric_inf within (-(n-1), 2] (+-tol)", 1.0 if rep["bounds_ok"] else 0.0, 1.0, ok=rep["bounds_ok"])
    else:
        add("Ric_n = -inf at every sample", 1.0 if rep["ric_n_all_neg_inf"] else 0.0, 1.0,
            ok=rep["ric_n_all_neg_inf"])
        okada = max(tensor.okada_residual(kind, body, *wricci.sample_tangent(body, kind, args.seed, 20_000 + i),
                                          scheme) for i in range(samples))
        add("max Okada residual", okada, 1e-6)
    w_graph, w_vh, w_vv = _sweep_tensors(kind, body, samples, args.seed, scheme)
    add("tensor agreement vertical vs graph (rel. Frobenius)", w_graph, 1e-5)
    if kind is not HILBERT:
        add("tensor agreement horizontal vs others (rel. Frobenius)", w_vh, 1e-5)
    add("max |g_v(v,v)/F(v)^2 - 1|", w_vv, 1e-7)
    failed = any(c["status"] == "FAIL" for c in checks)
    if failed:
        status = "FAIL"
    elif rep["warnings"]:
        status = "PASS-with-warning"
    else:
        status = "PASS"
    out = {
        "status": status,
        "metric": kind.value,
        "domain": body.spec.to_dict(),
        "n": body.n,
        "samples": samples,
        "seed": args.seed,
        "tol": tol,
        "strong_convexity_margin": rep["strong_convexity_margin"],
        "warnings": rep["warnings"],
        "checks": checks,
        "ric_inf_range": rep["ric_inf_range"],
        "failing_samples": rep["failing_samples"],
    }
    return out, (EXIT_VERIFY if failed else EXIT_OK)


def _center(args, body):
    text = args.center or args.point
    if text is None:
        return body.reference_point.copy()
    c = parse_vector(text)
    if len(c) != body.n:
        raise UsageError(f"center has dimension {len(c)}, domain has dimension {body.n}")
    return c


def cmd_ballvol(args):
    _require(args, "r")
    body = _body(args)
    x = _center(args, body)
    radii = [float(t) for t in parse_list(args.r)]
    ests = measure.ball_volume_profile(_kind(args), body, x, radii, args.method, args.samples, args.seed)
    return {
        "metric": _kind(args).value,
        "center": x,
        "balls": [{"r": r, "value": e.value, "std_error": e.std_error} for r, e in zip(radii, ests)],
        "method": args.method,
        "samples": ests[0].samples if ests else 0,
        "seed": args.seed,
    }, EXIT_OK


def cmd_bgcheck(args):
    body = _body(args)
    kind = _kind(args)
    x = _center(args, body)
    n = body.n
    Ns = parse_list(args.N) if args.N else [str(n + 2)]
    if len(Ns) != 1:
        raise UsageError("bgcheck takes a single N")
    N = wricci.parse_N(Ns[0], n)
    K = args.K if args.K is not None else measure.corollary_K(kind, n, N)
    grid = [float(t) for t in parse_list(args.r_grid)] if args.r_grid else [0.25 * k for k in range(1, 9)]
    rep = measure.bishop_gromov_check(kind, body, x, N, K, grid, args.samples, args.seed)
    rep["violation_count"] = len(rep["violations"])
    rep["summary"] = f"{len(rep['violations'])} violations"
    return rep, (EXIT_VERIFY if rep["violations"] else EXIT_OK)


def cmd_tensor(args):
    _require(args, "point", "vector")
    x, v = parse_vector(args.point), parse_vector(args.vector)
    body = _body(args, x, v)
    kind = _kind(args)
    scheme = _scheme(args)
    g = tensor.metric_tensor(kind, body, x, v, scheme)
    out = {"metric": kind.value, "x": x, "v": v, "F": finsler_norm(kind, body, x, v), "g_vertical": g}
    out["g_graph"] = tensor.metric_tensor_graph_oracle(kind, body, x, v)
    if kind is not HILBERT:
        out["g_horizontal"] = tensor.metric_tensor_horizontal(body, x, v, scheme, kind=kind)
        out["okada_residual"] = tensor.okada_residual(kind, body, x, v, scheme)
    out["g_v(v,v)"] = tensor.inner_product(g, v, v)
    return out, EXIT_OK


def cmd_ricci(args):
    _require(args, "point", "vector")
    x, v = parse_vector(args.point), parse_vector(args.vector)
    body = _body(args, x, v)
    kind = _kind(args)
    rep = curvature.ricci(kind, body, x, v, _scheme(args), tol=args.tol, route=args.route)
    return {"metric": kind.value, "x": x, "v": v, "ricci_value": rep.ricci_value,
            "christoffel_norm": rep.christoffel_norm, "stencil_step": rep.stencil_step,
            "estimated_error": rep.estimated_error}, EXIT_OK


def cmd_domain_info(args):
    body = _body(args)
    samples = args.samples if args.samples is not None else 256
    out = {
        "domain": body.spec.to_dict(),
        "n": body.n,
        "bounding_box": {"lo": body.box_lo, "hi": body.box_hi},
        "diameter_bound": body.diameter,
        "reference_point": body.reference_point,
        "strong_convexity_margin": strong_convexity_margin(body, samples, args.seed),
        "strongly_convex_family": body.strongly_convex_family,
    }
    if args.point:
        out["classification"] = classify_point(body, parse_vector(args.point), args.tol or 1e-9)
    return out, EXIT_OK


COMMANDS = {
    "dist": cmd_dist,
    "wricci": cmd_wricci,
    "verify": cmd_verify,
    "ballvol": cmd_ballvol,
    "bgcheck": cmd_bgcheck,
    "tensor": cmd_tensor,
    "ricci": cmd_ricci,
    "domain-info": cmd_domain_info,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--domain", help="JSON domain spec (default: unit ball)")
    common.add_argument("--metric", default="funk", choices=["funk", "rfunk", "hilbert"])
    common.add_argument("--format", default="json", choices=["json", "csv"])
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--fd-step", type=float, dest="fd_step")

    parser = _Parser(prog="funkhilbert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("dist", parents=[common], help="directed distances between two points")
    p.add_argument("--from", dest="from_")
    p.add_argument("--to")

    p = sub.add_parser("wricci", parents=[common], help="weighted Ricci report at a tangent vector")
    p.add_argument("--point")
    p.add_argument("--vector")
    p.add_argument("--N", help="comma-separated list; 'inf' allowed")
    p.add_argument("--strict", action="store_true", help="exit 4 when an oracle deviation exceeds --tol")

    sub.add_parser("verify", parents=[common], help="seeded sweep against the closed forms")

    for name, helptext in (("ballvol", "forward ball volumes"), ("bgcheck", "Bishop-Gromov ratio monotonicity")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--center")
        p.add_argument("--point")
        if name == "ballvol":
            p.add_argument("--r", help="radius or comma-separated radii")
            p.add_argument("--method", default="monte_carlo", choices=["monte_carlo", "grid"])
        else:
            p.add_argument("--N")
            p.add_argument("--K", type=float)
            p.add_argument("--r-grid", dest="r_grid")

    for name in ("tensor", "ricci"):
        p = sub.add_parser(name, parents=[common], help=f"{name} at a tangent vector")
        p.add_argument("--point")
        p.add_argument("--vector")
        if name == "ricci":
            p.add_argument("--route", default="graph", choices=["graph", "fd"])

    p = sub.add_parser("domain-info", parents=[common], help="bounding box and convexity margin")
    p.add_argument("--point", help="optionally classify this point")
    return parser


def main(argv=None) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        code = _run(argv)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return code


def _run(argv) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required (" + ", ".join(COMMANDS) + ")")
        report, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FinslerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if exc.usage else EXIT_GEOMETRY
    text = to_csv(report) if args.format == "csv" else to_json(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
