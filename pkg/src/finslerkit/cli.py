"""Command-line front end: ``eval``, ``distance``, ``verify`` and ``report``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .domains import load_domain
from .errors import ConvergenceError, GeometryError, GraphDisconnectedError
from .harness import SUITES, ExperimentConfig, run_suite
from .intrinsic import GraphConfig, QuadratureSpec, graph_distance
from .metrics import parse_metric
from .quasi import QuasiDistanceParams, d_c
from .reports import VerificationReport, _clean


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _quad(text: str) -> QuadratureSpec:
    # "gauss5", "midpoint", or "<rule>:<subdivisions>"
    rule, _, n = text.partition(":")
    try:
        return QuadratureSpec(rule=rule, subdivisions=int(n) if n else 32)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad quadrature {text!r}: {exc}") from None


def _dc_param(sel: str) -> float | None:
    head, _, rest = sel.partition(":")
    if head != "dc":
        return None
    try:
        return QuasiDistanceParams(float(rest)).c
    except (ValueError, GeometryError):
        raise UsageError(f"bad quasi-distance selection {sel!r}") from None


def _metric(sel, domain):
    try:
        return parse_metric(sel, domain)
    except (ValueError, GeometryError) as exc:
        raise UsageError(str(exc)) from None


def _fmt(x: float) -> str:
    return "unbounded" if x == np.inf else f"{x:.6f}"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="finslerkit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", help="evaluate a metric at a point and vector")
    e.add_argument("--domain", required=True)
    e.add_argument("--metric", required=True)
    e.add_argument("--point", required=True)
    e.add_argument("--vector", required=True)

    d = sub.add_parser("distance", help="distance between two points")
    d.add_argument("--domain", required=True)
    d.add_argument("--metric", required=True)
    d.add_argument("--from", dest="src", required=True)
    d.add_argument("--to", dest="dst", required=True)
    d.add_argument("--nodes", type=int, default=GraphConfig.nodes)
    d.add_argument("--degree", type=int, default=GraphConfig.degree)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--quad", default="gauss5")
    d.add_argument("--path", action="store_true", help="also print the polyline as JSON")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite")
    v.add_argument("--domain")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int)
    v.add_argument("--collar", type=float)
    v.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="override a check tolerance")
    v.add_argument("--out")
    v.add_argument("--timing", action="store_true", help="record wall-clock runtime in the report")

    r = sub.add_parser("report", help="convert a stored report")
    r.add_argument("--in", dest="src", required=True)
    r.add_argument("--format", choices=["csv", "json"], default="json")
    return p


def _cmd_eval(args) -> int:
    domain = load_domain(args.domain)
    x, v = _vector(args.point), _vector(args.vector)
    if _dc_param(args.metric) is not None:
        raise UsageError("dc is a distance; use the distance subcommand")
    F = _metric(args.metric, domain)
    print(_fmt(F.evaluate(x, v)))
    return 0


def _cmd_distance(args) -> int:
    domain = load_domain(args.domain)
    x, y = _vector(args.src), _vector(args.dst)
    c = _dc_param(args.metric)
    if c is not None:
        value = d_c(c, domain.boundary_frame(x), domain.boundary_frame(y))
        print(_fmt(value))
        return 0
    F = _metric(args.metric, domain)
    if args.nodes < 0 or args.degree < 1:
        raise UsageError("--nodes must be nonnegative and --degree positive")
    cfg = GraphConfig(nodes=args.nodes, degree=args.degree, seed=args.seed, quad=_quad(args.quad))
    res = graph_distance(F, x, y, cfg)
    print(_fmt(res.value))
    if args.path and res.path is not None:
        print(json.dumps(_clean(res.path.to_list())))
    return 0


def _cmd_verify(args) -> int:
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    domain = load_domain(args.domain) if args.domain else None
    tolerances = {}
    for item in args.tol:
        name, _, value = item.partition("=")
        try:
            tolerances[name] = float(value)
        except ValueError:
            raise UsageError(f"bad tolerance override {item!r}") from None
    try:
        cfg = ExperimentConfig(args.suite, domain, args.seed, args.samples, tolerances, args.collar,
                               args.out, args.timing)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = run_suite(cfg)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}", file=sys.stderr)
    return 0 if report.passed else 1


def _cmd_report(args) -> int:
    report = VerificationReport.from_json(Path(args.src).read_text())
    sys.stdout.write(report.to_csv() if args.format == "csv" else report.to_json())
    return 0


COMMANDS = {"eval": _cmd_eval, "distance": _cmd_distance, "verify": _cmd_verify, "report": _cmd_report}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"finslerkit: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"finslerkit: error: {exc}", file=sys.stderr)
        return 2
    except (GeometryError, GraphDisconnectedError, ConvergenceError) as exc:
        print(f"finslerkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
