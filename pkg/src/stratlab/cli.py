"""Batch front end: job files in, deterministic JSON reports out.

Exit codes: 0 success, 2 configuration error, 3 resource budget exhausted.
Subcommands `fiber`, `stabilize`, `classify`, `interpolate` and
`fixtures {list,run}` are thin wrappers over the module operations with the
same configuration schema as `run`.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import jsonio
from .bundles import (
    SYMBOLIC_ARITY_LIMIT,
    fiber_dimension_at,
    initial_bundle,
    iterate_to_stabilization,
    quasistrata,
    sing_locus_ideal,
)
from .config import Budgets, DescentConfig, RunConfig, Tolerances, preset
from .fibers import GlaeserEngine, NotSingularError, UnreachableDepthError
from .fixtures import load_fixture, registry, replay
from .groebner import BudgetExceededError, GroebnerBudgets
from .interp import InterpolationProblem, hermite_interpolate, verify_interpolation
from .parsing import ParseError, parse_polynomial
from .poly import PolynomialMap, PolynomialRing
from .strata import (
    LocusSampler,
    StratumSpec,
    StratumSpecError,
    classify_quasistratum,
    lagrangian_check,
    universality_verdict,
)


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# job parsing


def _build_ring(spec: Dict) -> PolynomialRing:
    variables = spec.get("variables")
    if not variables or not isinstance(variables, list):
        raise ConfigError("job needs a nonempty 'variables' list")
    field = spec.get("field", "R")
    if field not in ("R", "C"):
        raise ConfigError(f"field must be 'R' or 'C', got {field!r}")
    kind = "gaussian_rational" if field == "C" else "rational"
    try:
        return PolynomialRing(tuple(variables), kind)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_map(spec: Dict, ring: PolynomialRing) -> PolynomialMap:
    exprs = spec.get("F")
    if not exprs or not isinstance(exprs, list):
        raise ConfigError("job needs a nonempty 'F' list of polynomial strings")
    comps = []
    for text in exprs:
        try:
            comps.append(parse_polynomial(text, ring))
        except ParseError as exc:
            raise ConfigError(f"bad polynomial {text!r}: {exc}") from exc
    return PolynomialMap(ring, tuple(comps))


def _build_budgets(spec: Dict) -> Budgets:
    raw = dict(spec.get("budgets", {}))
    preset_name = raw.pop("preset", None)
    base = preset(preset_name) if preset_name else Budgets()
    gb_raw = raw.pop("groebner", None)
    kwargs = {}
    for key in ("arc_count", "max_exponent", "max_depth",
                "approach_directions", "approach_samples", "aux_arc_count"):
        if key in raw:
            kwargs[key] = int(raw.pop(key))
    if "symbolic" in raw:
        kwargs["symbolic"] = bool(raw.pop("symbolic"))
    if raw:
        raise ConfigError(f"unknown budget keys: {sorted(raw)}")
    budgets = dataclasses.replace(base, **kwargs)
    if gb_raw:
        budgets = dataclasses.replace(
            budgets,
            groebner=GroebnerBudgets(
                max_degree=int(gb_raw.get("max_degree", 60)),
                max_basis=int(gb_raw.get("max_basis", 400)),
                max_reductions=int(gb_raw.get("max_reductions", 200_000)),
            ),
        )
    return budgets


def _build_tolerances(spec: Dict) -> Tolerances:
    raw = dict(spec.get("tolerances", {}))
    kwargs = {}
    for key in ("rank_tol", "limit_tol", "ortho_tol", "t0", "ratio", "t_min",
                "sing_tol", "subspace_tol", "stab_tol"):
        if key in raw:
            kwargs[key] = float(raw.pop(key))
    if raw:
        raise ConfigError(f"unknown tolerance keys: {sorted(raw)}")
    return Tolerances(**kwargs)


def _build_spec(name: str, raw: Dict, ring: PolynomialRing) -> StratumSpec:
    gaussian = ring.gaussian
    polys = raw.get("polys")
    points = raw.get("points")
    if polys:
        params = raw.get("params")
        if not params:
            raise ConfigError(f"stratum {name}: 'polys' requires 'params'")
        pring = PolynomialRing(tuple(params), ring.coefficient_field)
        try:
            images = tuple(parse_polynomial(t, pring) for t in polys)
            rejections = tuple(
                parse_polynomial(t, ring) for t in raw.get("rejections", [])
            )
            param_rejections = tuple(
                parse_polynomial(t, pring) for t in raw.get("param_rejections", [])
            )
        except ParseError as exc:
            raise ConfigError(f"stratum {name}: {exc}") from exc
        if len(images) != ring.arity:
            raise ConfigError(
                f"stratum {name}: parametrization needs {ring.arity} polynomials"
            )
        return StratumSpec(
            name=name, ambient=ring, param_ring=pring, parametrization=images,
            rejections=rejections, param_rejections=param_rejections,
            expected_dim=raw.get("expected_dim"),
        )
    if points:
        try:
            equations = tuple(
                parse_polynomial(t, ring) for t in raw.get("equations", [])
            )
        except ParseError as exc:
            raise ConfigError(f"stratum {name}: {exc}") from exc
        exact_points = tuple(
            tuple(jsonio.parse_scalar(v, gaussian) for v in p) for p in points
        )
        for p in exact_points:
            if len(p) != ring.arity:
                raise ConfigError(f"stratum {name}: point arity mismatch")
        return StratumSpec(
            name=name, ambient=ring, equations=equations, points=exact_points,
            expected_dim=raw.get("expected_dim"),
        )
    raise ConfigError(f"stratum {name}: needs 'polys' (parametric) or 'points'")


def _parse_point(raw, ring: PolynomialRing):
    if not isinstance(raw, list) or len(raw) != ring.arity:
        raise ConfigError(f"point must be a list of {ring.arity} scalars")
    return [jsonio.parse_scalar(v, ring.gaussian) for v in raw]


def _echo_config(spec: Dict) -> Dict:
    return json.loads(json.dumps(spec))


# ---------------------------------------------------------------------------
# job execution


def run_job(spec: Dict, timings: bool = False) -> Dict:
    if "seed" not in spec:
        raise ConfigError("job needs an explicit 'seed'")
    seed = int(spec["seed"])
    ring = _build_ring(spec)
    F = _build_map(spec, ring)
    budgets = _build_budgets(spec)
    symbolic = budgets.symbolic
    tolerances = _build_tolerances(spec)
    cfg = RunConfig(field_name=spec.get("field", "R"), seed=seed,
                    budgets=budgets, tolerances=tolerances)
    engine = GlaeserEngine(F, cfg)

    t_start = time.perf_counter()
    report: Dict = {
        "config": _echo_config(spec),
        "seed": seed,
        "field": cfg.field_name,
        "variables": list(ring.variables),
    }
    warnings: List[str] = []

    samplers_by_name: Dict[str, LocusSampler] = {}
    for name, raw in (spec.get("sing_parametrizations") or {}).items():
        stratum = _build_spec(name, raw, ring)
        samplers_by_name[name] = LocusSampler(stratum)

    probe_rows = []
    stab_probes = []
    max_depth = budgets.max_depth
    for k, raw in enumerate(spec.get("probes", [])):
        point = _parse_point(raw.get("point"), ring)
        names = raw.get("samplers", list(samplers_by_name))
        try:
            samplers = [samplers_by_name[n] for n in names]
        except KeyError as exc:
            raise ConfigError(f"probe {k}: unknown sampler {exc.args[0]!r}")
        depth_req = int(raw.get("depth", max_depth))
        row = {"name": raw.get("name", f"probe{k}"),
               "point": [jsonio.encode_number(v) for v in point],
               "dims": {}}
        for depth in range(1, depth_req + 1):
            try:
                est = engine.fiber(point, depth, samplers)
            except NotSingularError as exc:
                raise ConfigError(str(exc)) from exc
            except UnreachableDepthError as exc:
                warnings.append(str(exc))
                break
            row["dims"][str(depth)] = est.dimension
            warnings.extend(est.warnings)
            if depth == depth_req:
                row["basis"] = [
                    [jsonio.encode_number(v) for v in r] for r in est.basis.rows
                ]
                row["confidence"] = est.confidence
        probe_rows.append(row)
        stab_probes.append((point, samplers))
    report["probes"] = probe_rows

    stab = None
    if stab_probes:
        try:
            stab = engine.stabilization_index(stab_probes, max_depth=max_depth)
        except UnreachableDepthError as exc:
            warnings.append(f"stabilization limited to depth 1: {exc}")
            stab = engine.stabilization_index(stab_probes, max_depth=1)
        report["dim_table"] = stab.dim_table()
        report["rho_hat"] = stab.rho_hat
        report["stabilized"] = stab.stabilized
    else:
        report["rho_hat"] = None
        report["stabilized"] = None

    classify_rows = []
    quasi_reports = []
    for k, raw in enumerate(spec.get("classify", [])):
        name = raw.get("spec")
        if name not in samplers_by_name:
            raise ConfigError(f"classify {k}: unknown stratum {name!r}")
        sampler = samplers_by_name[name]
        depth = int(raw.get("depth", 1))
        samples = int(raw.get("samples", 20))
        try:
            classified = classify_quasistratum(
                engine, sampler.spec, depth, list(samplers_by_name.values()),
                min_samples=samples,
            )
            qreport = lagrangian_check(
                engine, sampler.spec, depth, list(samplers_by_name.values()),
                min_samples=samples, classified=classified,
            )
        except StratumSpecError as exc:
            raise ConfigError(str(exc)) from exc
        quasi_reports.append(qreport)
        classify_rows.append({
            "name": name,
            "fiber_dim": qreport.fiber_dim,
            "stratum_dim": qreport.stratum_dim,
            "lagrangian": qreport.lagrangian,
            "residual": qreport.residual,
            "sample_count": qreport.sample_count,
            "confidence": qreport.confidence,
            "notes": list(qreport.notes),
        })
    if classify_rows:
        report["quasistrata"] = classify_rows
        verdict = universality_verdict(
            quasi_reports, stab.rho_hat if stab else None,
            stab.stabilized if stab else False, l=F.l,
        )
        report["verdict"] = verdict.verdict
        report["justification"] = verdict.justification
        report["caveats"] = list(verdict.caveats)

    if symbolic:
        if ring.arity > SYMBOLIC_ARITY_LIMIT:
            raise ConfigError(
                f"symbolic pipeline supports at most {SYMBOLIC_ARITY_LIMIT} variables, "
                f"job has {ring.arity}"
            )
        bundle0 = initial_bundle(F)
        stabilized, rho_sym = iterate_to_stabilization(
            bundle0, budgets=budgets.groebner
        )
        sing = sing_locus_ideal(F)
        sym_row = {
            "rho": rho_sym,
            "pairs": [
                [g.to_text() for g in pair.equations.generators]
                for pair in stabilized.cset.pairs
            ],
        }
        sym_fibers = []
        for row in probe_rows:
            point = _parse_point(
                [_decode_number(v) for v in row["point"]], ring
            )
            sym_fibers.append({
                "name": row["name"],
                "dim": fiber_dimension_at(stabilized, point, budgets.groebner),
            })
        sym_row["probe_fibers"] = sym_fibers
        report["symbolic"] = sym_row

    report["warnings"] = sorted(set(warnings))
    if timings:
        report["timings"] = {"total_seconds": time.perf_counter() - t_start}
    return report


def _decode_number(value):
    if isinstance(value, dict):
        return {"re": value["re"], "im": value["im"]}
    return value


# ---------------------------------------------------------------------------
# argument handling


def _load_json(path: str) -> Dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read job file {path}: {exc}") from exc


def _emit(report: Dict, out: Optional[str]) -> None:
    text = jsonio.dumps(report)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _apply_overrides(spec: Dict, args) -> Dict:
    if getattr(args, "seed", None) is not None:
        spec["seed"] = args.seed
    if getattr(args, "depth", None) is not None:
        spec.setdefault("budgets", {})["max_depth"] = args.depth
    if getattr(args, "budget_preset", None):
        spec.setdefault("budgets", {})["preset"] = args.budget_preset
    return spec


def _cmd_run(args) -> int:
    spec = _apply_overrides(_load_json(args.job), args)
    report = run_job(spec, timings=args.timings)
    _emit(report, args.out)
    return 0


def _inline_job(args) -> Dict:
    spec = {
        "variables": args.vars.split(","),
        "field": args.field,
        "F": args.poly,
        "probes": [{"point": args.point.split(","), "depth": args.depth or 1}],
        "seed": args.seed if args.seed is not None else 0,
    }
    if args.depth:
        spec["budgets"] = {"max_depth": args.depth}
    return spec


def _cmd_fiber(args) -> int:
    if args.job:
        spec = _apply_overrides(_load_json(args.job), args)
    else:
        spec = _inline_job(args)
    report = run_job(spec, timings=args.timings)
    probe = report["probes"][0]
    depth = str(max(int(d) for d in probe["dims"]))
    _emit({
        "dim": probe["dims"][depth],
        "depth": depth,
        "basis": probe.get("basis", []),
        "confidence": probe.get("confidence"),
        "seed": report["seed"],
    }, args.out)
    return 0


def _cmd_stabilize(args) -> int:
    if args.job:
        spec = _apply_overrides(_load_json(args.job), args)
    else:
        spec = _inline_job(args)
        spec.setdefault("budgets", {})["max_depth"] = args.max_depth
        spec["probes"][0]["depth"] = args.max_depth
    report = run_job(spec, timings=args.timings)
    _emit({
        "rho_hat": report["rho_hat"],
        "stabilized": report["stabilized"],
        "dim_table": report["dim_table"],
        "seed": report["seed"],
    }, args.out)
    return 0


def _cmd_classify(args) -> int:
    spec = _apply_overrides(_load_json(args.job), args)
    if not spec.get("classify"):
        raise ConfigError("classify subcommand needs a 'classify' section in the job")
    report = run_job(spec, timings=args.timings)
    _emit({
        "quasistrata": report.get("quasistrata", []),
        "rho_hat": report.get("rho_hat"),
        "verdict": report.get("verdict"),
        "justification": report.get("justification"),
        "caveats": report.get("caveats", []),
        "seed": report["seed"],
    }, args.out)
    return 0


def _cmd_interpolate(args) -> int:
    raw = _load_json(args.problem)
    try:
        nodes = tuple(tuple(jsonio.parse_exact(v) for v in node)
                      for node in raw.get("nodes", []))
        values = tuple(jsonio.parse_exact(v) for v in raw.get("values", []))
        gradients = tuple(tuple(jsonio.parse_exact(v) for v in g)
                          for g in raw.get("gradients", []))
        problem = InterpolationProblem(nodes, values, gradients)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad interpolation problem: {exc}") from exc
    A = hermite_interpolate(problem)
    ok, table = verify_interpolation(A, problem)
    _emit({
        "polynomial": A.to_text(),
        "degree": A.total_degree(),
        "degree_bound": problem.degree_bound,
        "verified": ok,
        "residuals": [
            {"node": q, "which": which,
             "expected": jsonio.encode_number(expected),
             "actual": jsonio.encode_number(actual)}
            for q, which, expected, actual in table
        ],
    }, args.out)
    return 0


def _cmd_fixtures(args) -> int:
    if args.action == "list":
        _emit({"fixtures": sorted(registry().keys())}, args.out)
        return 0
    try:
        case = load_fixture(args.name)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    budgets = preset(args.budget_preset) if args.budget_preset else None
    report = replay(case, seed=args.seed, budgets=budgets)
    if not args.timings:
        report.pop("elapsed_seconds", None)
    _emit(report, args.out)
    return 0 if report["all_pass"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stratlab",
        description="close-then-span covector bundles of polynomial maps: "
                    "fiber estimation, quasistratum classification, "
                    "universality verdicts, exact Hermite interpolation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, job=True):
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--seed", type=int, help="override the job seed")
        p.add_argument("--depth", type=int, help="override probe depth")
        p.add_argument("--budget-preset", choices=["quick", "thorough"])
        p.add_argument("--timings", action="store_true",
                       help="include wall-clock timings (breaks byte determinism)")

    p_run = sub.add_parser("run", help="run a full job file")
    p_run.add_argument("job")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    def inline(p):
        p.add_argument("--job", help="job file (alternative to inline flags)")
        p.add_argument("--vars", help="comma-separated variable names")
        p.add_argument("--field", choices=["R", "C"], default="R")
        p.add_argument("-F", "--poly", action="append",
                       help="polynomial component (repeatable)")
        p.add_argument("--point", help="comma-separated probe coordinates")

    p_fiber = sub.add_parser("fiber", help="fiber estimate at one probe point")
    inline(p_fiber)
    common(p_fiber)
    p_fiber.set_defaults(func=_cmd_fiber)

    p_stab = sub.add_parser("stabilize", help="depth profile and stabilization index")
    inline(p_stab)
    p_stab.add_argument("--max-depth", type=int, default=3)
    common(p_stab)
    p_stab.set_defaults(func=_cmd_stabilize)

    p_cls = sub.add_parser("classify", help="classify quasistrata from a job file")
    p_cls.add_argument("--job", required=True)
    common(p_cls)
    p_cls.set_defaults(func=_cmd_classify)

    p_interp = sub.add_parser("interpolate",
                              help="exact Hermite interpolation from a problem file")
    p_interp.add_argument("problem", help="JSON with nodes, values, gradients")
    p_interp.add_argument("--out")
    p_interp.set_defaults(func=_cmd_interpolate)

    p_fix = sub.add_parser("fixtures", help="list or replay the worked examples")
    p_fix.add_argument("action", choices=["list", "run"])
    p_fix.add_argument("name", nargs="?")
    p_fix.add_argument("--out")
    p_fix.add_argument("--seed", type=int)
    p_fix.add_argument("--budget-preset", choices=["quick", "thorough"])
    p_fix.add_argument("--timings", action="store_true")
    p_fix.set_defaults(func=_cmd_fixtures)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "fixtures" and args.action == "run" and not args.name:
        parser.error("fixtures run needs a fixture name")
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(jsonio.dumps({"error": {"kind": "config", "message": str(exc)}}))
        return 2
    except BudgetExceededError as exc:
        sys.stderr.write(jsonio.dumps({"error": {"kind": "budget", "message": str(exc)}}))
        return 3


if __name__ == "__main__":
    sys.exit(main())
