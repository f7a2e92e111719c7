"""Command-line entry point: ``hamplate <command> [options]``.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 not converged,
5 equivalence violation.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from fractions import Fraction

import numpy as np

from . import __version__
from .c0search import SearchMode, SearchSpec, optimize_c0
from .errors import EquivalenceViolation, HamError, NonFiniteCoefficient, NotConverged
from .ham import HamConfig, empirical_c0_noniter, solve_ham
from .iterate import IterateConfig, empirical_c0_iter, run_iteration, sweep, truncation_order
from .perturbation import check_perturbation_equivalence, check_iteration_equivalence
from .plate import BoundaryKind, deflection, make_boundary, to_physical
from .polyseries import parse_backend
from .reports import (
    SWEEP_FIELDS,
    RunRecord,
    csv_text,
    fmt_load,
    fmt_residual,
    svg_line_chart,
    table_text,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_NOT_CONVERGED, EXIT_EQUIVALENCE = 0, 2, 3, 4, 5

GLOBAL_DEFAULTS = {"boundary": "clamped", "nu": "0.3", "backend": "f64", "format": "table"}


class UsageError(Exception):
    pass


# -- argument parsing -------------------------------------------------------------

def _global_options() -> argparse.ArgumentParser:
    # suppressed defaults so a flag given before the subcommand survives
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("global options")
    g.add_argument("--boundary", choices=[k.value for k in BoundaryKind])
    g.add_argument("--nu", help="Poisson ratio (default 0.3)")
    g.add_argument("--backend", help="f64 | bigfloat:<bits> | rational (default f64)")
    g.add_argument("--format", choices=["table", "csv", "json"])
    g.add_argument("--out", help="write the main output here instead of stdout")
    g.add_argument("--config", help="JSON file with default option values")
    g.add_argument("--timings", action="store_true",
                   help="include CPU seconds (makes output run-dependent)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(prog="hamplate", parents=[common],
                                     description="Large-deflection circular plate solver.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="homotopy series without iteration")
    p.add_argument("--a", help="dimensionless central deflection W(0)")
    p.add_argument("--c0", help="convergence-control parameter or 'auto'")
    p.add_argument("--order", type=int, help="homotopy order (default 20)")
    p.add_argument("--checkpoints", help="step (e.g. 20) or comma list of orders to report")

    p = sub.add_parser("iterate", parents=[common], help="iterated homotopy solution")
    p.add_argument("--a")
    p.add_argument("--c0", help="value or 'auto' (empirical formula)")
    p.add_argument("--N", dest="N", help="truncation order or 'auto'")
    p.add_argument("--M", dest="M", type=int, help="inner homotopy order per pass (default 1)")
    p.add_argument("--max-iter", type=int, help="iteration budget (default 200)")
    p.add_argument("--target", type=float, help="residual target")
    p.add_argument("--report-every", type=int, help="print every k-th pass (default 1)")

    p = sub.add_parser("sweep", parents=[common], help="load table over several a values")
    p.add_argument("--a", help="comma-separated a values")
    p.add_argument("--c0", help="fixed c0 for all rows (default: empirical formula)")
    p.add_argument("--N", dest="N", help="fixed truncation order (default: empirical formula)")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--workers", type=int, help="parallel processes (default 1)")

    p = sub.add_parser("optimize-c0", parents=[common], help="minimise the residual over c0")
    p.add_argument("--a")
    p.add_argument("--mode", choices=[m.value for m in SearchMode])
    p.add_argument("--bracket", help="lo,hi (default -1.5,-0.01)")
    p.add_argument("--probe-order", type=int)
    p.add_argument("--grid-points", type=int)
    p.add_argument("--tol", type=float, help="refinement width")
    p.add_argument("--N", dest="N", type=int, help="truncation order for iterative probes")
    p.add_argument("--M", dest="M", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--svg", help="write the residual curve as SVG")

    p = sub.add_parser("equivalence", parents=[common],
                       help="check the perturbation and modified-iteration correspondences")
    p.add_argument("--method", choices=["vincent", "chien", "iteration", "all"])
    p.add_argument("--orders", type=int, help="perturbation orders to compare (default 3)")
    p.add_argument("--cycles", type=int, help="iteration cycles to compare (default 3)")
    p.add_argument("--c0", help="default -1")
    p.add_argument("--a", help="W(0) for the iteration check (default 1)")
    p.add_argument("--zeta", help="perturbation quantity value (default 1)")
    p.add_argument("--expect-fail", action="store_true",
                   help="negative control: succeed only if every check fails")

    p = sub.add_parser("deflection", parents=[common], help="deflection profile W(y)")
    p.add_argument("--a")
    p.add_argument("--c0")
    p.add_argument("--N", dest="N")
    p.add_argument("--samples", type=int, help="number of y samples (default 101)")
    p.add_argument("--svg", help="write the profile as SVG")
    return parser


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


class Options:
    """Explicit flag, then config file, then the given fallback."""

    def __init__(self, args, config: dict):
        self.args = args
        self.config = config

    def get(self, name, fallback=None):
        value = getattr(self.args, name, None)
        if value is not None and value is not False:
            return value
        if name in self.config:
            return self.config[name]
        return GLOBAL_DEFAULTS.get(name, fallback)

    def given(self, name) -> bool:
        return getattr(self.args, name, None) is not None or name in self.config


def _number(text, what):
    try:
        return float(text)
    except (TypeError, ValueError):
        raise UsageError(f"{what} must be a number, got {text!r}") from None


def _a_value(opts, default=None):
    raw = opts.get("a", default)
    if raw is None:
        raise UsageError("--a is required")
    a = _number(raw, "--a")
    if a < 0:
        raise UsageError("--a must be non-negative")
    return a


def _is_auto(v) -> bool:
    return v is None or str(v).strip().lower() == "auto"


def _quiet_range(fn, *args):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        value = fn(*args)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return value


def _common(opts):
    try:
        bc = make_boundary(opts.get("boundary"), Fraction(str(opts.get("nu"))))
        backend = parse_backend(opts.get("backend"))
    except (ValueError, ArithmeticError) as exc:
        raise UsageError(str(exc)) from None
    return bc, backend


# -- output -------------------------------------------------------------------------

def _emit(opts, text: str):
    out = opts.get("out")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _record(opts, command, config, results, backend, timings):
    return RunRecord(command, config, results, str(backend), __version__,
                     timings if opts.get("timings") else {})


def _render(opts, record: RunRecord, rows, fields, formatters, header=""):
    fmt = opts.get("format")
    if fmt == "json":
        return record.to_json()
    if fmt == "csv":
        return header + csv_text(rows, fields)
    return header + table_text(rows, fields, formatters)


# -- commands -----------------------------------------------------------------------

def cmd_solve(opts) -> int:
    bc, backend = _common(opts)
    a = _a_value(opts)
    c0_raw = opts.get("c0")
    c0 = _quiet_range(empirical_c0_noniter, a) if _is_auto(c0_raw) else _number(c0_raw, "--c0")
    if c0 == 0:
        raise UsageError("--c0 must be nonzero")
    order = int(opts.get("order", 20))
    if order < 1:
        raise UsageError("--order must be at least 1")
    cps = str(opts.get("checkpoints", order))
    try:
        if "," in cps:
            checkpoints = sorted({int(x) for x in cps.split(",") if x.strip()})
        else:
            step = int(cps)
            if step < 1:
                raise ValueError
            checkpoints = list(range(step, order + 1, step))
    except ValueError:
        raise UsageError("--checkpoints must be a positive step or a comma list") from None
    t0 = time.process_time()
    series, _ = solve_ham(HamConfig(c0, order, bc, a, backend), checkpoints)
    elapsed = time.process_time() - t0
    rows = []
    for k, rep in sorted(series.reports.items()):
        row = {"order": k, "residual": float(rep.e_total), "Q": float(rep.q_load)}
        if opts.get("timings"):
            row["cpu_seconds"] = rep.cpu_seconds
        rows.append(row)
    fields = ["order", "residual", "Q"] + (["cpu_seconds"] if opts.get("timings") else [])
    config = {"boundary": bc.label, "nu": float(bc.nu), "a": a, "c0": c0, "order": order,
              "checkpoints": checkpoints}
    record = _record(opts, "solve", config, {"rows": rows}, backend, {"total_cpu_seconds": elapsed})
    _emit(opts, _render(opts, record, rows, fields, {"residual": fmt_residual, "Q": fmt_load}))
    return EXIT_OK


def _iter_params(opts, bc, a):
    c0_raw = opts.get("c0")
    c0 = _quiet_range(empirical_c0_iter, bc, a) if _is_auto(c0_raw) else _number(c0_raw, "--c0")
    if c0 == 0:
        raise UsageError("--c0 must be nonzero")
    n_raw = opts.get("N")
    if _is_auto(n_raw):
        n = truncation_order(bc, a)
    elif str(n_raw).lower() in ("none", "inf"):
        n = None
    else:
        n = int(_number(n_raw, "--N"))
    return c0, n


def cmd_iterate(opts) -> int:
    bc, backend = _common(opts)
    a = _a_value(opts)
    c0, n = _iter_params(opts, bc, a)
    every = int(opts.get("report_every", 1))
    try:
        config = IterateConfig(bc=bc, a=a, c0=c0, truncation_n=n, inner_order=int(opts.get("M", 1)),
                               max_iterations=int(opts.get("max_iter", 200)),
                               target_residual=opts.get("target"), backend=backend)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = run_iteration(config)
    rows = []
    for rep in result.trace:
        if rep.order_or_iter % every and rep is not result.trace[-1]:
            continue
        row = {"iteration": rep.order_or_iter, "residual": float(rep.e_total), "Q": float(rep.q_load)}
        if opts.get("timings"):
            row["cpu_seconds"] = rep.cpu_seconds
        rows.append(row)
    fields = ["iteration", "residual", "Q"] + (["cpu_seconds"] if opts.get("timings") else [])
    summary = {"converged": result.converged, "reason": result.reason,
               "iterations": result.iterations, "Q": float(result.state.q_load),
               "residual": float(result.trace[-1].e_total), "c0": c0, "N": n}
    cfg = {"boundary": bc.label, "nu": float(bc.nu), "a": a, "c0": c0, "N": n,
           "M": config.inner_order, "max_iterations": config.max_iterations,
           "target": config.target_residual}
    record = _record(opts, "iterate", cfg, {"summary": summary, "rows": rows}, backend,
                     {"total_cpu_seconds": result.trace[-1].cpu_seconds})
    _emit(opts, _render(opts, record, rows, fields, {"residual": fmt_residual, "Q": fmt_load}))
    if not result.converged:
        print(f"not converged after {result.iterations} iterations", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _a_list(opts):
    raw = opts.get("a")
    if raw is None:
        raise UsageError("--a is required")
    if isinstance(raw, (list, tuple)):
        items = list(raw)
    else:
        items = [x for x in str(raw).split(",") if x.strip()]
    if not items:
        raise UsageError("--a list is empty")
    values = [_number(x, "--a") for x in items]
    if any(v < 0 for v in values):
        raise UsageError("--a values must be non-negative")
    return values


def cmd_sweep(opts) -> int:
    bc, backend = _common(opts)
    a_list = _a_list(opts)
    overrides = {"backend": backend}
    if not _is_auto(opts.get("c0")):
        overrides["c0"] = _number(opts.get("c0"), "--c0")
    if not _is_auto(opts.get("N")):
        overrides["truncation_n"] = int(_number(opts.get("N"), "--N"))
    if opts.get("max_iter") is not None:
        overrides["max_iterations"] = int(opts.get("max_iter"))
    t0 = time.time()
    rows = sweep(bc, a_list, overrides, workers=int(opts.get("workers", 1)))
    dicts = [r.as_dict() for r in rows]
    record = _record(opts, "sweep", {"boundary": bc.label, "nu": float(bc.nu), "a": a_list,
                                     "c0": overrides.get("c0", "auto"),
                                     "N": overrides.get("truncation_n", "auto")},
                     {"rows": dicts}, backend, {"wall_seconds": time.time() - t0})
    fields = list(SWEEP_FIELDS)
    if opts.get("format") == "table":
        fields = fields + ["converged"]
    fmts = {"Q": fmt_load, "residual": fmt_residual, "c0": lambda v: f"{v:.4f}",
            "w0_over_h": lambda v: f"{v:.2f}", "p_phys": fmt_load}
    _emit(opts, _render(opts, record, dicts, fields, fmts))
    for r in rows:
        if not r.converged:
            print(f"row a={r.a:g}: {r.error}", file=sys.stderr)
    return EXIT_OK if any(r.converged for r in rows) else EXIT_NOT_CONVERGED


def cmd_optimize(opts) -> int:
    bc, backend = _common(opts)
    a = _a_value(opts)
    mode = SearchMode(opts.get("mode", SearchMode.NON_ITERATIVE.value))
    kw = {"mode": mode, "backend": backend}
    if opts.get("bracket") is not None:
        try:
            lo, hi = (float(x) for x in str(opts.get("bracket")).split(","))
        except ValueError:
            raise UsageError("--bracket must be lo,hi") from None
        kw["bracket"] = (lo, hi)
    for name, key in (("probe_order", "probe_order"), ("grid_points", "grid_points"),
                      ("tol", "refine_tolerance"), ("N", "truncation_n"), ("M", "inner_order")):
        if opts.get(name) is not None:
            kw[key] = opts.get(name)
    if mode is SearchMode.ITERATIVE:
        kw.setdefault("probe_order", SearchSpec.iterative().probe_order)
    try:
        spec = SearchSpec(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    c0_star, curve = optimize_c0(bc, a, spec, workers=int(opts.get("workers", 1)))
    e_star = min(e for _, e in curve)
    rows = [{"c0": c, "residual": e} for c, e in curve]
    cfg = {"boundary": bc.label, "nu": float(bc.nu), "a": a, "mode": mode.value,
           "bracket": list(spec.bracket), "probe_order": spec.probe_order,
           "grid_points": spec.grid_points, "refine_tolerance": spec.refine_tolerance,
           "N": spec.truncation_n, "M": spec.inner_order}
    record = _record(opts, "optimize-c0", cfg, {"c0_star": c0_star, "residual": e_star,
                                                "curve": rows}, backend, {})
    header = f"# c0* = {c0_star:.6f}  residual = {fmt_residual(e_star)}\n"
    _emit(opts, _render(opts, record, rows, ["c0", "residual"],
                        {"c0": lambda v: f"{v:.6f}", "residual": fmt_residual}, header))
    if opts.get("svg"):
        with open(opts.get("svg"), "w") as fh:
            fh.write(svg_line_chart([("residual", [c for c, _ in curve], [e for _, e in curve])],
                                    title=f"{bc.label}, a={a:g}", xlabel="c0",
                                    ylabel="squared residual", log_y=True))
    return EXIT_OK


def cmd_equivalence(opts) -> int:
    method = opts.get("method", "all")
    orders = int(opts.get("orders", 3))
    cycles = int(opts.get("cycles", 3))
    c0 = Fraction(str(opts.get("c0", -1)))
    a = Fraction(str(opts.get("a", 1)))
    zeta = Fraction(str(opts.get("zeta", 1)))
    nu = Fraction(str(opts.get("nu")))
    if opts.given("backend") and str(opts.get("backend")) != "rational":
        print("note: equivalence checks always use exact rational arithmetic", file=sys.stderr)
    kinds = [BoundaryKind.parse(opts.get("boundary"))] if opts.given("boundary") else list(BoundaryKind)
    reports = []
    try:
        for kind in kinds:
            bc = make_boundary(kind, nu)
            if method in ("vincent", "all"):
                reports.append(check_perturbation_equivalence(bc, orders, "vincent", c0, zeta, False))
            if method in ("chien", "all"):
                reports.append(check_perturbation_equivalence(bc, orders, "chien", c0, zeta, False))
            if method in ("iteration", "all"):
                reports.append(check_iteration_equivalence(bc, a, cycles, c0, False))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [{"check": r.check, "boundary": r.boundary, "compared": r.compared,
             "passed": r.passed, "mismatch": r.mismatch or ""} for r in reports]
    fmt = opts.get("format")
    if fmt == "json":
        record = _record(opts, "equivalence", {"method": method, "orders": orders, "cycles": cycles,
                                               "c0": str(c0), "a": str(a), "zeta": str(zeta)},
                         {"checks": rows}, "rational", {})
        text = record.to_json()
    elif fmt == "csv":
        text = csv_text(rows, ["check", "boundary", "compared", "passed", "mismatch"])
    else:
        text = "".join(r.line() + "\n" for r in reports)
    _emit(opts, text)
    failed = [r for r in reports if not r.passed]
    if opts.get("expect_fail"):
        if len(failed) == len(reports):
            print("negative control: every check failed as expected", file=sys.stderr)
            return EXIT_OK
        return EXIT_EQUIVALENCE
    return EXIT_EQUIVALENCE if failed else EXIT_OK


def cmd_deflection(opts) -> int:
    bc, backend = _common(opts)
    a = _a_value(opts)
    c0, n = _iter_params(opts, bc, a)
    samples = int(opts.get("samples", 101))
    if samples < 2:
        raise UsageError("--samples must be at least 2")
    config = IterateConfig(bc=bc, a=a, c0=c0, truncation_n=n, backend=backend, max_iterations=50000)
    result = run_iteration(config)
    w = deflection(result.state.phi)
    phys = to_physical(a, result.state.q_load, bc.nu)
    ys = [i / (samples - 1) for i in range(samples)]
    rows = [{"y": y, "W": float(w(y))} for y in ys]
    q = float(result.state.q_load)
    header = (f"# boundary={bc.label} a={a:g} Q={q:.6g} w0/h={phys.w0_over_h:.4g} "
              f"pR4/Eh4={phys.pR4_over_Eh4:.5g} residual={fmt_residual(result.trace[-1].e_total)}\n")
    record = _record(opts, "deflection", {"boundary": bc.label, "nu": float(bc.nu), "a": a,
                                          "c0": c0, "N": n, "samples": samples},
                     {"Q": q, "w0_over_h": phys.w0_over_h, "pR4_over_Eh4": phys.pR4_over_Eh4,
                      "converged": result.converged, "profile": rows}, backend, {})
    fmt = opts.get("format")
    text = record.to_json() if fmt == "json" else header + csv_text(rows, ["y", "W"])
    _emit(opts, text)
    if opts.get("svg"):
        with open(opts.get("svg"), "w") as fh:
            fh.write(svg_line_chart([(f"pR4/Eh4 = {phys.pR4_over_Eh4:.1f}", ys, [r["W"] for r in rows])],
                                    title=f"{bc.label}, a={a:g}", xlabel="y = r²/R²", ylabel="W(y)"))
    if not result.converged:
        print(f"not converged after {result.iterations} iterations", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "iterate": cmd_iterate,
    "sweep": cmd_sweep,
    "optimize-c0": cmd_optimize,
    "equivalence": cmd_equivalence,
    "deflection": cmd_deflection,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        opts = Options(args, _load_config(getattr(args, "config", None)))
        # overflow surfaces as NonFiniteCoefficient, the raw numpy warning adds nothing
        with np.errstate(over="ignore", invalid="ignore"):
            return COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EquivalenceViolation as exc:
        print(f"equivalence violation: {exc}", file=sys.stderr)
        return EXIT_EQUIVALENCE
    except NotConverged as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (NonFiniteCoefficient, HamError, ArithmeticError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
