"""Command-line interface.

Reports go to stdout as JSON (see :mod:`toricheight.report`), a short human
summary goes to stderr.  Exit status: 0 success, 1 a check failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from . import report as rep
from .checks import le_check
from .ding import DingConfig, default_grid, NotSemistable, UnsupportedDimension, extrapolate, maximize, verify_bounds
from .fano import analyze, gap_scan, mahler_check, verify_induction_chain
from .fixtures import fixtures
from .formats import parse_polytopes, serialize
from .mabuchi import (
    SmoothDualPotential,
    donaldson_invariant_gap,
    mabuchi_estimate,
    mabuchi_ding_consistency,
    smooth_from_ding,
)
from .polytope import BUILTIN_NAMES, PolytopeError, builtin_polytope

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT = 0, 1, 2
WORKERS_ENV = "TORICHEIGHT_WORKERS"


class InputError(Exception):
    pass


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read_input(path: str) -> tuple[bytes, str]:
    if path == "-":
        return sys.stdin.buffer.read(), "<stdin>"
    try:
        return Path(path).read_bytes(), path
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _load_one(args) -> tuple:
    data, label = _read_input(args.file)
    items = parse_polytopes(data, args.format, args.orientation)
    if len(items) != 1:
        raise InputError(f"{label}: expected one polytope, found {len(items)}")
    item = items[0]
    name = item.name or (Path(label).stem if label != "<stdin>" else "")
    inp = {"name": name, "sha256": rep.digest(data),
           "canonical_sha256": rep.digest(serialize(item.polytope).encode())}
    return item.polytope, name, inp


def _workers(args) -> int:
    if getattr(args, "workers", None):
        return args.workers
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise InputError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc


def _emit(report: dict, args) -> int:
    if getattr(args, "no_timings", False):
        report.pop("timings", None)
    sys.stdout.write(rep.dumps(report))
    return EXIT_OK if report.get("all_checks_hold", True) else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# subcommands


def cmd_analyze(args) -> int:
    t0 = time.perf_counter()
    P, name, inp = _load_one(args)
    fr = analyze(P, args.mahler, name)
    checks = [mahler_check(P, "kurlberg")]
    _say(f"{name or 'polytope'}: dim {fr.dim}, vol {rep.exact(fr.vol)}, "
         f"k_semistable={str(fr.k_semistable).lower()}, smooth={str(fr.is_smooth).lower()}")
    report = rep.build("analyze", input=inp, fano=rep.fano_section(fr), checks=checks,
                       timings={"total_s": time.perf_counter() - t0})
    return _emit(report, args)


def cmd_bounds(args) -> int:
    t0 = time.perf_counter()
    P, name, inp = _load_one(args)
    fr = analyze(P, args.mahler, name)
    b = rep.fano_section(fr)["bounds"]
    _say(f"{name or 'polytope'}: {b['ke_lower']['value']:.6g} <= height <= {b['ke_upper']['value']:.6g}; "
         f"chi-volume <= {b['universal_upper']['value']:.6g}")
    report = rep.build("bounds", input=inp, fano={"dim": fr.dim, "vol": rep.exact(fr.vol),
                                                  "k_semistable": fr.k_semistable, "bounds": b},
                       timings={"total_s": time.perf_counter() - t0})
    return _emit(report, args)


def _config(args) -> DingConfig:
    return DingConfig(grid=args.grid, tol=args.tol, method=args.method, seed=args.seed,
                      max_iter=args.max_iter)


def _solve(args, P, name):
    fr = analyze(P, "kurlberg", name)
    if not fr.k_semistable:
        raise NotSemistable("barycenter of P is not the origin; the Ding supremum is infinite")
    cfg = _config(args)
    k = cfg.grid or default_grid(P)
    if args.extrapolate:
        extra = extrapolate(P, cfg, coarse=k, fine=2 * k)
    elif args.no_error_estimate:
        return fr, maximize(P, cfg), None
    else:
        # a coarser companion solve bounds the discretization error of grid k
        extra = extrapolate(P, cfg, coarse=max(2, k // 2), fine=k)
    return fr, extra.fine, extra


def cmd_ke_height(args) -> int:
    t0 = time.perf_counter()
    P, name, inp = _load_one(args)
    fr, result, extra = _solve(args, P, name)
    checks = verify_bounds(result, fr)
    notes = []
    if not result.converged:
        checks.append(le_check("converged", result.ke_residual, args.tol, n=fr.dim,
                               detail="KE residual above tolerance"))
    if args.certified and not result.certified:
        checks.append(le_check("certified", 1.0, 0.0, n=fr.dim, detail="quadrature bounds exceed tolerance"))
    if fr.dim == 1:
        notes.append("n = 1 uses the exact piecewise-exponential integrator")
    sec = rep.ding_section(result, extra)
    _say(f"{name or 'polytope'}: height {result.height:.8g} ± {sec['height']['error']:.2g} "
         f"(grid {result.grid}, {result.n_nodes} nodes, residual {result.ke_residual:.1e}, "
         f"certified={str(result.certified).lower()})")
    report = rep.build("ke-height", input=inp, seed=args.seed, fano=rep.fano_section(fr), ding=sec,
                       checks=checks, notes=notes or None,
                       timings={"total_s": time.perf_counter() - t0, "optimizer_s": result.seconds})
    return _emit(report, args)


def cmd_mabuchi(args) -> int:
    t0 = time.perf_counter()
    P, name, inp = _load_one(args)
    if P.dim > 2:
        raise UnsupportedDimension("Mabuchi quadrature is implemented for n <= 2")
    checks = []
    sections = {}
    if args.from_ke:
        fr, result, extra = _solve(args, P, name)
        u = smooth_from_ding(result, args.degree)
        quad_err = mabuchi_estimate(u)[1]
        consistency = mabuchi_ding_consistency(P, result, u, rtol=args.rtol)
        gap = donaldson_invariant_gap(P, result)
        checks = [consistency,
                  le_check("invariant_gap>=0", -gap.gap, 0.0, n=P.dim, slack=args.rtol * abs(gap.reference),
                           detail="P^n reference from its closed form")]
        sections["ding"] = rep.ding_section(result, extra)
        sections["fano"] = rep.fano_section(fr)
        chi_err = sections["ding"]["height"]["error"] / math.factorial(P.dim + 1)
        sections["mabuchi"] = {
            "potential": f"guillemin+poly{args.degree}",
            "value": rep.approx(consistency.lhs, quad_err),
            "consistency_rhs": rep.approx(consistency.rhs, 2 * chi_err),
            "invariant_gap": rep.approx(gap.gap, 2 * chi_err),
            "invariant_gap_without_pi": rep.approx(gap.gap_without_pi, 2 * chi_err),
        }
        _say(f"{name or 'polytope'}: M = {consistency.lhs:.8g}, identity gives {consistency.rhs:.8g} "
             f"({consistency.detail}); invariant gap {gap.gap:.6g}")
    else:
        value, err = mabuchi_estimate(SmoothDualPotential.canonical(P))
        sections["mabuchi"] = {"potential": "guillemin", "value": rep.approx(value, err)}
        _say(f"{name or 'polytope'}: M(guillemin) = {value:.10g}")
    report = rep.build("mabuchi", input=inp, checks=checks, timings={"total_s": time.perf_counter() - t0},
                       **sections)
    return _emit(report, args)


def _scan_file(task):
    path, fmt, orientation = task
    try:
        items = parse_polytopes(Path(path).read_bytes(), fmt, orientation)
    except (PolytopeError, OSError, ValueError) as exc:
        return path, None, str(exc)
    stem = Path(path).name
    named = [(it.name or (stem if len(items) == 1 else f"{stem}#{i}"), it.polytope) for i, it in enumerate(items)]
    return path, named, None


def cmd_gap_scan(args) -> int:
    t0 = time.perf_counter()
    root = Path(args.directory)
    if not root.is_dir():
        raise InputError(f"{root} is not a directory")
    files = sorted(str(p) for p in root.iterdir() if p.is_file() and not p.name.startswith("."))
    tasks = [(f, args.format, args.orientation) for f in files]
    workers = _workers(args)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_file, tasks))
    else:
        results = [_scan_file(t) for t in tasks]
    dataset, skipped = [], []
    for path, named, err in results:
        if err is not None:
            skipped.append({"file": Path(path).name, "reason": err})
            continue
        for nm, P in named:
            if P.dim != args.dim:
                skipped.append({"file": Path(path).name, "reason": f"{nm}: dimension {P.dim}"})
            elif not P.is_fano_normalized():
                skipped.append({"file": Path(path).name, "reason": f"{nm}: not Fano-normalized"})
            else:
                dataset.append((nm, P))
    g = gap_scan(dataset, args.dim)
    section = rep.gap_section(g)
    section["skipped"] = skipped
    check = le_check("second_max<=threshold", float(g.second_max or 0), float(g.threshold), n=args.dim,
                     detail=f"second largest semistable volume {rep.exact(g.second_max or 0)}")
    _say(f"{len(dataset)} polytopes of dimension {args.dim}, {len(g.volumes)} semistable; "
         f"second largest volume {rep.exact(g.second_max) if g.second_max is not None else '-'} "
         f"(threshold {rep.exact(g.threshold)}); {len(skipped)} skipped")
    report = rep.build("gap-scan", gap_scan=section, checks=[check],
                       timings={"total_s": time.perf_counter() - t0, "workers": workers})
    return _emit(report, args)


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    checks = verify_induction_chain(args.max_n)
    families: dict = {}
    for c in checks:
        fam = families.setdefault(c.name, {"count": 0, "failures": 0, "min_margin": None, "argmin_n": None})
        fam["count"] += 1
        fam["failures"] += not c.holds
        if fam["min_margin"] is None or c.margin < fam["min_margin"]:
            fam["min_margin"], fam["argmin_n"] = c.margin, c.n
    first = next(c for c in checks if c.name == "soughtafter" and c.n == 2)
    section = {"max_n": args.max_n, "families": families,
               "n2_margin": {"lhs": first.lhs, "rhs": first.rhs, "margin": first.margin}}
    failed = [c for c in checks if not c.holds]
    _say(f"{len(checks)} checks for n = 2..{args.max_n}: {len(failed)} failed; "
         f"n = 2 margin {first.margin:.10f} ({first.lhs:.6f} < {first.rhs:.6f})")
    shown = checks if args.full else failed
    report = rep.build("verify-inequalities", induction=section, checks=shown,
                       timings={"total_s": time.perf_counter() - t0})
    report["all_checks_hold"] = not failed
    return _emit(report, args)


def cmd_builtin(args) -> int:
    if args.list:
        sys.stdout.write("\n".join(BUILTIN_NAMES) + "\n")
        return EXIT_OK
    if not args.name:
        raise InputError("builtin needs a NAME (see --list)")
    P = builtin_polytope(args.name, *args.params)
    label = args.name + "".join(f" {p}" for p in args.params)
    sys.stdout.write(serialize(P, args.out_format, name=label))
    return EXIT_OK


def cmd_fixtures(args) -> int:
    root = Path(args.directory)
    root.mkdir(parents=True, exist_ok=True)
    count = 0
    for fx in fixtures():
        if args.dim is not None and fx.dim != args.dim:
            continue
        (root / f"{fx.name}.poly").write_text(serialize(fx.polytope, name=fx.name, tags=sorted(fx.tags)))
        count += 1
    _say(f"wrote {count} fixture files to {root}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _input_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", help="polytope file, or - for stdin")
    p.add_argument("--format", choices=("auto", "native", "matrix"), default="auto")
    p.add_argument("--orientation", choices=("auto", "rows", "columns"), default="auto",
                   help="matrix format: whether rows or columns are vertices")
    p.add_argument("--transpose", dest="orientation", action="store_const", const="columns",
                   help="shorthand for --orientation columns")


def _solver_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, default=None, help="dual grid resolution k (step 1/k)")
    p.add_argument("--tol", type=float, default=1e-9, help="tolerance on the KE residual")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("newton", "supergradient"), default="newton")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--extrapolate", action="store_true", help="also solve on grid 2k and extrapolate")
    p.add_argument("--no-error-estimate", action="store_true",
                   help="skip the coarse companion solve that bounds the discretization error")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toricheight", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--no-timings", action="store_true", help="omit timings for reproducible output")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--no-timings", action="store_true", default=argparse.SUPPRESS,
                        help="omit timings for reproducible output")

    p = sub.add_parser("analyze", parents=[common], help="exact classification and closed-form bounds")
    _input_options(p)
    p.add_argument("--mahler", choices=("kurlberg", "conjectured"), default="kurlberg")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bounds", parents=[common], help="closed-form height bounds only")
    _input_options(p)
    p.add_argument("--mahler", choices=("kurlberg", "conjectured"), default="kurlberg")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("ke-height", parents=[common], help="Kähler-Einstein height by Ding maximization (n <= 2)")
    _input_options(p)
    _solver_options(p)
    p.add_argument("--certified", action="store_true", help="fail unless quadrature errors are certified")
    p.set_defaults(func=cmd_ke_height)

    p = sub.add_parser("mabuchi", parents=[common], help="Donaldson's functional and its relation to the Ding optimum")
    _input_options(p)
    _solver_options(p)
    p.add_argument("--from-ke", action="store_true", help="evaluate at the smoothed optimizer solution")
    p.add_argument("--degree", type=int, default=6, help="polynomial degree of the smoothing fit")
    p.add_argument("--rtol", type=float, default=0.02)
    p.set_defaults(func=cmd_mabuchi)

    p = sub.add_parser("gap-scan", parents=[common], help="second-largest semistable volume over a directory")
    p.add_argument("directory")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--format", choices=("auto", "native", "matrix"), default="auto")
    p.add_argument("--orientation", choices=("auto", "rows", "columns"), default="auto")
    p.add_argument("--workers", type=int, default=None, help=f"processes (default ${WORKERS_ENV} or 1)")
    p.set_defaults(func=cmd_gap_scan)

    p = sub.add_parser("verify-inequalities", parents=[common], help="numeric sweep of the induction inequalities")
    p.add_argument("--max-n", type=int, default=500)
    p.add_argument("--full", action="store_true", help="list every check, not only failures")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("builtin", parents=[common], help="print a named polytope")
    p.add_argument("name", nargs="?")
    p.add_argument("params", nargs="*", type=int)
    p.add_argument("--list", action="store_true")
    p.add_argument("--out-format", choices=("native", "matrix"), default="native")
    p.set_defaults(func=cmd_builtin)

    p = sub.add_parser("fixtures", parents=[common], help="write the embedded dataset as polytope files")
    p.add_argument("directory")
    p.add_argument("--dim", type=int, default=None)
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, PolytopeError, ValueError) as exc:
        _say(f"error: {exc}")
        return EXIT_INPUT
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
