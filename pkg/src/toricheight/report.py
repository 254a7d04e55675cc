"""JSON run reports.

Schema (version 1).  Exact rationals are strings ``"a/b"``; every float is an
object ``{"value": x, "error": e}`` where ``e`` bounds the absolute error
(closed forms carry a few ulps, optimizer output its solver and, when
available, discretization error).  Top-level keys, in order:

``schema_version, tool, tool_version, command, input, seed, fano, ding,
mabuchi, gap_scan, induction, checks, all_checks_hold, notes, timings``

Sections that do not apply are omitted.  ``input`` holds ``name``, the
``sha256`` of the raw bytes and ``canonical_sha256`` of the canonical native
serialization.  Each entry of ``checks`` has ``name, holds, lhs, rhs, margin,
n, detail``.
"""
from __future__ import annotations

import hashlib
import json
import math
from fractions import Fraction

from . import __version__
from .checks import CheckResult
from .fano import FanoReport, GapReport

SCHEMA_VERSION = 1
ORDER = ("schema_version", "tool", "tool_version", "command", "input", "seed", "fano", "ding", "mabuchi",
         "gap_scan", "induction", "checks", "all_checks_hold", "notes", "timings")


def exact(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def approx(value, error: float | None) -> dict:
    value = float(value)
    return {"value": value, "error": None if error is None else float(error)}


def closed_form(value) -> dict:
    """A value computed at high precision and rounded to double."""
    value = float(value)
    return approx(value, 0.0 if value == 0 or not math.isfinite(value) else 4 * math.ulp(value))


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def fano_section(r: FanoReport) -> dict:
    b = r.bounds
    return {
        "name": r.name,
        "dim": r.dim,
        "vol": exact(r.vol),
        "degree": exact(r.degree),
        "barycenter": [exact(x) for x in r.barycenter],
        "k_semistable": r.k_semistable,
        "is_reflexive": r.is_reflexive,
        "is_gorenstein": r.is_gorenstein,
        "is_q_factorial": r.is_q_factorial,
        "is_smooth": r.is_smooth,
        "vertex_deltas": [exact(d) for d in r.vertex_deltas],
        "mahler_volume": exact(r.mahler_volume),
        "bounds": {
            "universal_upper": closed_form(b.universal_upper),
            "ke_lower": closed_form(b.ke_lower),
            "ke_upper": closed_form(b.ke_upper),
            "corollary_upper": None if b.corollary_upper is None else closed_form(b.corollary_upper),
            "pn_height": closed_form(b.pn_height),
            "mahler_lower_kurlberg": closed_form(b.mahler_lower_kurlberg),
            "mahler_conjectured": closed_form(b.mahler_conjectured),
            "mahler_kind": b.mahler_kind,
        },
    }


def height_scale(dim: int, vol) -> float:
    """d height / d F."""
    return math.factorial(dim + 1) * float(vol) / 2


def ding_section(result, extrapolation=None) -> dict:
    scale = height_scale(result.dim, result.vol)
    solver_f = max(result.optimality_gap, 0.0) + result.integration_error
    disc = None if extrapolation is None else extrapolation.fine_error
    section = {
        "grid": result.grid,
        "n_nodes": result.n_nodes,
        "method": result.method,
        "F_star": approx(result.F_star, solver_f),
        "chi_volume": approx(result.chi_volume, solver_f * float(result.vol) / 2),
        "height": approx(result.height, solver_f * scale + (disc or 0.0)),
        "solver_error": solver_f * scale,
        "discretization_error": disc,
        "ke_residual": result.ke_residual,
        "iterations": result.iterations,
        "converged": result.converged,
        "certified": result.certified,
    }
    if extrapolation is not None:
        section["extrapolated_height"] = approx(extrapolation.height_limit, extrapolation.height_error)
    return section


def gap_section(g: GapReport) -> dict:
    return {
        "dim": g.dim,
        "entries": [{"name": nm, "vol": exact(v)} for nm, v in zip(g.names, g.volumes)],
        "maximum": None if g.maximum is None else exact(g.maximum),
        "second_max": None if g.second_max is None else exact(g.second_max),
        "threshold": exact(g.threshold),
        "gap_holds": g.gap_holds,
        "excluded": list(g.excluded),
    }


def check_entry(c: CheckResult) -> dict:
    return {"name": c.name, "holds": c.holds, "lhs": c.lhs, "rhs": c.rhs, "margin": c.margin,
            "n": c.n, "detail": c.detail}


def build(command: str, *, checks=(), **sections) -> dict:
    report = {"schema_version": SCHEMA_VERSION, "tool": "toricheight", "tool_version": __version__,
              "command": command}
    checks = list(checks)
    sections["checks"] = [check_entry(c) for c in checks]
    sections["all_checks_hold"] = all(c.holds for c in checks)
    for key in ORDER:
        if key in sections and sections[key] is not None:
            report[key] = sections[key]
    unknown = set(sections) - set(ORDER)
    if unknown:
        raise KeyError(f"unknown report sections {sorted(unknown)}")
    return report


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=True) + "\n"
