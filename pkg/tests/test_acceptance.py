"""Acceptance criteria 1-9, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL ...`` line (also collected in
the terminal summary).  A line is written before the assertion so a failure
still reports what was measured.
"""
import io
import json
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

import conftest
from oracles import ccw_hull, polygon_barycenter, shoelace
from toricheight.cli import main
from toricheight.ding import DingProblem, maximize
from toricheight.fano import (
    analyze,
    family_constant,
    family_height,
    gap_scan,
    gap_threshold,
    ke_height_bounds,
    linear_equivalence_predict,
    mahler_check,
    pn_chi_volume,
    pn_height,
    product_additivity_check,
    universal_upper_bound,
    verify_induction_chain,
)
from toricheight.fixtures import fixtures, surfaces, threefolds
from toricheight.formats import serialize
from toricheight.legendre import (
    MaxAffinePotential,
    exact_support_integral,
    integrate_exp_neg,
    legendre_transform,
    santalo_check,
)
from toricheight.mabuchi import SmoothDualPotential, consistency_rhs, mabuchi_ding_consistency, mabuchi_terms
from toricheight.polytope import builtin_polytope

LOG_PI = math.log(math.pi)


def record(number, ok, detail, seconds):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}  [{seconds:.2f} s]"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)


def cli(monkeypatch, capsys, *argv, stdin=""):
    monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(stdin.encode())))
    code = main(list(argv))
    out, _ = capsys.readouterr()
    return code, json.loads(out)


def builtin_text(name, *params):
    return serialize(builtin_polytope(name, *params))


# ---------------------------------------------------------------------------


def test_criterion_1_exact_classification():
    t0 = time.perf_counter()
    expected_semistable = {"P2", "P1xP1", "hexagon"}
    problems = []
    for fx in surfaces():
        r = analyze(fx.polytope)
        hull = ccw_hull(fx.polytope.vertices)
        area, _, _ = shoelace(hull)
        oracle_semistable = polygon_barycenter(hull) == (0, 0)
        if r.k_semistable != (fx.name in expected_semistable) or r.k_semistable != oracle_semistable:
            problems.append(f"{fx.name} semistable={r.k_semistable}")
        if r.vol != area or r.vol != fx.expected["vol"]:
            problems.append(f"{fx.name} vol={r.vol} oracle={area}")
    vols = {fx.name: analyze(fx.polytope).vol for fx in surfaces()}
    assert vols == {"P2": Fraction(9, 2), "P1xP1": 4, "hexagon": 3, "Bl1P2": 4, "Bl2P2": Fraction(7, 2)}
    dt = time.perf_counter() - t0
    ok = not problems and dt < 1.0
    record(1, ok, f"volumes {', '.join(f'{k}={v}' for k, v in vols.items())}; "
                  f"semistable exactly {sorted(expected_semistable)}", dt)
    assert ok, problems


def test_criterion_2_height_of_the_line(monkeypatch, capsys):
    t0 = time.perf_counter()
    code, rep = cli(monkeypatch, capsys, "ke-height", "-", "--grid", "100", "--certified",
                    stdin=builtin_text("Pn", 1))
    dt = time.perf_counter() - t0
    d = rep["ding"]
    target = 2 * (1 + LOG_PI)
    h = d["height"]["value"]
    ok = code == 0 and d["n_nodes"] == 201 and d["certified"] and abs(h - target) <= 1e-3 and dt < 10
    record(2, ok, f"height {h:.7f} vs 2(1+log pi) = {target:.7f} (diff {h - target:.1e}, "
                  f"reported error {d['height']['error']:.1e}), {d['n_nodes']} nodes, certified", dt)
    assert ok


def test_criterion_3_height_of_the_plane(monkeypatch, capsys):
    t0 = time.perf_counter()
    code, rep = cli(monkeypatch, capsys, "ke-height", "-", stdin=builtin_text("Pn", 2))
    dt = time.perf_counter() - t0
    target = 13.5 * (2.5 + math.log(math.pi**2 / 2))
    h = rep["ding"]["height"]
    rel = abs(h["value"] - target) / target
    ok = code == 0 and rel <= 0.01 and dt < 300 and abs(h["value"] - target) <= h["error"]
    record(3, ok, f"height {h['value']:.4f} +- {h['error']:.2f} vs {target:.4f} (rel {rel:.2e}), "
                  f"grid {rep['ding']['grid']}", dt)
    assert ok


def test_criterion_4_product_additivity(monkeypatch, capsys):
    t0 = time.perf_counter()
    code, rep = cli(monkeypatch, capsys, "ke-height", "-", stdin=builtin_text("cube", 2))
    dt = time.perf_counter() - t0
    target = 24 * (1 + LOG_PI)
    _, chi = product_additivity_check([(2, pn_chi_volume(1)), (2, pn_chi_volume(1))])
    assert 6 * chi == pytest.approx(target, rel=1e-14)
    h = rep["ding"]["height"]["value"]
    rel = abs(h - target) / target
    # the alternative printed constant would put the same height at 24 (1 - log pi)
    printed = 6 * 4 * 0.5 * math.log(family_constant()["printed"] / 4)
    ok = code == 0 and rel <= 0.01
    record(4, ok, f"height {h:.4f} vs 24(1+log pi) = {target:.4f} (rel {rel:.2e}); "
                  f"note: printed family constant implies {printed:.4f}, off by a factor pi^4 in a", dt)
    assert ok


def test_criterion_5_family_cross_validation(monkeypatch, capsys):
    t0 = time.perf_counter()
    code, rep = cli(monkeypatch, capsys, "ke-height", "-", "--grid", "25", stdin=builtin_text("Xpq", 2, 3))
    optimizer = rep["ding"]["height"]["value"]
    formula = family_height(2, 3)
    square = maximize(builtin_polytope("cube", 2))
    vol = Fraction(1, 3)
    predicted = 6 * float(vol) * linear_equivalence_predict(square.chi_norm, Fraction(1, 12))
    dt = time.perf_counter() - t0
    values = {"optimizer": optimizer, "family_height": formula, "linear_equivalence": predicted}
    worst = max(abs(a - b) / max(abs(a), abs(b)) for a in values.values() for b in values.values())
    ok = code == 0 and worst <= 0.01
    record(5, ok, ", ".join(f"{k} {v:.5f}" for k, v in values.items()) + f"; worst pairwise rel {worst:.2e}", dt)
    assert ok


def test_criterion_6_bound_sandwich():
    t0 = time.perf_counter()
    violations, count = [], 0
    for fx in fixtures():
        P = fx.polytope
        r = analyze(P)
        if not r.k_semistable:
            continue
        n = P.dim
        lo, hi = ke_height_bounds(r.vol, n)
        if n <= 2:
            res = maximize(P)
            height, chi = res.height, res.chi_volume
        else:
            # bounds only; where additivity gives the height exactly, sandwich it too
            factors = {"P2xP1": [(Fraction(9, 2), pn_chi_volume(2)), (2, pn_chi_volume(1))],
                       "P1xP1xP1": [(2, pn_chi_volume(1))] * 3}
            if fx.name == "P3":
                height = pn_height(3)
            elif fx.name in factors:
                height = math.factorial(n + 1) * product_additivity_check(factors[fx.name])[1]
            else:
                height = None
            chi = None if height is None else height / math.factorial(n + 1)
        checks = [("ke_lower<=ke_upper", lo <= hi), ("ke_lower>0", lo > 0)]
        if height is not None:
            checks += [("ke_lower<=height", lo <= height), ("height<=ke_upper", height <= hi),
                       ("chi<=universal", chi <= universal_upper_bound(r.vol, n)),
                       ("height<=pn_height", height <= pn_height(n) * (1 + 1e-12))]
        for name, holds in checks:
            count += 1
            if not holds:
                violations.append(f"{fx.name}:{name}")
    dt = time.perf_counter() - t0
    ok = not violations
    record(6, ok, f"{count} inequalities over the semistable fixtures, {len(violations)} violations", dt)
    assert ok, violations


def test_criterion_7_induction_chain():
    t0 = time.perf_counter()
    checks = verify_induction_chain(500)
    dt = time.perf_counter() - t0
    families = {c.name for c in checks}
    failed = [c for c in checks if not c.holds]
    first = next(c for c in checks if c.name == "soughtafter" and c.n == 2)
    # independent evaluation of both sides at n = 2
    lhs = float(-4 * sp.log(sp.Rational(4) / (2 * sp.pi**2) ** 2))
    rhs = float(2 * sp.Rational(9, 4) * (3 * sp.Rational(3, 2) - 2 + sp.log(sp.pi**2 / 2)))
    reproduced = abs(first.lhs - lhs) <= 1e-6 and abs(first.rhs - rhs) <= 1e-6
    ok = len(families) == 5 and not failed and reproduced and dt < 1.0
    record(7, ok, f"{len(checks)} checks in 5 families, n = 2..500, {len(failed)} failures; "
                  f"n = 2: {first.lhs:.6f} < {first.rhs:.6f}, margin {first.margin:.6f} "
                  f"(the criterion's 18.37 / 0.06 do not match its own formulas; see ledger)", dt)
    assert ok


def _random_exact_instance(rng):
    nodes = [(Fraction(int(a), 2), Fraction(int(b), 2)) for a, b in rng.integers(-4, 5, (8, 2))]
    vals = [Fraction(int(v), 3) for v in rng.integers(-9, 10, 8)]
    xs = [(Fraction(int(a), 4), Fraction(int(b), 4)) for a, b in rng.integers(-8, 9, (10, 2))]
    return nodes, vals, xs


def test_criterion_8_property_suites(monkeypatch):
    t0 = time.perf_counter()
    parts = {}
    rng = np.random.default_rng(8)

    # (a) biconjugation idempotence, exact
    ok_a = True
    for _ in range(200):
        nodes, vals, xs = _random_exact_instance(rng)
        star = legendre_transform(nodes, vals, xs)
        ok_a &= legendre_transform(nodes, legendre_transform(xs, star, nodes), xs) == star
    parts["a"] = ok_a

    # (b) Santaló on 1000 centred instances, Gaussian near equality
    worst = 0.0
    ok_b = True
    for i in range(1000):
        n = 1 + i % 2
        m = int(rng.integers(n + 2, 10))
        if n == 1:
            s = np.r_[rng.uniform(-3, -0.2, 1), rng.uniform(0.2, 3, 1), rng.uniform(-3, 3, m - 2)][:, None]
        else:
            ang = 2 * np.pi * (np.arange(m) + rng.uniform(-0.4, 0.4, m)) / m
            s = np.c_[np.cos(ang), np.sin(ang)] * rng.uniform(0.3, 3, m)[:, None]
        res = santalo_check(MaxAffinePotential(s, rng.uniform(-2, 2, m)))
        ok_b &= res.holds
        worst = max(worst, res.product / res.bound)
    t = np.linspace(-9, 9, 301)[:, None]
    gauss = santalo_check(MaxAffinePotential(t, 0.5 * t[:, 0] ** 2))
    ok_b &= gauss.holds and gauss.product / gauss.bound > 0.999
    parts["b"] = ok_b

    # (c) subgradient vs central differences at 100 seeded points
    prob = DingProblem(builtin_polytope("Pn", 2), 4)
    err_c = 0.0
    for _ in range(100):
        c = 0.5 * (prob.nodes**2).sum(axis=1) + 0.2 * rng.standard_normal(len(prob))
        d = rng.standard_normal(len(prob))
        d /= np.linalg.norm(d)
        fd = (prob.evaluate(c + 1e-6 * d, 0).value - prob.evaluate(c - 1e-6 * d, 0).value) / 2e-6
        err_c = max(err_c, abs(fd - prob.evaluate(c, 1).grad @ d))
    parts["c"] = err_c <= 1e-5

    # (d) gauge invariance
    c = prob.initial("random", 1)
    err_d = max(abs(prob.objective(c + t) - prob.objective(c)) for t in (-3.0, 0.5, 7.0))
    parts["d"] = err_d <= 1e-12

    # (e) integral of exp(-psi_P) for every fixture
    ok_e = True
    for fx in fixtures():
        res = integrate_exp_neg(MaxAffinePotential.support(fx.polytope))
        exact = float(exact_support_integral(fx.polytope))
        ok_e &= abs(res.value - exact) <= max(res.error_bound, 1e-12 * exact)
    parts["e"] = ok_e

    # (f) consistency identity: exact on the line, 2% on P1 x P1 and P2
    line = mabuchi_terms(SmoothDualPotential.canonical(builtin_polytope("Pn", 1))).value
    ok_f = abs(line - consistency_rhs(pn_chi_volume(1), 2, 1)) < 1e-12 and abs(line - (2 * math.log(2) - 2)) < 1e-12
    rel_f = []
    for name in ("cube", "Pn"):
        P = builtin_polytope(name, 2)
        chk = mabuchi_ding_consistency(P, maximize(P), rtol=0.02)
        ok_f &= chk.holds
        rel_f.append(abs(chk.lhs - chk.rhs) / abs(chk.rhs))
    parts["f"] = ok_f

    # (g) Mahler products against the Kurlberg bound, exact
    parts["g"] = all(mahler_check(fx.polytope, "kurlberg").holds for fx in fixtures())

    dt = time.perf_counter() - t0
    ok = all(parts.values())
    record(8, ok, " ".join(f"({k}) {'ok' if v else 'FAIL'}" for k, v in parts.items())
           + f"; Santalo worst ratio {worst:.4f}, Gaussian {gauss.product / gauss.bound:.5f};"
           f" FD error {err_c:.1e}; gauge {err_d:.1e}; consistency rel {rel_f[0]:.2%} / {rel_f[1]:.2%}", dt)
    assert ok, parts


def test_criterion_9_gap_scan():
    t0 = time.perf_counter()
    g2 = gap_scan([(f.name, f.polytope) for f in surfaces()], 2)
    g3 = gap_scan([(f.name, f.polytope) for f in threefolds()], 3)
    dt = time.perf_counter() - t0
    ok = (g2.second_max == 4 == gap_threshold(2) and g3.second_max == 9 == gap_threshold(3)
          and g2.gap_holds and g3.gap_holds)
    record(9, ok, f"second largest semistable volume: n=2 {g2.second_max}, n=3 {g3.second_max}; "
                  f"2n^(n-1)/(n-1)! = {gap_threshold(2)}, {gap_threshold(3)}", dt)
    assert ok
