"""Classification of toric Fano polytopes and every closed-form height bound.

Exact comparisons (barycenter, volumes, the gap threshold) are rational.
Closed forms are evaluated with mpmath at 30 significant digits and returned
as floats unless ``as_mpf=True`` is requested, which keeps values such as
``pn_height(500)`` (about 1e1355) representable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from .checks import CheckResult
from .polytope import (
    NotFanoNormalized,
    PolytopeError,
    RationalPolytope,
    SingularMatrix,
    classify_lattice,
    mahler_volume,
    to_fraction,
)

DPS = 30
MAHLER_KINDS = ("kurlberg", "conjectured")


class MixedDimensions(PolytopeError):
    pass


def _ctx():
    return mpmath.workdps(DPS)


def _out(x, as_mpf: bool):
    return +x if as_mpf else float(x)


def harmonic(n: int):
    with _ctx():
        return mpmath.fsum(mpmath.mpf(1) / k for k in range(1, n + 1))


def _pn_bracket(n: int, h=None):
    """(n+1) H_n - n + log(pi^n / n!)."""
    if h is None:
        h = harmonic(n)
    return (n + 1) * h - n + n * mpmath.log(mpmath.pi) - mpmath.loggamma(n + 1)


def pn_height(n: int, *, as_mpf: bool = False):
    """Height of the anticanonical bundle of P^n with its volume-normalized
    Fubini-Study metric: ½ (n+1)^(n+1) ((n+1) H_n - n + log(pi^n/n!))."""
    if n < 1:
        raise ValueError("n must be positive")
    with _ctx():
        val = mpmath.mpf(n + 1) ** (n + 1) / 2 * _pn_bracket(n)
        return _out(val, as_mpf)


def pn_chi_volume(n: int, *, as_mpf: bool = False):
    """χ-arithmetic volume of P^n; equals ``pn_height(n) / (n+1)!``."""
    if n < 1:
        raise ValueError("n must be positive")
    with _ctx():
        val = mpmath.mpf(n + 1) ** n / mpmath.factorial(n) / 2 * _pn_bracket(n)
        return _out(val, as_mpf)


def universal_upper_bound(vol, n: int, *, as_mpf: bool = False):
    """Upper bound -½ vol log(vol / (2π²)^n) on the χ-volume of a K-semistable toric Fano."""
    vol = to_fraction(vol)
    if vol <= 0:
        raise ValueError("vol must be positive")
    with _ctx():
        v = mpmath.mpf(vol.numerator) / vol.denominator
        val = -v / 2 * (mpmath.log(v) - n * mpmath.log(2 * mpmath.pi**2))
        return _out(val, as_mpf)


def mahler_constant(n: int, kind: str = "kurlberg", *, as_mpf: bool = False):
    """Lower bound m_n for the Mahler volume: Kurlberg's, or the conjectured simplex value."""
    with _ctx():
        base = mpmath.mpf(n + 1) ** (n + 1) / mpmath.factorial(n) ** 2
        if kind == "kurlberg":
            val = (mpmath.pi / (2 * mpmath.e)) ** (n - 1) * base
        elif kind == "conjectured":
            val = base
        else:
            raise ValueError(f"unknown Mahler constant {kind!r}")
        return _out(val, as_mpf)


def ke_height_bounds(vol, n: int, mahler: str | float = "kurlberg", *, as_mpf: bool = False):
    """Lower and upper bounds for the Kähler-Einstein height.

    ``mahler`` selects m_n: ``"kurlberg"``, ``"conjectured"`` or a custom positive number.
    """
    vol = to_fraction(vol)
    if vol <= 0:
        raise ValueError("vol must be positive")
    with _ctx():
        m = mpmath.mpf(mahler) if not isinstance(mahler, str) else mahler_constant(n, mahler, as_mpf=True)
        v = mpmath.mpf(vol.numerator) / vol.denominator
        pref = mpmath.factorial(n + 1) / 2 * v
        lower = pref * mpmath.log(mpmath.factorial(n) * m * mpmath.pi**n / v)
        upper = pref * mpmath.log((2 * mpmath.pi) ** n * mpmath.pi**n / v)
        return _out(lower, as_mpf), _out(upper, as_mpf)


def corollary_upper(n: int, *, as_mpf: bool = False):
    """Universal height bound n (n+1)^(n+1)/2 · log(2π² n!/(n+1))."""
    with _ctx():
        val = (
            n * mpmath.mpf(n + 1) ** (n + 1) / 2
            * mpmath.log(2 * mpmath.pi**2 * mpmath.factorial(n) / (n + 1))
        )
        return _out(val, as_mpf)


def pn_volume(n: int) -> Fraction:
    return Fraction((n + 1) ** n, math.factorial(n))


def gap_threshold(n: int) -> Fraction:
    """Volume of P^(n-1) x P^1, the conjectured second-largest value."""
    return Fraction(2 * n ** (n - 1), math.factorial(n - 1))


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class BoundSet:
    universal_upper: float
    ke_lower: float
    ke_upper: float
    corollary_upper: float | None
    pn_height: float
    mahler_lower_kurlberg: float
    mahler_conjectured: float
    mahler_kind: str = "kurlberg"


@dataclass(frozen=True)
class FanoReport:
    dim: int
    vol: Fraction
    degree: Fraction
    barycenter: tuple
    k_semistable: bool
    is_reflexive: bool
    is_gorenstein: bool
    is_q_factorial: bool
    is_smooth: bool
    vertex_deltas: tuple
    mahler_volume: Fraction
    bounds: BoundSet
    name: str = ""


def analyze(P: RationalPolytope, mahler: str = "kurlberg", name: str = "") -> FanoReport:
    if not P.is_fano_normalized():
        raise NotFanoNormalized("every facet offset must equal 1")
    n = P.dim
    lat = classify_lattice(P)
    bary = P.barycenter
    semistable = all(x == 0 for x in bary)
    vol = P.volume
    lo, hi = ke_height_bounds(vol, n, mahler)
    bounds = BoundSet(
        universal_upper=universal_upper_bound(vol, n),
        ke_lower=lo,
        ke_upper=hi,
        corollary_upper=corollary_upper(n) if semistable else None,
        pn_height=pn_height(n),
        mahler_lower_kurlberg=mahler_constant(n, "kurlberg"),
        mahler_conjectured=mahler_constant(n, "conjectured"),
        mahler_kind=mahler,
    )
    return FanoReport(
        dim=n,
        vol=vol,
        degree=math.factorial(n) * vol,
        barycenter=bary,
        k_semistable=semistable,
        is_reflexive=lat.is_reflexive,
        is_gorenstein=lat.is_lattice,
        is_q_factorial=lat.is_simplicial,
        is_smooth=lat.is_smooth,
        vertex_deltas=lat.vertex_deltas,
        mahler_volume=mahler_volume(P),
        bounds=bounds,
        name=name,
    )


def mahler_check(P: RationalPolytope, kind: str = "kurlberg") -> CheckResult:
    """Compare the exact Mahler product with m_n.

    m_n is rational for the conjectured constant and for n = 1, and the check
    is then exact (P^n attains equality).  Otherwise the factor (π/2e)^(n-1)
    is transcendental and the comparison is made at 50 digits.
    """
    n = P.dim
    prod = mahler_volume(P)
    base = Fraction((n + 1) ** (n + 1), math.factorial(n) ** 2)
    if kind not in MAHLER_KINDS:
        raise ValueError(f"unknown Mahler constant {kind!r}")
    if kind == "conjectured" or n == 1:
        ok = prod >= base
        bound = float(base)
        margin = float(prod - base)
    else:
        with mpmath.workdps(50):
            b = mahler_constant(n, kind, as_mpf=True)
            exact = mpmath.mpf(prod.numerator) / prod.denominator
            ok = exact >= b
            bound = float(b)
            margin = float(exact - b)
    return CheckResult(f"mahler>={kind}", bool(ok), bound, float(prod), margin, n, f"product={prod}")


@dataclass(frozen=True)
class GapReport:
    dim: int
    volumes: tuple  # sorted descending, semistable entries only
    names: tuple
    maximum: Fraction | None
    second_max: Fraction | None
    threshold: Fraction
    gap_holds: bool
    excluded: tuple = field(default=())


def gap_scan(dataset: Iterable, n: int) -> GapReport:
    """Scan for the second-largest anticanonical volume among barycenter-zero entries.

    ``dataset`` holds polytopes or ``(name, polytope)`` pairs.
    """
    rows = []
    excluded = []
    for i, item in enumerate(dataset):
        name, P = item if isinstance(item, tuple) else (f"#{i}", item)
        if P.dim != n:
            raise MixedDimensions(f"{name} has dimension {P.dim}, expected {n}")
        if not P.is_fano_normalized():
            raise NotFanoNormalized(f"{name} is not Fano-normalized")
        if all(x == 0 for x in P.barycenter):
            rows.append((P.volume, name))
        else:
            excluded.append(name)
    rows.sort(key=lambda r: (-r[0], r[1]))
    vols = tuple(v for v, _ in rows)
    thr = gap_threshold(n)
    second = vols[1] if len(vols) > 1 else None
    return GapReport(
        dim=n,
        volumes=vols,
        names=tuple(nm for _, nm in rows),
        maximum=vols[0] if vols else None,
        second_max=second,
        threshold=thr,
        gap_holds=second is None or second <= thr,
        excluded=tuple(excluded),
    )


# ---------------------------------------------------------------------------
# induction chain


def verify_induction_chain(N: int) -> list[CheckResult]:
    """Numerically check the inequalities behind the P^(n-1) x P^1 reduction, n = 2..N.

    Families: ``soughtafter`` (the volume-to-height inequality), ``pn_chi_positive``,
    ``e_n`` (e_n = (1+1/n)^n increasing and at most 4), ``harmonic_gamma``
    (H_{n+1} - log(n+1) > γ) and ``singular_volume`` (½(n+1)^n/n! <= 2n^(n-1)/(n-1)!).
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    out: list[CheckResult] = []
    with mpmath.workdps(DPS):
        log2pi2 = mpmath.log(2 * mpmath.pi**2)
        logpi = mpmath.log(mpmath.pi)
        gamma = mpmath.euler
        h = mpmath.mpf(1)  # H_1
        e_prev = mpmath.mpf(2)  # e_1
        for n in range(2, N + 1):
            h = h + mpmath.mpf(1) / n  # H_n
            logfact = mpmath.loggamma(n + 1)
            log_vol_prod = mpmath.log(2) + (n - 1) * mpmath.log(n) - mpmath.loggamma(n)
            vol_prod = mpmath.exp(log_vol_prod)
            lhs = -vol_prod * (log_vol_prod - n * log2pi2)
            chi = mpmath.exp(n * mpmath.log(n + 1) - logfact) / 2 * (
                (n + 1) * h - n + n * logpi - logfact
            )
            out.append(CheckResult("soughtafter", bool(lhs < 2 * chi), float(lhs), float(2 * chi),
                                   float(2 * chi - lhs), n))
            out.append(CheckResult("pn_chi_positive", bool(chi > 0), 0.0, float(chi), float(chi), n))
            e_n = (1 + mpmath.mpf(1) / n) ** n
            ok = e_n > e_prev and e_n <= 4
            out.append(CheckResult("e_n", bool(ok), float(e_n), 4.0, float(min(4 - e_n, e_n - e_prev)), n,
                                   f"e_(n-1)={float(e_prev):.12g}"))
            e_prev = e_n
            hh = h + mpmath.mpf(1) / (n + 1) - mpmath.log(n + 1)
            out.append(CheckResult("harmonic_gamma", bool(hh > gamma), float(gamma), float(hh),
                                   float(hh - gamma), n))
            sing = mpmath.exp(n * mpmath.log(n + 1) - logfact) / 2
            out.append(CheckResult("singular_volume", bool(sing <= vol_prod), float(sing),
                                   float(vol_prod), float(vol_prod - sing), n))
    return out


# ---------------------------------------------------------------------------
# product additivity and the X_{p,q} family


def product_additivity_check(reports: Sequence[tuple]) -> tuple[float, float]:
    """Combine factors given as ``(vol, chi_volume)``.

    Returns the normalized height Σ chi_i/vol_i of the product and the implied
    product χ-volume Π vol_i · Σ chi_i/vol_i.
    """
    if not reports:
        raise ValueError("need at least one factor")
    norm = math.fsum(float(c) / float(v) for v, c in reports)
    vol = math.prod(float(v) for v, _ in reports)
    return norm, vol * norm


def family_constant() -> dict:
    """The constant ``a`` in the X_{p,q} height formula.

    ``derived`` follows from P^1 additivity: a = Vol·exp(2 chi/Vol) with
    Vol = 4 and chi = 4(1 + log π), i.e. 4e²π².  ``printed`` is the alternative
    normalization 4·exp(2 - log π²); the two differ by a factor π⁴.
    """
    _, chi = product_additivity_check([(2, pn_chi_volume(1)), (2, pn_chi_volume(1))])
    derived = 4 * math.exp(2 * chi / 4)
    printed = 4 * math.exp(2 - math.log(math.pi**2))
    return {"derived": derived, "printed": printed, "ratio": derived / printed}


def family_height(p: int, q: int, *, constant: str = "derived") -> float:
    """KE height of X_{p,q}: 3 · (2/pq) · log(a pq / 2)."""
    if p < 1 or q < 1:
        raise ValueError("p and q must be positive")
    a = family_constant()[constant]
    vol = 2 / (p * q)
    return 3 * vol * math.log(a * p * q / 2)


def linear_equivalence_predict(base_chi_norm: float, det_a) -> float:
    """Normalized height after an invertible linear map with determinant ``det_a``."""
    d = to_fraction(det_a)
    if d == 0:
        raise SingularMatrix("determinant is zero")
    return base_chi_norm - 0.5 * math.log(abs(float(d)))
