"""Embedded dataset of toric Fano polytopes with their expected classification."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .polytope import RationalPolytope, builtin_polytope


@dataclass(frozen=True)
class Fixture:
    name: str
    polytope: RationalPolytope = field(repr=False)
    tags: frozenset
    expected: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.polytope.dim


# name, builtin spec, volume, k-semistable, smooth, reflexive
_SURFACES = (
    ("P2", ("Pn", 2), Fraction(9, 2), True, True, True),
    ("P1xP1", ("cube", 2), Fraction(4), True, True, True),
    ("hexagon", ("hexagon",), Fraction(3), True, True, True),
    ("Bl1P2", ("Bl1P2",), Fraction(4), False, True, True),
    ("Bl2P2", ("Bl2P2",), Fraction(7, 2), False, True, True),
)

_THREEFOLDS = (
    ("P3", ("Pn", 3), Fraction(32, 3), True, True, True),
    ("P2xP1", ("PnxP1", 3), Fraction(9), True, True, True),
    ("P1xP1xP1", ("cube", 3), Fraction(8), True, True, True),
    ("Bl1P3", ("Bl1P3",), Fraction(28, 3), False, True, True),
)

XPQ_PAIRS = ((1, 1), (1, 2), (2, 3), (1, 3), (3, 4))


def _make(rows, extra_tags=()) -> tuple[Fixture, ...]:
    out = []
    for name, spec, vol, semi, smooth, reflexive in rows:
        P = builtin_polytope(*spec)
        tags = {f"dim{P.dim}"}
        tags.update(t for t, on in (("k-semistable", semi), ("smooth", smooth), ("reflexive", reflexive)) if on)
        tags.update(extra_tags)
        out.append(Fixture(name, P, frozenset(tags),
                           {"vol": vol, "k_semistable": semi, "is_smooth": smooth, "is_reflexive": reflexive}))
    return tuple(out)


def xpq(p: int, q: int) -> Fixture:
    """X_{p,q}: polar of the rectangle conv{(+-p, +-q)}, a rhombus of volume 2/(pq)."""
    P = builtin_polytope("Xpq", p, q)
    reflexive = p == q == 1  # the diamond; its vertices still have determinant 2
    tags = {"dim2", "k-semistable", "family:Xpq"} | ({"reflexive"} if reflexive else set())
    return Fixture(f"X{p},{q}", P, frozenset(tags),
                   {"vol": Fraction(2, p * q), "k_semistable": True, "is_smooth": False, "is_reflexive": reflexive})


@lru_cache(maxsize=None)
def surfaces() -> tuple[Fixture, ...]:
    """The five smooth toric del Pezzo surfaces."""
    return _make(_SURFACES, ("smooth-surface",))


@lru_cache(maxsize=None)
def threefolds() -> tuple[Fixture, ...]:
    return _make(_THREEFOLDS)


def fixtures() -> tuple[Fixture, ...]:
    """Surfaces, the dimension-3 set, and the X_{p,q} generators."""
    return surfaces() + threefolds() + tuple(xpq(p, q) for p, q in XPQ_PAIRS)


def by_name(name: str) -> Fixture:
    for fx in fixtures():
        if fx.name == name:
            return fx
    raise KeyError(name)
