"""Exact rational polytopes: V/H representations, measures, duality, lattice tests.

Every quantity in this module is an exact :class:`fractions.Fraction`.  The
algorithms are exhaustive (subset enumeration) and intended for desk-scale
inputs: dimension at most 6 and at most a few hundred facets.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

MAX_DIM = 6
# cap on the number of n-subsets examined by the exhaustive enumerators
MAX_SUBSETS = 400_000

RationalVector = tuple  # tuple[Fraction, ...]


class PolytopeError(ValueError):
    """Base class for polytope construction errors."""


class DegenerateInput(PolytopeError):
    pass


class DimensionMismatch(PolytopeError):
    pass


class Unbounded(PolytopeError):
    pass


class Empty(PolytopeError):
    pass


class OriginNotInterior(PolytopeError):
    pass


class NotFanoNormalized(PolytopeError):
    pass


class SingularMatrix(PolytopeError):
    pass


class BadParams(PolytopeError):
    pass


class TooLarge(PolytopeError):
    pass


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite coordinate {x!r}")
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


def rvec(coords: Iterable) -> RationalVector:
    return tuple(to_fraction(c) for c in coords)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def sub(a: Sequence, b: Sequence) -> RationalVector:
    return tuple(x - y for x, y in zip(a, b))


def det(rows: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction-valued Gaussian elimination."""
    m = [list(map(Fraction, r)) for r in rows]
    n = len(m)
    if n == 0:
        return Fraction(1)
    sign = 1
    d = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            sign = -sign
        p = m[col][col]
        d *= p
        for r in range(col + 1, n):
            f = m[r][col] / p
            if f:
                row_r, row_c = m[r], m[col]
                for k in range(col, n):
                    row_r[k] -= f * row_c[k]
    return sign * d


def rank(rows: Sequence[Sequence]) -> int:
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return 0
    ncol = len(m[0])
    r = 0
    for col in range(ncol):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col] / m[r][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def solve(a: Sequence[Sequence], b: Sequence) -> RationalVector | None:
    """Solve a square system exactly; ``None`` when singular."""
    n = len(a)
    m = [list(map(Fraction, row)) + [Fraction(rhs)] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / p
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return tuple(m[i][n] / m[i][i] for i in range(n))


def kernel_vector(rows: Sequence[Sequence], n: int) -> RationalVector | None:
    """A nonzero vector orthogonal to ``rows`` when the kernel is one-dimensional."""
    m = [list(map(Fraction, r)) for r in rows]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][col]
        m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    if len(free) != 1:
        return None
    fcol = free[0]
    v = [Fraction(0)] * n
    v[fcol] = Fraction(1)
    for i, pc in enumerate(pivots):
        v[pc] = -m[i][fcol]
    return tuple(v)


def primitive(v: Sequence[Fraction]) -> tuple[tuple[int, ...], Fraction]:
    """Scale a rational vector to a primitive integer vector.

    Returns ``(l, s)`` with ``l = s * v`` and ``s > 0``.
    """
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        raise DegenerateInput("zero normal vector")
    return tuple(x // g for x in ints), Fraction(den, g)


@dataclass(frozen=True, order=True)
class HalfSpace:
    """The half-space ``{p : <normal, p> >= -offset}`` with a primitive integer normal."""

    normal: tuple[int, ...]
    offset: Fraction

    def __post_init__(self):
        normal = tuple(int(x) for x in self.normal)
        if not any(normal):
            raise DegenerateInput("half-space normal must be nonzero")
        g = 0
        for x in normal:
            g = math.gcd(g, x)
        offset = to_fraction(self.offset)
        if g != 1:
            normal = tuple(x // g for x in normal)
            offset = offset / g
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def from_rational(cls, normal: Sequence, offset) -> "HalfSpace":
        """Build from an arbitrary rational normal; the offset is rescaled with it."""
        l, s = primitive(rvec(normal))
        return cls(l, to_fraction(offset) * s)

    def slack(self, p: Sequence) -> Fraction:
        return dot(self.normal, p) + self.offset

    def contains(self, p: Sequence) -> bool:
        return self.slack(p) >= 0


@dataclass(frozen=True)
class Triangulation:
    """Simplices as tuples of vertex indices; ``pulling`` marks the apex convention
    (each simplex contains the lowest-index vertex of every face it was coned from)."""

    simplices: tuple[tuple[int, ...], ...]
    pulling: bool = True


@dataclass(frozen=True, eq=False)
class RationalPolytope:
    dim: int
    vertices: tuple[RationalVector, ...]
    facets: tuple[HalfSpace, ...]
    incidence: tuple[int, ...] = field(repr=False)  # bitset of vertex indices per facet

    # -- structural equality on the canonical form
    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalPolytope):
            return NotImplemented
        return (self.dim, self.vertices, self.facets) == (other.dim, other.vertices, other.facets)

    def __hash__(self) -> int:
        return hash((self.dim, self.vertices, self.facets))

    def facet_vertices(self, i: int) -> list[int]:
        bits = self.incidence[i]
        return [v for v in range(len(self.vertices)) if bits >> v & 1]

    def vertex_facets(self, v: int) -> list[int]:
        return [i for i, bits in enumerate(self.incidence) if bits >> v & 1]

    @property
    def vertex_array(self) -> np.ndarray:
        return np.array([[float(x) for x in v] for v in self.vertices])

    @property
    def normal_array(self) -> np.ndarray:
        return np.array([f.normal for f in self.facets], dtype=float)

    @property
    def offset_array(self) -> np.ndarray:
        return np.array([float(f.offset) for f in self.facets])

    def contains(self, p: Sequence) -> bool:
        return all(f.contains(p) for f in self.facets)

    def contains_interior(self, p: Sequence) -> bool:
        return all(f.slack(p) > 0 for f in self.facets)

    def is_fano_normalized(self) -> bool:
        return all(f.offset == 1 for f in self.facets)

    @cached_property
    def triangulation(self) -> Triangulation:
        return triangulate(self)

    @cached_property
    def volume(self) -> Fraction:
        return volume(self)

    @cached_property
    def barycenter(self) -> RationalVector:
        return barycenter(self)


# ---------------------------------------------------------------------------
# construction


def _check_points(points) -> list[RationalVector]:
    pts = [rvec(p) for p in points]
    if not pts:
        raise DegenerateInput("no points given")
    n = len(pts[0])
    if n == 0 or any(len(p) != n for p in pts):
        raise DimensionMismatch("ragged or zero-dimensional point list")
    if n > MAX_DIM:
        raise TooLarge(f"dimension {n} exceeds the supported maximum {MAX_DIM}")
    return pts


def _facets_exhaustive(pts: list[RationalVector], n: int) -> dict[HalfSpace, int]:
    found: dict[HalfSpace, int] = {}
    for combo in itertools.combinations(range(len(pts)), n):
        base = pts[combo[0]]
        rows = [sub(pts[i], base) for i in combo[1:]]
        if n == 1:
            normal = (Fraction(1),)
        else:
            normal = kernel_vector(rows, n)
            if normal is None:
                continue
        _add_facet_candidate(found, pts, normal, base)
    return found


def _facets_qhull(pts: list[RationalVector], n: int) -> dict[HalfSpace, int]:
    from scipy.spatial import ConvexHull

    arr = np.array([[float(x) for x in p] for p in pts])
    hull = ConvexHull(arr)
    found: dict[HalfSpace, int] = {}
    for simplex in hull.simplices:
        base = pts[simplex[0]]
        rows = [sub(pts[i], base) for i in simplex[1:]]
        normal = kernel_vector(rows, n)
        if normal is not None:
            _add_facet_candidate(found, pts, normal, base)
    return found


def _add_facet_candidate(found, pts, normal, base) -> None:
    vals = [dot(normal, p) for p in pts]
    b = dot(normal, base)
    lo = min(vals)
    hi = max(vals)
    if lo == hi:
        return
    if lo == b:
        l, s = primitive(normal)
        hs = HalfSpace(l, -b * s)
    elif hi == b:
        l, s = primitive(tuple(-x for x in normal))
        hs = HalfSpace(l, b * s)
    else:
        return
    if hs in found:
        return
    bits = 0
    for i, p in enumerate(pts):
        if hs.slack(p) == 0:
            bits |= 1 << i
    found[hs] = bits


def from_vertices(points: Iterable[Sequence]) -> RationalPolytope:
    """Convex hull of a finite point set, returned in canonical form.

    Vertices are sorted lexicographically and facets by (normal, offset).
    """
    pts = sorted(set(_check_points(points)))
    n = len(pts[0])
    if len(pts) < n + 1 or rank([sub(p, pts[0]) for p in pts[1:]]) < n:
        raise DegenerateInput("points do not span a full-dimensional polytope")
    if math.comb(len(pts), n) <= MAX_SUBSETS:
        found = _facets_exhaustive(pts, n)
    else:
        found = _facets_qhull(pts, n)
    # a point is a vertex iff the normals of its incident facets have full rank
    keep = []
    for i, p in enumerate(pts):
        normals = [hs.normal for hs, bits in found.items() if bits >> i & 1]
        if len(normals) >= n and rank(normals) == n:
            keep.append(p)
    return _canonical(n, keep, list(found))


def _canonical(n: int, verts: list[RationalVector], facets: list[HalfSpace]) -> RationalPolytope:
    verts = sorted(verts)
    facets = sorted(set(facets))
    incidence = []
    for hs in facets:
        bits = 0
        for i, v in enumerate(verts):
            s = hs.slack(v)
            if s < 0:
                raise AssertionError("vertex violates a facet inequality")
            if s == 0:
                bits |= 1 << i
        if bin(bits).count("1") < n:
            raise AssertionError("facet with fewer than n vertices")
        incidence.append(bits)
    return RationalPolytope(n, tuple(verts), tuple(facets), tuple(incidence))


def from_facets(halfspaces: Iterable) -> RationalPolytope:
    """Intersection of half-spaces ``<l_F, p> >= -a_F``.

    Vertices are found by solving every n-subset of facet equations and
    keeping the feasible solutions.
    """
    hs_list = []
    for h in halfspaces:
        if isinstance(h, HalfSpace):
            hs_list.append(h)
        else:
            normal, offset = h
            hs_list.append(HalfSpace.from_rational(normal, offset))
    if not hs_list:
        raise Empty("no half-spaces given")
    n = len(hs_list[0].normal)
    if any(len(h.normal) != n for h in hs_list):
        raise DimensionMismatch("half-space normals have different lengths")
    if n > MAX_DIM:
        raise TooLarge(f"dimension {n} exceeds the supported maximum {MAX_DIM}")
    hs_list = sorted(set(hs_list))
    if math.comb(len(hs_list), n) > MAX_SUBSETS:
        raise TooLarge("too many facets for exhaustive vertex enumeration")
    if _has_recession_direction([h.normal for h in hs_list], n):
        if not _feasible(hs_list, n):
            raise Empty("half-spaces have empty intersection")
        raise Unbounded("intersection is unbounded")
    verts = set()
    for combo in itertools.combinations(hs_list, n):
        x = solve([h.normal for h in combo], [-h.offset for h in combo])
        if x is not None and all(h.contains(x) for h in hs_list):
            verts.add(x)
    if not verts:
        raise Empty("half-spaces have empty intersection")
    return from_vertices(verts)


def _has_recession_direction(normals, n: int) -> bool:
    """True iff some d != 0 satisfies <l, d> >= 0 for all normals."""
    from scipy.optimize import linprog

    a = -np.array(normals, dtype=float)
    b = np.zeros(len(normals))
    for i in range(n):
        for s in (1.0, -1.0):
            c = np.zeros(n)
            c[i] = -s
            res = linprog(c, A_ub=a, b_ub=b, bounds=[(-1, 1)] * n, method="highs")
            if res.status == 0 and -res.fun > 1e-9:
                return True
    return False


def _feasible(hs_list, n: int) -> bool:
    from scipy.optimize import linprog

    a = -np.array([h.normal for h in hs_list], dtype=float)
    b = np.array([float(h.offset) for h in hs_list])
    res = linprog(np.zeros(n), A_ub=a, b_ub=b, bounds=[(None, None)] * n, method="highs")
    return res.status == 0


# ---------------------------------------------------------------------------
# triangulation and measures


def _affine_dim(points: list[RationalVector]) -> int:
    if not points:
        return -1
    return rank([sub(p, points[0]) for p in points[1:]]) if len(points) > 1 else 0


def triangulate(P: RationalPolytope) -> Triangulation:
    """Pulling triangulation: cone the lowest-index vertex over the faces missing it."""
    verts = P.vertices
    facet_sets = [frozenset(P.facet_vertices(i)) for i in range(len(P.facets))]
    memo: dict[frozenset, list[tuple[int, ...]]] = {}

    def subfaces(face: frozenset, d: int) -> list[frozenset]:
        out = set()
        for fs in facet_sets:
            inter = face & fs
            if inter != face and len(inter) >= d and _affine_dim([verts[i] for i in sorted(inter)]) == d - 1:
                out.add(inter)
        # drop non-maximal intersections
        return [f for f in out if not any(f < g for g in out)]

    def tri(face: frozenset, d: int) -> list[tuple[int, ...]]:
        if face in memo:
            return memo[face]
        if d == 0:
            res = [(min(face),)]
        elif len(face) == d + 1:
            res = [tuple(sorted(face))]
        else:
            apex = min(face)
            res = []
            for sf in sorted(subfaces(face, d), key=sorted):
                if apex not in sf:
                    res.extend((apex,) + s for s in tri(sf, d - 1))
        memo[face] = res
        return res

    simplices = tri(frozenset(range(len(verts))), P.dim)
    return Triangulation(tuple(simplices))


def simplex_volume(points: Sequence[RationalVector]) -> Fraction:
    n = len(points) - 1
    return abs(det([sub(p, points[0]) for p in points[1:]])) / math.factorial(n)


def volume(P: RationalPolytope) -> Fraction:
    """Exact Lebesgue volume."""
    return sum(
        (simplex_volume([P.vertices[i] for i in s]) for s in P.triangulation.simplices),
        Fraction(0),
    )


def barycenter(P: RationalPolytope) -> RationalVector:
    """Exact barycenter as the volume-weighted mean of simplex centroids."""
    total = Fraction(0)
    acc = [Fraction(0)] * P.dim
    for s in P.triangulation.simplices:
        pts = [P.vertices[i] for i in s]
        v = simplex_volume(pts)
        total += v
        for k in range(P.dim):
            acc[k] += v * sum(p[k] for p in pts) / (P.dim + 1)
    return tuple(a / total for a in acc)


def _facet_cones(P: RationalPolytope, i: int):
    """Simplices of facet ``i`` paired with the volume of their cone to an apex off the facet.

    Yields ``(facet_simplex_points, cone_volume, height)`` where ``height`` is
    ``<l_F, q> + a_F`` for the apex ``q``.
    """
    hs = P.facets[i]
    fverts = P.facet_vertices(i)
    q = next(P.vertices[v] for v in range(len(P.vertices)) if v not in fverts)
    height = hs.slack(q)
    # triangulate the facet as a face of P
    sub_P = _face_polytope(P, fverts)
    for simplex in sub_P:
        pts = [P.vertices[v] for v in simplex]
        yield pts, simplex_volume([q] + pts), height


def _face_polytope(P: RationalPolytope, face: list[int]) -> list[tuple[int, ...]]:
    verts = P.vertices
    facet_sets = [frozenset(P.facet_vertices(i)) for i in range(len(P.facets))]

    def tri(f: frozenset, d: int) -> list[tuple[int, ...]]:
        if d == 0:
            return [(min(f),)]
        if len(f) == d + 1:
            return [tuple(sorted(f))]
        apex = min(f)
        subs = set()
        for fs in facet_sets:
            inter = f & fs
            if inter != f and len(inter) >= d and _affine_dim([verts[k] for k in sorted(inter)]) == d - 1:
                subs.add(inter)
        subs = [s for s in subs if not any(s < g for g in subs)]
        res = []
        for s in sorted(subs, key=sorted):
            if apex not in s:
                res.extend((apex,) + t for t in tri(s, d - 1))
        return res

    return tri(frozenset(face), P.dim - 1)


def facet_measure(P: RationalPolytope, i: int) -> Fraction:
    """``vol_{n-1}(F) / ||l_F||`` for facet ``i``, exactly.

    For an apex ``q`` off the facet, ``Vol(conv(q, F)) = height * vol_{n-1}(F) / (n ||l_F||)``
    with ``height = <l_F, q> + a_F``, so the irrational norm never appears.
    """
    n = P.dim
    return sum((n * cv / h for _, cv, h in _facet_cones(P, i)), Fraction(0))


def boundary_measure(P: RationalPolytope) -> Fraction:
    """Total mass of the lattice boundary measure ``d sigma = d lambda / ||l_F||``."""
    return sum((facet_measure(P, i) for i in range(len(P.facets))), Fraction(0))


def boundary_moment(P: RationalPolytope) -> RationalVector:
    """Exact first moment ``int_{dP} p d sigma``."""
    n = P.dim
    acc = [Fraction(0)] * n
    for i in range(len(P.facets)):
        for pts, cv, h in _facet_cones(P, i):
            mass = n * cv / h
            for k in range(n):
                acc[k] += mass * sum(p[k] for p in pts) / len(pts)
    return tuple(acc)


def polar_dual(P: RationalPolytope) -> RationalPolytope:
    """``P* = {x : <x, p> <= 1 for all p in P}``; facets of P become vertices ``-l_F / a_F``."""
    if any(f.offset <= 0 for f in P.facets):
        raise OriginNotInterior("the origin is not an interior point")
    return from_vertices([tuple(Fraction(-c) / f.offset for c in f.normal) for f in P.facets])


def mahler_volume(P: RationalPolytope) -> Fraction:
    return P.volume * polar_dual(P).volume


def linear_image(P: RationalPolytope, A: Sequence[Sequence]) -> RationalPolytope:
    a = [rvec(row) for row in A]
    if len(a) != P.dim or any(len(r) != P.dim for r in a):
        raise DimensionMismatch("matrix shape does not match the polytope dimension")
    if det(a) == 0:
        raise SingularMatrix("linear map is not invertible")
    return from_vertices([tuple(dot(row, v) for row in a) for v in P.vertices])


def translate(P: RationalPolytope, t: Sequence) -> RationalPolytope:
    t = rvec(t)
    return from_vertices([tuple(x + y for x, y in zip(v, t)) for v in P.vertices])


def product(P: RationalPolytope, Q: RationalPolytope) -> RationalPolytope:
    return from_vertices([v + w for v in P.vertices for w in Q.vertices])


@dataclass(frozen=True)
class LatticeClass:
    is_lattice: bool
    is_reflexive: bool
    is_simplicial: bool
    vertex_deltas: tuple[int | None, ...]
    is_smooth: bool


def classify_lattice(P: RationalPolytope) -> LatticeClass:
    """Gorenstein / Q-factorial / smoothness tests for a Fano-normalized polytope.

    ``vertex_deltas[v]`` is ``|det(l_F1, ..., l_Fn)|`` over the facets through a
    simple vertex, or ``None`` when more than n facets meet there.
    """
    if not P.is_fano_normalized():
        raise NotFanoNormalized("every facet offset must equal 1")
    is_lattice = all(x.denominator == 1 for v in P.vertices for x in v)
    deltas: list[int | None] = []
    for v in range(len(P.vertices)):
        fs = P.vertex_facets(v)
        if len(fs) == P.dim:
            deltas.append(int(abs(det([P.facets[i].normal for i in fs]))))
        else:
            deltas.append(None)
    simplicial = all(d is not None for d in deltas)
    smooth = simplicial and all(d == 1 for d in deltas)
    return LatticeClass(is_lattice, is_lattice, simplicial, tuple(deltas), smooth)


# ---------------------------------------------------------------------------
# named polytopes


def _pn(n: int) -> RationalPolytope:
    minus = tuple(Fraction(-1) for _ in range(n))
    pts = [minus]
    for i in range(n):
        pts.append(tuple(Fraction(n) if k == i else Fraction(-1) for k in range(n)))
    return from_vertices(pts)


def builtin_polytope(name: str, *params: int) -> RationalPolytope:
    """Anticanonical moment polytopes of a few standard toric Fano varieties.

    ``Pn n``: (n+1) * simplex - (1,...,1).  ``PnxP1 n``: P^(n-1) x P^1 (dimension n).
    ``Xpq p q``: dual of conv{(+-p, +-q)}.  ``cube n``: [-1, 1]^n.  Also
    ``hexagon`` (degree 6 del Pezzo), ``Bl1P2``, ``Bl2P2``, ``Bl1P3``.
    """
    key = name.lower()
    try:
        if key == "pn":
            (n,) = params
            if not 1 <= n <= MAX_DIM:
                raise BadParams(f"Pn needs 1 <= n <= {MAX_DIM}")
            return _pn(n)
        if key == "pnxp1":
            (n,) = params
            if not 2 <= n <= MAX_DIM:
                raise BadParams(f"PnxP1 needs 2 <= n <= {MAX_DIM}")
            return product(_pn(n - 1), _pn(1))
        if key == "cube":
            (n,) = params
            if not 1 <= n <= MAX_DIM:
                raise BadParams(f"cube needs 1 <= n <= {MAX_DIM}")
            return from_vertices(itertools.product((-1, 1), repeat=n))
        if key == "xpq":
            p, q = params
            if p < 1 or q < 1 or math.gcd(p, q) != 1:
                raise BadParams("Xpq needs positive coprime p, q")
            return from_facets(
                HalfSpace((sp * p, sq * q), 1) for sp in (1, -1) for sq in (1, -1)
            )
        if params:
            raise BadParams(f"{name} takes no parameters")
        if key == "hexagon":
            return from_vertices([(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)])
        if key == "bl1p2":
            return from_vertices([(-1, 0), (0, -1), (2, -1), (-1, 2)])
        if key == "bl2p2":
            return from_vertices([(1, 0), (0, 1), (-1, 1), (-1, -1), (1, -1)])
        if key == "bl1p3":
            return from_facets(
                [HalfSpace(e, 1) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, -1, -1), (1, 1, 1))]
            )
    except ValueError as exc:
        if isinstance(exc, PolytopeError):
            raise
        raise BadParams(f"bad parameters for {name}: {params}") from exc
    raise BadParams(f"unknown builtin polytope {name!r}")


BUILTIN_NAMES = ("Pn", "PnxP1", "Xpq", "hexagon", "Bl1P2", "Bl2P2", "Bl1P3", "cube")
