"""Convex duality numerics on moment polytopes.

Potentials on R^n are max-affine functions whose slopes are points of P; dual
potentials are sampled on lattice grids of P.  Integrals of exp(-phi) are exact
per cell up to a certified truncation tail (``method="cells"``) or computed by
adaptive tensor Gauss-Legendre quadrature (``method="adaptive"``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull, Delaunay

from . import _cells
from ._cells import TailDivergence, simplex_exp_dd
from .polytope import RationalPolytope, dot, polar_dual, simplex_volume

__all__ = [
    "DualGridFunction",
    "IntegralResult",
    "MaxAffinePotential",
    "SantaloResult",
    "SupportFunction",
    "TailDivergence",
    "dual_grid",
    "integrate_dual",
    "integrate_exp_neg",
    "legendre",
    "legendre_transform",
    "santalo_check",
]


@dataclass(frozen=True)
class SupportFunction:
    """psi_P(x) = max over vertices of <v, x>; exact for rational input."""

    polytope: RationalPolytope

    def __call__(self, x: Sequence):
        if all(isinstance(t, (int, Fraction)) for t in x):
            return max(dot(v, x) for v in self.polytope.vertices)
        return float(np.max(self.polytope.vertex_array @ np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class MaxAffinePotential:
    """phi(x) = max_i <slopes[i], x> - intercepts[i]."""

    slopes: np.ndarray
    intercepts: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.slopes, dtype=float))
        c = np.asarray(self.intercepts, dtype=float).reshape(-1)
        if s.shape[0] != c.shape[0] or s.shape[0] == 0:
            raise ValueError("need one intercept per slope and at least one piece")
        object.__setattr__(self, "slopes", s)
        object.__setattr__(self, "intercepts", c)

    @property
    def dim(self) -> int:
        return self.slopes.shape[1]

    @classmethod
    def support(cls, P: RationalPolytope) -> "MaxAffinePotential":
        return cls(P.vertex_array, np.zeros(len(P.vertices)))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        vals = x.reshape(-1, self.dim) @ self.slopes.T - self.intercepts
        out = vals.max(axis=1)
        return out.reshape(x.shape[:-1]) if x.ndim > 1 else out[0]

    def translate(self, b) -> "MaxAffinePotential":
        """The potential x -> phi(x + b)."""
        return MaxAffinePotential(self.slopes, self.intercepts - self.slopes @ np.asarray(b, dtype=float))


@dataclass(frozen=True)
class DualGridFunction:
    """Values of a dual potential on grid nodes of P with exact quadrature weights.

    ``weights`` are rationals summing to Vol(P); ``weight_array`` is their float image.
    """

    polytope: RationalPolytope
    exact_nodes: tuple
    values: np.ndarray
    weights: tuple
    step: Fraction

    @property
    def nodes(self) -> np.ndarray:
        return np.array([[float(t) for t in p] for p in self.exact_nodes])

    @property
    def weight_array(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    def with_values(self, values) -> "DualGridFunction":
        return DualGridFunction(self.polytope, self.exact_nodes, np.asarray(values), self.weights, self.step)

    def __len__(self) -> int:
        return len(self.exact_nodes)


def grid_nodes(P: RationalPolytope, k: int) -> list[tuple]:
    """Points of (1/k) Z^n inside P together with the vertices of P, sorted."""
    if k < 1:
        raise ValueError("grid resolution must be positive")
    n = P.dim
    ranges = []
    for a in range(n):
        lo = min(v[a] for v in P.vertices) * k
        hi = max(v[a] for v in P.vertices) * k
        ranges.append(range(math.ceil(lo), math.floor(hi) + 1))
    pts = set(P.vertices)
    normals = [f.normal for f in P.facets]
    offs = [f.offset * k for f in P.facets]
    for idx in itertools.product(*ranges):
        if all(sum(l * i for l, i in zip(nv, idx)) >= -o for nv, o in zip(normals, offs)):
            pts.add(tuple(Fraction(i, k) for i in idx))
    return sorted(pts)


def _hat_weights(nodes: list[tuple], n: int) -> list[Fraction]:
    """Exact integrals of piecewise-linear hat functions on a triangulation of the nodes."""
    w = [Fraction(0)] * len(nodes)
    if n == 1:
        for a in range(len(nodes) - 1):
            h = (nodes[a + 1][0] - nodes[a][0]) / 2
            w[a] += h
            w[a + 1] += h
        return w
    tri = Delaunay(np.array([[float(t) for t in p] for p in nodes]), qhull_options="Qbb Qc Qz Q12 Qt")
    for s in tri.simplices:
        vol = simplex_volume([nodes[i] for i in s]) / (n + 1)
        if vol:
            for i in s:
                w[i] += vol
    return w


def dual_grid(P: RationalPolytope, k: int, values=None) -> DualGridFunction:
    """Lattice grid of step 1/k in P, augmented by the vertices, with hat-function weights.

    Raises if the weights fail to sum exactly to Vol(P).
    """
    nodes = grid_nodes(P, k)
    w = _hat_weights(nodes, P.dim)
    keep = [i for i, x in enumerate(w) if x > 0 or nodes[i] in set(P.vertices)]
    nodes = [nodes[i] for i in keep]
    w = [w[i] for i in keep]
    if sum(w) != P.volume:
        raise AssertionError("grid weights do not reproduce the volume")
    vals = np.zeros(len(nodes)) if values is None else np.asarray(values)
    return DualGridFunction(P, tuple(nodes), vals, tuple(w), Fraction(1, k))


def legendre(u: DualGridFunction, x) -> float:
    """max over nodes of <p, x> - u(p); the first maximizing node wins ties."""
    return legendre_transform(u.exact_nodes if _is_exact(x, u.values) else u.nodes, u.values, [x])[0]


def _is_exact(x, values) -> bool:
    return all(isinstance(t, (int, Fraction)) for t in x) and np.asarray(values).dtype == object


def legendre_transform(nodes, values, points) -> list:
    """Discrete Legendre transform from ``nodes`` (with ``values``) to ``points``.

    Works on floats, or exactly when nodes, values and points are rationals.
    """
    vals = list(values)
    exact = len(vals) > 0 and isinstance(vals[0], (int, Fraction))
    if exact:
        out = []
        for x in points:
            best = None
            for p, u in zip(nodes, vals):
                t = dot(p, x) - u
                if best is None or t > best:
                    best = t
            out.append(best)
        return out
    nd = np.asarray(nodes, dtype=float).reshape(len(vals), -1)
    pts = np.asarray(points, dtype=float).reshape(-1, nd.shape[1])
    return list((pts @ nd.T - np.asarray(vals, dtype=float)).max(axis=1))


def integrate_dual(u: DualGridFunction) -> float:
    """Quadrature of the integral of u over P."""
    vals = u.values
    if np.asarray(vals).dtype == object:
        return sum((w * v for w, v in zip(u.weights, vals)), Fraction(0))
    return float(math.fsum(float(w) * float(v) for w, v in zip(u.weights, vals)))


# ---------------------------------------------------------------------------
# integration of exp(-phi)


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_bound: float
    method: str

    def __iter__(self):
        return iter((self.value, self.error_bound))


def _z_lower_unit(slopes: np.ndarray) -> float:
    """Lower bound for the integral of exp(-psi_S) where S = conv(slopes)."""
    n = slopes.shape[1]
    r = float(np.linalg.norm(slopes, axis=1).max())
    surface = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    return surface * math.gamma(n) / r**n


def integrate_exp_neg(phi: MaxAffinePotential, tol: float = 1e-10, method: str = "auto") -> IntegralResult:
    """Integral of exp(-phi) over R^n with an error bound.

    ``method``: ``"exact"`` for n = 1 (closed form per piece), ``"cells"`` for
    exact per-cell integration inside a certified box, ``"adaptive"`` for tensor
    Gauss-Legendre on the box.  ``"auto"`` picks exact, then cells.
    """
    n = phi.dim
    if method == "auto":
        method = "exact" if n == 1 else "cells"
    if method == "exact" and n != 1:
        method = "cells"
    if method in ("exact", "cells"):
        res = _cells.cell_integrals(phi.slopes, phi.intercepts, z_lower_unit=_z_lower_unit(phi.slopes))
        z = res.z
        err = z * (res.tail + 64 * np.finfo(float).eps * max(1, len(phi.intercepts)))
        return IntegralResult(z, err, method)
    if method == "adaptive":
        return _integrate_adaptive(phi, tol)
    raise ValueError(f"unknown integration method {method!r}")


_GL_CACHE: dict = {}
ADAPTIVE_SAFETY = 10.0


def _gl_rule(order: int, n: int):
    key = (order, n)
    if key not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        grids = np.meshgrid(*([x] * n), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        wts = np.prod(np.stack(np.meshgrid(*([w] * n), indexing="ij")), axis=0).ravel()
        _GL_CACHE[key] = (pts, wts)
    return _GL_CACHE[key]


def _integrate_adaptive(phi: MaxAffinePotential, tol: float, order: int = 6,
                        max_cells: int = 400_000) -> IntegralResult:
    n = phi.dim
    slopes, c = phi.slopes, phi.intercepts
    rho = _cells.inradius(slopes)
    if rho <= 0:
        raise TailDivergence("0 is not an interior point of the slope hull")
    hull_idx = ConvexHull(slopes).vertices if n > 1 else np.array([slopes[:, 0].argmin(), slopes[:, 0].argmax()])
    shift = float(c[hull_idx].max())
    cs = c - shift
    zlow = math.exp(float(cs.min())) * _z_lower_unit(slopes)
    radius = _cells.choose_radius(n, rho, 0.0, zlow, rtol=min(1e-3 * tol, 1e-13))
    tail = _cells.tail_bound(n, rho, radius, 0.0)
    pts, wts = _gl_rule(order, n)

    def rule(centres, half, chunk=20_000):
        out = np.empty(len(centres))
        for a in range(0, len(centres), chunk):
            ce, hf = centres[a:a + chunk], half[a:a + chunk]
            x = ce[:, None, :] + hf[:, None, None] * pts[None, :, :]
            f = (x.reshape(-1, n) @ slopes.T - cs).max(axis=1).reshape(len(ce), -1)
            out[a:a + chunk] = (np.exp(-f) @ wts) * hf**n
        return out

    children = np.array(list(itertools.product((-0.5, 0.5), repeat=n)))
    centres = np.zeros((1, n))
    half = np.array([radius])
    parent = rule(centres, half)
    total = 0.0
    err_total = 0.0
    box_vol = (2 * radius) ** n
    budget = tol * zlow
    n_cells = 0
    while len(centres):
        cc = (centres[:, None, :] + half[:, None, None] * children[None, :, :]).reshape(-1, n)
        hh = np.repeat(half / 2, len(children))
        kid = rule(cc, hh)
        kid_sum = kid.reshape(-1, len(children)).sum(axis=1)
        err = np.abs(kid_sum - parent)
        # cells cut by a kink carry error O(h^(n+1)): share the budget by edge length too
        local = budget * np.maximum((2 * half) ** n / box_vol, half / (8 * n * len(c) * radius))
        ok = err <= local
        total += kid_sum[ok].sum()
        err_total += err[ok].sum()
        n_cells += len(cc)
        refine = np.repeat(~ok, len(children))
        centres, half, parent = cc[refine], hh[refine], kid[refine]
        if n_cells > max_cells and len(centres):
            total += parent.sum()
            err_total += float("inf")
            break
    scale = math.exp(shift)
    # |children - parent| is a heuristic; kink cells can beat it by a few times
    return IntegralResult(total * scale, (ADAPTIVE_SAFETY * err_total + tail) * scale, "adaptive")


# ---------------------------------------------------------------------------
# Santaló


@dataclass(frozen=True)
class SantaloResult:
    product: float
    bound: float
    holds: bool
    integral: float
    dual_integral: float
    centre: np.ndarray


def _dual_exp_integral(slopes: np.ndarray, intercepts: np.ndarray) -> float:
    """Integral of exp(-phi*) where phi* is the convex envelope of the intercepts
    over conv(slopes) and +inf outside."""
    n = slopes.shape[1]
    hull = _cells.lower_hull(slopes, intercepts)
    total = 0.0
    for s in hull.simplices:
        verts = slopes[s]
        vol = abs(np.linalg.det(verts[1:] - verts[0])) if n > 1 else abs(verts[1, 0] - verts[0, 0])
        f = intercepts[s]
        fmin = f.min()
        total += vol * math.exp(-fmin) * float(simplex_exp_dd((f - fmin)[None, :])[0])
    return total


def santalo_check(phi: MaxAffinePotential, tol: float = 1e-9) -> SantaloResult:
    """Functional Santaló test: after centring exp(-phi) dx at 0, the product of
    the integrals of exp(-phi) and exp(-phi*) is at most (2 pi)^n."""
    res = _cells.cell_integrals(phi.slopes, phi.intercepts, z_lower_unit=_z_lower_unit(phi.slopes),
                                want_moment=True)
    z = res.z
    centred = phi.translate(res.first_moment)
    dual = _dual_exp_integral(centred.slopes, centred.intercepts)
    prod = z * dual
    bound = (2 * math.pi) ** phi.dim
    return SantaloResult(prod, bound, bool(prod <= bound + tol), z, dual, res.first_moment)


def exact_support_integral(P: RationalPolytope) -> Fraction:
    """n! Vol(P*), the exact value of the integral of exp(-psi_P)."""
    return math.factorial(P.dim) * polar_dual(P).volume
