"""Donaldson's toric Mabuchi functional and its relation to the Ding optimum.

For a convex dual potential u on P,

    M(u) = int_{dP} u dsigma - a int_P u dx - int_P log det D^2 u dx,

with ``dsigma = dlambda / |l_F|`` on each facet and ``a = sigma(dP) / Vol(P)``.

Two representations of u are supported.  :class:`SmoothDualPotential` is
``g * sum_F l_F log l_F + q`` with a polynomial ``q``; it is integrated by
tanh-sinh quadrature on the fan of P from the origin, where every facet slack
is evaluated without cancellation.  :class:`GridDualPotential` holds values on
a lattice grid; Hessians are central differences and a collar of width 2h
next to the boundary is left out of the log-det integral.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .checks import CheckResult
from .fano import pn_chi_volume, pn_volume
from .legendre import _hat_weights, grid_nodes
from .polytope import PolytopeError, RationalPolytope, boundary_measure

LOG_PI = math.log(math.pi)


class NonConvexInput(PolytopeError):
    pass


class HessianSingular(PolytopeError):
    pass


# ---------------------------------------------------------------------------
# smooth potentials


def _monomials(n: int, degree: int) -> list[tuple[int, ...]]:
    return [e for d in range(degree + 1) for e in itertools.product(range(d + 1), repeat=n) if sum(e) == d]


@dataclass(frozen=True)
class SmoothDualPotential:
    """u = guillemin * sum_F l_F log l_F + sum_e coeffs[e] p^e on P."""

    polytope: RationalPolytope
    coeffs: dict = field(default_factory=dict)
    guillemin: float = 1.0

    @property
    def normals(self) -> np.ndarray:
        return self.polytope.normal_array

    @classmethod
    def canonical(cls, P: RationalPolytope) -> "SmoothDualPotential":
        """The Guillemin potential; for P^n it is the Fubini-Study dual."""
        return cls(P, {}, 1.0)

    @classmethod
    def quadratic(cls, P: RationalPolytope) -> "SmoothDualPotential":
        n = P.dim
        return cls(P, {tuple(2 if k == j else 0 for k in range(n)): 0.5 for j in range(n)}, 0.0)

    @classmethod
    def fit(cls, P: RationalPolytope, nodes: np.ndarray, values: np.ndarray, degree: int = 4,
            weights: np.ndarray | None = None) -> "SmoothDualPotential":
        """Least-squares fit of the smooth part to nodal values, Guillemin part fixed."""
        base = cls.canonical(P)
        ell = _slacks(P, nodes)
        resid = values - base._guillemin_value(ell)
        mons = _monomials(P.dim, degree)
        basis = np.column_stack([np.prod(nodes ** np.array(e), axis=1) for e in mons])
        w = np.ones(len(nodes)) if weights is None else np.sqrt(weights)
        coef, *_ = np.linalg.lstsq(basis * w[:, None], resid * w, rcond=None)
        return cls(P, dict(zip(mons, coef.tolist())), 1.0)

    def with_affine(self, b, beta: float) -> "SmoothDualPotential":
        n = self.polytope.dim
        coeffs = dict(self.coeffs)
        zero = (0,) * n
        coeffs[zero] = coeffs.get(zero, 0.0) + beta
        for j in range(n):
            e = tuple(1 if k == j else 0 for k in range(n))
            coeffs[e] = coeffs.get(e, 0.0) + float(b[j])
        return SmoothDualPotential(self.polytope, coeffs, self.guillemin)

    def _guillemin_value(self, ell: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(ell > 0, ell * np.log(np.where(ell > 0, ell, 1.0)), 0.0)
        return self.guillemin * t.sum(axis=-1)

    def value(self, x: np.ndarray, ell: np.ndarray | None = None) -> np.ndarray:
        x = np.atleast_2d(x)
        if ell is None:
            ell = _slacks(self.polytope, x)
        out = self._guillemin_value(ell) if self.guillemin else np.zeros(len(x))
        for e, a in self.coeffs.items():
            out = out + a * np.prod(x ** np.array(e), axis=1)
        return out

    def hessian(self, x: np.ndarray, ell: np.ndarray | None = None) -> np.ndarray:
        x = np.atleast_2d(x)
        n = x.shape[1]
        if ell is None:
            ell = _slacks(self.polytope, x)
        h = np.zeros((len(x), n, n))
        if self.guillemin:
            L = self.normals
            h += self.guillemin * np.einsum("mf,fi,fj->mij", 1.0 / ell, L, L)
        for e, a in self.coeffs.items():
            for i in range(n):
                for j in range(n):
                    d = list(e)
                    coef = d[i]
                    d[i] -= 1
                    coef *= d[j]
                    d[j] -= 1
                    if coef:
                        h[:, i, j] += a * coef * np.prod(x ** np.array(d), axis=1)
        return h

    def logdet(self, x: np.ndarray, ell: np.ndarray) -> np.ndarray:
        """log det D^2 u, expanding the Guillemin part so corners stay accurate."""
        x = np.atleast_2d(x)
        n = x.shape[1]
        if not self.guillemin or n > 2:
            sign, ld = np.linalg.slogdet(self.hessian(x, ell))
            return np.where(sign > 0, ld, np.nan)
        poly = SmoothDualPotential(self.polytope, self.coeffs, 0.0).hessian(x, ell)
        g = self.guillemin
        L = self.normals
        inv = 1.0 / ell
        if n == 1:
            det = g * (inv @ (L[:, 0] ** 2)) + poly[:, 0, 0]
        else:
            perp = np.column_stack([-L[:, 1], L[:, 0]])
            cross = (L[:, None, 0] * L[None, :, 1] - L[:, None, 1] * L[None, :, 0]) ** 2
            pair = 0.5 * g * g * np.einsum("mf,fg,mg->m", inv, cross, inv)
            mixed = g * np.einsum("mf,fi,mij,fj->m", inv, perp, poly, perp)
            det = pair + mixed + np.linalg.det(poly)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(det > 0, np.log(np.where(det > 0, det, 1.0)), np.nan)

    def __call__(self, x):
        return self.value(np.atleast_2d(np.asarray(x, dtype=float)))


def _slacks(P: RationalPolytope, x: np.ndarray) -> np.ndarray:
    return np.clip(x @ P.normal_array.T + P.offset_array, 0.0, None)


# tanh-sinh rule on [0, 1] returning nodes, complements and weights
def _tanh_sinh(level: int = 6, tmax: float = 3.4):
    h = 2.0**-level
    t = np.arange(-tmax, tmax + h / 2, h)
    u = 0.5 * math.pi * np.sinh(t)
    x = 0.5 * (1.0 + np.tanh(u))
    xc = 1.0 / (1.0 + np.exp(2.0 * u))  # 1 - x without cancellation
    w = h * 0.25 * math.pi * np.cosh(t) / np.cosh(u) ** 2
    keep = (x > 0) & (xc > 0)
    return x[keep], xc[keep], w[keep]


@dataclass(frozen=True)
class MabuchiTerms:
    boundary: float
    volume_term: float  # a * int_P u
    logdet: float
    a: float

    @property
    def value(self) -> float:
        return self.boundary - self.volume_term - self.logdet


def _fan(P: RationalPolytope):
    """Facets as (vertex A, vertex B or None, facet index) forming the fan from 0."""
    out = []
    for i in range(len(P.facets)):
        vs = P.facet_vertices(i)
        if P.dim == 1:
            out.append((vs[0], None, i))
        elif P.dim == 2:
            out.append((vs[0], vs[1], i))
        else:
            raise NotImplementedError("smooth Mabuchi quadrature is implemented for n <= 2")
    return out


def mabuchi_terms(u: SmoothDualPotential, level: int = 5) -> MabuchiTerms:
    P = u.polytope
    n = P.dim
    V = float(P.volume)
    sigma = float(boundary_measure(P))
    a = sigma / V
    normals = P.normal_array
    norms = np.linalg.norm(normals, axis=1)
    offsets = P.offset_array
    s, sc, ws = _tanh_sinh(level)
    verts = P.vertex_array
    exact_slack = [[float(f.slack(v)) for f in P.facets] for v in P.vertices]
    bnd = vol_u = logdet = 0.0
    for ia, ib, fi in _fan(P):
        A = verts[ia]
        la = np.array(exact_slack[ia])
        if n == 1:
            x = s[:, None] * A[None, :]
            ell = sc[:, None] * offsets[None, :] + s[:, None] * la[None, :]
            jac = abs(A[0]) * np.ones_like(s)
            w = ws
            edge_x, edge_ell, edge_w = A[None, :], la[None, :], np.array([1.0 / norms[fi]])
        else:
            B = verts[ib]
            lb = np.array(exact_slack[ib])
            S, T = np.meshgrid(s, s, indexing="ij")
            Sc, Tc = np.meshgrid(sc, sc, indexing="ij")
            W = np.outer(ws, ws).ravel()
            S, T, Sc, Tc = S.ravel(), T.ravel(), Sc.ravel(), Tc.ravel()
            edge = Tc[:, None] * A[None, :] + T[:, None] * B[None, :]
            x = S[:, None] * edge
            ell = Sc[:, None] * offsets[None, :] + S[:, None] * (Tc[:, None] * la + T[:, None] * lb)
            jac = S * abs(A[0] * (B[1] - A[1]) - A[1] * (B[0] - A[0]))
            w = W
            edge_x = sc[:, None] * A[None, :] + s[:, None] * B[None, :]
            edge_ell = sc[:, None] * la[None, :] + s[:, None] * lb[None, :]
            edge_w = ws * np.linalg.norm(B - A) / norms[fi]
        vals = u.value(x, ell)
        ld = u.logdet(x, ell)
        if np.any(np.isnan(ld)):
            raise HessianSingular("Hessian is not positive definite inside P")
        vol_u += float(np.sum(w * jac * vals))
        logdet += float(np.sum(w * jac * ld))
        bnd += float(np.sum(edge_w * u.value(edge_x, edge_ell)))
    return MabuchiTerms(bnd, a * vol_u, logdet, a)


def mabuchi_estimate(u: SmoothDualPotential, level: int = 5) -> tuple[float, float]:
    """Value at ``level`` with the change from ``level - 1`` as its error estimate."""
    fine = mabuchi_terms(u, level).value
    return fine, abs(fine - mabuchi_terms(u, level - 1).value)


# ---------------------------------------------------------------------------
# grid potentials


@dataclass(frozen=True)
class GridDualPotential:
    """Values of u on the lattice grid of step 1/k in P (vertices included)."""

    polytope: RationalPolytope
    k: int
    exact_nodes: tuple
    values: np.ndarray

    @classmethod
    def sample(cls, P: RationalPolytope, k: int, func) -> "GridDualPotential":
        nodes = tuple(grid_nodes(P, k))
        arr = np.array([[float(t) for t in p] for p in nodes])
        return cls(P, k, nodes, np.asarray(func(arr), dtype=float))

    @property
    def nodes(self) -> np.ndarray:
        return np.array([[float(t) for t in p] for p in self.exact_nodes])


@dataclass(frozen=True)
class GridMabuchi:
    value: float
    boundary: float
    volume_term: float
    logdet: float
    collar_area: float
    collar_estimate: float  # log-det mass of the excluded collar, extrapolated from its rim
    interior_nodes: int


def grid_mabuchi(u: GridDualPotential, collar: int = 2, psd_tol: float = 1e-10) -> GridMabuchi:
    P = u.polytope
    n = P.dim
    k = u.k
    h = 1.0 / k
    index = {}
    for i, p in enumerate(u.exact_nodes):
        if all((t * k).denominator == 1 for t in p):
            index[tuple(int(t * k) for t in p)] = i
    vals = u.values
    V = float(P.volume)
    a = float(boundary_measure(P)) / V
    w = _hat_weights(list(u.exact_nodes), n)
    vol_u = float(sum(float(wi) * v for wi, v in zip(w, vals)))
    # boundary: trapezoid along each facet through the nodes lying on it
    bnd = 0.0
    for f in P.facets:
        on = [i for i, p in enumerate(u.exact_nodes) if f.slack(p) == 0]
        norm = math.sqrt(sum(c * c for c in f.normal))
        if n == 1:
            bnd += sum(vals[i] for i in on) / norm
            continue
        pts = np.array([[float(t) for t in u.exact_nodes[i]] for i in on])
        direction = np.array([-f.normal[1], f.normal[0]], dtype=float)
        order = np.argsort(pts @ direction)
        pts, fv = pts[order], vals[np.array(on)[order]]
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        bnd += float(np.sum(seg * (fv[1:] + fv[:-1]) / 2)) / norm
    # interior log det by central differences
    dist_ok = []
    logdets = []
    normals = [(np.array(f.normal, dtype=float), float(f.offset), math.sqrt(sum(c * c for c in f.normal)))
               for f in P.facets]
    for key, i in index.items():
        p = np.array(key) * h
        if min((l @ p + o) / nrm for l, o, nrm in normals) < collar * h - 1e-12:
            continue
        H = np.zeros((n, n))
        ok = True
        for r in range(n):
            e = [0] * n
            e[r] = 1
            plus, minus = _shift(key, e, 1), _shift(key, e, -1)
            if plus not in index or minus not in index:
                ok = False
                break
            H[r, r] = (vals[index[plus]] - 2 * vals[i] + vals[index[minus]]) / h**2
            for s_ in range(r + 1, n):
                f_ = [0] * n
                f_[s_] = 1
                pts = [_shift(_shift(key, e, a_), f_, b_) for a_ in (1, -1) for b_ in (1, -1)]
                if any(q not in index for q in pts):
                    ok = False
                    break
                pp, pm, mp, mm = (vals[index[q]] for q in pts)
                H[r, s_] = H[s_, r] = (pp - pm - mp + mm) / (4 * h**2)
        if not ok:
            continue
        eig = np.linalg.eigvalsh(H)
        if eig.min() < -psd_tol * max(1.0, abs(eig).max()):
            raise NonConvexInput(f"discrete Hessian is not PSD at node {tuple(p)}")
        if eig.min() <= 0:
            raise HessianSingular(f"discrete Hessian is singular at node {tuple(p)}")
        logdets.append(float(np.sum(np.log(eig))))
        dist_ok.append(min((l @ p + o) / nrm for l, o, nrm in normals))
    ld = np.array(logdets)
    logdet = float(ld.sum()) * h**n
    collar_area = V - len(ld) * h**n
    dist = np.array(dist_ok)
    rim = ld[dist < dist.min() + h / 2 + 1e-12] if len(ld) else np.array([0.0])
    estimate = collar_area * float(rim.mean())
    value = bnd - a * vol_u - logdet
    return GridMabuchi(value, bnd, a * vol_u, logdet, collar_area, estimate, len(ld))


def _shift(key, e, sgn):
    return tuple(k + sgn * d for k, d in zip(key, e))


# ---------------------------------------------------------------------------
# public operations


def donaldson_mabuchi(u, P: RationalPolytope | None = None, **kw) -> float:
    """Donaldson's functional for a smooth or grid dual potential."""
    if P is not None and P != u.polytope:
        raise ValueError("potential is defined on a different polytope")
    if isinstance(u, SmoothDualPotential):
        return mabuchi_terms(u, **kw).value
    if isinstance(u, GridDualPotential):
        return grid_mabuchi(u, **kw).value
    raise TypeError("expected SmoothDualPotential or GridDualPotential")


def consistency_rhs(chi_volume: float, vol, n: int) -> float:
    """-2 chi + V log V + n V log pi, the value of M at the KE potential."""
    V = float(vol)
    return -2.0 * chi_volume + V * math.log(V) + n * V * LOG_PI


def smooth_from_ding(result, degree: int = 6) -> SmoothDualPotential:
    """Smooth the optimizer's dual solution: Guillemin part plus a fitted polynomial."""
    dual = result.dual
    return SmoothDualPotential.fit(dual.polytope, dual.nodes, np.asarray(dual.values, dtype=float),
                                   degree=degree, weights=dual.weight_array)


def mabuchi_ding_consistency(P: RationalPolytope, ding, u_opt: SmoothDualPotential | None = None,
                             rtol: float = 0.02) -> CheckResult:
    """Check M(u_opt) against -2 chi + V log V + n V log pi within ``rtol``."""
    if u_opt is None:
        u_opt = smooth_from_ding(ding)
    lhs = donaldson_mabuchi(u_opt)
    rhs = consistency_rhs(ding.chi_volume, P.volume, P.dim)
    err = abs(lhs - rhs)
    scale = max(abs(rhs), 1.0)
    return CheckResult("mabuchi_ding_consistency", bool(err <= rtol * scale), lhs, rhs,
                       rtol * scale - err, P.dim, f"relative error {err / scale:.3e}")


@dataclass(frozen=True)
class InvariantGap:
    gap: float  # with the n V log pi term, consistent with the identity above
    gap_without_pi: float  # 2 (chi(P^n) - chi(X))
    value: float
    reference: float


def donaldson_invariant_gap(P: RationalPolytope, ding) -> InvariantGap:
    """[inf M - V log V](X) - [inf M - V log V](P^n), inf M recovered from the Ding optimum.

    The P^n reference uses its closed-form χ-volume.
    """
    from .ding import NotSemistable

    if any(x != 0 for x in P.barycenter):
        raise NotSemistable("barycenter of P is not the origin")
    n = P.dim
    V = float(P.volume)
    Vp = float(pn_volume(n))
    chi_p = pn_chi_volume(n)
    value = -2.0 * ding.chi_volume + n * V * LOG_PI
    ref = -2.0 * chi_p + n * Vp * LOG_PI
    return InvariantGap(value - ref, 2.0 * (chi_p - ding.chi_volume), value, ref)


def affine_gauge_defect(P: RationalPolytope) -> tuple[Fraction, tuple]:
    """Exact change of M under u -> u + <b, p> + beta, as coefficients of (beta, b).

    Returns ``(sigma(dP) - a Vol(P), int_dP p dsigma - a int_P p dx)``; both
    vanish for a reflexive polytope with barycenter 0.
    """
    from .polytope import boundary_moment

    V = P.volume
    sigma = boundary_measure(P)
    a = sigma / V
    bm = boundary_moment(P)
    interior = tuple(V * x for x in P.barycenter)
    return sigma - a * V, tuple(b - a * i for b, i in zip(bm, interior))
