"""Cells of max-affine functions and exact integrals of exp(-phi) over them.

For ``phi(x) = max_i <p_i, x> - c_i`` the cell of node ``i`` is where its piece
attains the max.  Cells are computed from the lower convex hull of the lifted
points ``(p_i, c_i)``: visible nodes are its vertices and cell neighbours are
its edges.  The integral over each cell is taken exactly on a fan of
triangles (simplices for n > 2) inside a truncation box ``[-R, R]^n``, and the
mass outside the box is bounded analytically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special
from scipy.spatial import ConvexHull, QhullError

TAIL_RTOL = 1e-15


class TailDivergence(ValueError):
    """The slopes do not contain 0 in their interior, so exp(-phi) is not integrable."""


@dataclass
class LowerHull:
    simplices: np.ndarray  # (k, n+1) node indices of lower facets
    planes: np.ndarray  # (k, n+1): envelope = planes[:, :n] @ p + planes[:, n]
    visible: np.ndarray  # bool mask of nodes that are hull vertices
    envelope: np.ndarray  # convex envelope of c evaluated at the nodes


def lower_hull(points: np.ndarray, c: np.ndarray) -> LowerHull:
    """Lower convex hull of the lifted points ``(p_i, c_i)``.

    A single apex far above the data is added so that qhull always sees a
    full-dimensional point set, including the flat case ``c = const``.
    """
    m, n = points.shape
    if n == 1:
        return _lower_hull_1d(points[:, 0], c)
    span = float(np.ptp(c)) + float(np.ptp(points)) + 1.0
    apex = np.append(points.mean(axis=0), c.max() + 10.0 * span)
    lifted = np.vstack([np.column_stack([points, c]), apex])
    hull = ConvexHull(lifted, qhull_options="Qt")
    eq = hull.equations
    lower = eq[:, n] < -1e-12
    simplices = hull.simplices[lower]
    if np.any(simplices == m):
        raise AssertionError("apex on a lower facet")
    e = eq[lower]
    # facet: e[:n].p + e[n] z + e[n+1] = 0  =>  z = -(e[:n].p + e[n+1]) / e[n]
    planes = np.column_stack([-e[:, :n] / e[:, [n]], -e[:, [n + 1]] / e[:, [n]]])
    visible = np.zeros(m, dtype=bool)
    visible[np.unique(simplices)] = True
    env = (points @ planes[:, :n].T + planes[:, n]).max(axis=1)
    env = np.minimum(env, c)
    env[visible] = c[visible]
    return LowerHull(simplices, planes, visible, env)


def _lower_hull_1d(p: np.ndarray, c: np.ndarray) -> LowerHull:
    order = np.lexsort((c, p))
    hull: list[int] = []
    for i in order:
        if hull and p[hull[-1]] == p[i]:
            continue  # same slope, larger intercept never wins
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b if it lies on or above the chord from a to i
            if (c[b] - c[a]) * (p[i] - p[a]) >= (c[i] - c[a]) * (p[b] - p[a]):
                hull.pop()
            else:
                break
        hull.append(int(i))
    idx = np.array(hull)
    simplices = np.column_stack([idx[:-1], idx[1:]])
    slope = (c[idx[1:]] - c[idx[:-1]]) / (p[idx[1:]] - p[idx[:-1]])
    planes = np.column_stack([slope, c[idx[:-1]] - slope * p[idx[:-1]]])
    visible = np.zeros(len(p), dtype=bool)
    visible[idx] = True
    env = np.interp(p, p[idx], c[idx])
    env = np.minimum(env, c)
    env[visible] = c[visible]
    return LowerHull(simplices, planes, visible, env)


# ---------------------------------------------------------------------------
# elementary exact integrals


def psi1(s: np.ndarray) -> np.ndarray:
    """(1 - e^-s)/s, continuous at 0; accepts complex input."""
    s = np.asarray(s)
    out = np.ones_like(s, dtype=np.result_type(s, float))
    nz = np.abs(s) > 1e-300
    out[nz] = -np.expm1(-s[nz]) / s[nz]
    return out


def simplex2_exp(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Integral of exp(-(b s + c t)) over the unit triangle s, t >= 0, s + t <= 1.

    Requires nonnegative real parts.  This is the second divided difference of
    ``exp(-x)`` at ``(0, b, c)``; a Taylor series is used when both are small.
    Complex arguments are supported so that complex-step derivatives work.
    """
    b = np.asarray(b)
    c = np.asarray(c)
    swap = b.real > c.real
    lo = np.where(swap, c, b)
    hi = np.where(swap, b, c)
    out = np.empty_like(hi, dtype=np.result_type(hi, lo, float))
    small = hi.real < 0.5
    if np.any(small):
        x, y = lo[small], hi[small]
        # sum_k (-1)^k h_k(x, y)/(k+2)!, h_k complete homogeneous polynomial
        h = np.ones_like(x)
        ypow = np.ones_like(y)
        acc = h / 2.0
        fact = 2.0
        for k in range(1, 24):
            ypow = ypow * y
            h = h * x + ypow
            fact *= k + 2
            acc = acc + (-1) ** k * h / fact
        out[small] = acc
    big = ~small
    if np.any(big):
        x, y = lo[big], hi[big]
        out[big] = (psi1(x) - np.exp(-x) * psi1(y - x)) / y
    return out


_STEP = 1e-30


def simplex2_moments(f: np.ndarray) -> np.ndarray:
    """``int lambda_k exp(-<lambda, f>)`` over the unit triangle for rows ``f`` with min 0.

    Derivatives of :func:`simplex2_exp` are taken by complex step.
    """
    f = np.atleast_2d(f)
    out = np.empty_like(f, dtype=float)
    for k in range(3):
        g = f.astype(complex)
        g[:, k] += 1j * _STEP
        out[:, k] = -_simplex2_general(g).imag / _STEP
    return out


def _simplex2_general(f: np.ndarray) -> np.ndarray:
    """Triangle integral for arbitrary (possibly complex) vertex values."""
    lead = np.argmin(f.real, axis=1)
    rows = np.arange(len(f))
    f0 = f[rows, lead]
    others = np.stack([f[rows, (lead + 1) % 3], f[rows, (lead + 2) % 3]], axis=1) - f0[:, None]
    return np.exp(-f0) * simplex2_exp(others[:, 0], others[:, 1])


def simplex_exp_dd(values: np.ndarray) -> np.ndarray:
    """Integral of exp(-<lambda, f>) over the standard simplex, for a batch of value rows.

    This is the divided difference of exp at ``-f``.  Two and three vertex rows
    use closed forms; larger simplices use a confluent divided-difference table
    in extended precision.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    d = values.shape[1]
    if d == 1:
        return np.exp(-values[:, 0])
    if d == 2:
        lo = values.min(axis=1)
        return np.exp(-lo) * psi1(np.abs(values[:, 1] - values[:, 0]))
    if d == 3:
        return _simplex2_general(values).real
    return np.array([_dd_exp_mp(row) for row in values])


def _dd_exp_mp(row) -> float:
    with mpmath.workdps(90):
        xs = sorted(-mpmath.mpf(float(v)) for v in row)
        k = len(xs)
        table = [mpmath.exp(x) for x in xs]
        for level in range(1, k):
            new = []
            for i in range(k - level):
                gap = xs[i + level] - xs[i]
                if gap == 0:
                    new.append(mpmath.exp(xs[i]) / mpmath.factorial(level))
                else:
                    new.append((table[i + 1] - table[i]) / gap)
            table = new
        return float(table[0])


def simplex_exp_moments(values: np.ndarray) -> np.ndarray:
    """``int lambda_k exp(-<lambda, f>)`` over the standard simplex, shape (batch, d)."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    k, d = values.shape
    if d == 3:
        return simplex2_moments(values)
    out = np.empty((k, d))
    for j in range(d):
        out[:, j] = [_dd_exp_mp(np.append(row[j], row)) for row in values]
    return out


def segment_exp(length: np.ndarray, f0: np.ndarray, f1: np.ndarray) -> np.ndarray:
    """Integral of exp(-f) along a segment on which f is affine."""
    lo = np.minimum(f0, f1)
    return length * np.exp(-lo) * psi1(np.abs(f1 - f0))


# ---------------------------------------------------------------------------
# tail control


def inradius(points: np.ndarray) -> float:
    """Radius of the largest ball about 0 inside conv(points); <= 0 if 0 is not interior."""
    n = points.shape[1]
    if n == 1:
        return float(min(-points.min(), points.max()))
    try:
        hull = ConvexHull(points)
    except QhullError:
        return 0.0
    return float(-hull.equations[:, -1].max())


def tail_bound(n: int, rho: float, radius: float, cmax: float) -> float:
    """Bound on the integral of exp(-phi) outside the ball of the given radius,
    using phi(x) >= rho|x| - cmax."""
    surface = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    return math.exp(cmax) * surface * math.gamma(n) * float(special.gammaincc(n, rho * radius)) / rho**n


def choose_radius(n: int, rho: float, cmax: float, z_lower: float, rtol: float = TAIL_RTOL) -> float:
    """Smallest power-of-two multiple of 1/rho whose tail bound is below rtol * z_lower."""
    r = 4.0 / rho
    while tail_bound(n, rho, r, cmax) > rtol * z_lower:
        r *= 1.25
        if r * rho > 1e4:
            break
    return r


# ---------------------------------------------------------------------------
# cell integrals


@dataclass
class CellIntegrals:
    log_z: float
    masses: np.ndarray  # cell masses, normalized by Z (a probability vector)
    flux: np.ndarray | None  # (m, m) interface integrals / |p_i - p_j|, normalized by Z
    hull: LowerHull
    tail: float  # bound on neglected mass, relative to Z
    radius: float
    first_moment: np.ndarray | None = None  # int x e^-phi / Z

    @property
    def z(self) -> float:
        return math.exp(self.log_z)


def _clip(poly: list, labels: list, normal: np.ndarray, offset: float, label: int):
    """Clip polygon to {x : <normal, x> >= offset}; edges carry the label of the constraint."""
    if not poly:
        return poly, labels
    vals = [normal[0] * v[0] + normal[1] * v[1] - offset for v in poly]
    out, out_lab = [], []
    k = len(poly)
    for a in range(k):
        b = (a + 1) % k
        va, vb = vals[a], vals[b]
        ina, inb = va >= 0.0, vb >= 0.0
        if ina:
            out.append(poly[a])
            out_lab.append(labels[a])
            if not inb:
                t = va / (va - vb)
                pa, pb = poly[a], poly[b]
                out.append((pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])))
                out_lab.append(label)
        elif inb:
            t = va / (va - vb)
            pa, pb = poly[a], poly[b]
            out.append((pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])))
            out_lab.append(labels[a])
    if len(out) < 3:
        return [], []
    return out, out_lab


def cell_integrals(points: np.ndarray, c: np.ndarray, *, z_lower_unit: float,
                   want_flux: bool = False, want_moment: bool = False) -> CellIntegrals:
    """Exact cell masses of exp(-phi) for ``phi = max_i <p_i, x> - c_i``.

    ``z_lower_unit`` is a lower bound for the integral of exp(-psi) where psi is
    the support function of conv(points); it sets the truncation radius.
    """
    m, n = points.shape
    shift = None
    if n > 1:
        rho = inradius(points)
        if rho <= 0:
            raise TailDivergence("0 is not an interior point of the slope hull")
    hull = lower_hull(points, c)
    if n == 1:
        return _cell_integrals_1d(points[:, 0], c, hull, want_flux, want_moment)
    vis = np.flatnonzero(hull.visible)
    shift = float(c[vis].max())
    cs = c - shift
    cmax = 0.0
    zlow = math.exp(float(cs[vis].min())) * z_lower_unit
    radius = choose_radius(n, rho, cmax, zlow)
    if n != 2:
        return _cell_integrals_nd(points, c, cs, shift, hull, rho, radius, zlow, want_flux, want_moment)

    nbrs: list[set] = [set() for _ in range(m)]
    for s in hull.simplices:
        a, b, d = (int(x) for x in s)
        nbrs[a].update((b, d))
        nbrs[b].update((a, d))
        nbrs[d].update((a, b))

    R = radius
    box = [(-R, -R), (R, -R), (R, R), (-R, R)]
    tri_rows = []  # (node, x0, y0, x1, y1, x2, y2)
    seg_rows = []  # (node, nbr, x0, y0, x1, y1)
    for i in vis:
        poly, labels = list(box), [-1, -1, -1, -1]
        pi = points[i]
        for j in sorted(nbrs[i]):
            poly, labels = _clip(poly, labels, pi - points[j], cs[i] - cs[j], j)
            if not poly:
                break
        if not poly:
            continue
        v0 = poly[0]
        for k in range(1, len(poly) - 1):
            tri_rows.append((i, *v0, *poly[k], *poly[k + 1]))
        if want_flux:
            for k, lab in enumerate(labels):
                if lab >= 0 and lab > i:
                    a, b = poly[k], poly[(k + 1) % len(poly)]
                    seg_rows.append((i, lab, *a, *b))

    tri = np.array(tri_rows)
    node = tri[:, 0].astype(int)
    v = tri[:, 1:].reshape(-1, 3, 2)
    f = np.einsum("tkj,tj->tk", v, points[node]) - cs[node][:, None]
    cross = np.abs((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
                   - (v[:, 1, 1] - v[:, 0, 1]) * (v[:, 2, 0] - v[:, 0, 0]))
    fmin = f.min(axis=1)
    order = np.argsort(f, axis=1)
    fs = np.take_along_axis(f, order, axis=1)
    vals = cross * np.exp(-fmin) * simplex2_exp(fs[:, 1] - fs[:, 0], fs[:, 2] - fs[:, 0])
    masses = np.zeros(m)
    np.add.at(masses, node, vals)
    z = masses.sum()
    log_z = math.log(z) + shift
    moment = None
    if want_moment:
        lam = simplex_exp_moments(f - fmin[:, None])
        w = (cross * np.exp(-fmin))[:, None] * lam
        moment = np.einsum("tk,tkj->j", w, v) / z
    flux = None
    if want_flux:
        flux = np.zeros((m, m))
        if seg_rows:
            seg = np.array(seg_rows)
            a_i, a_j = seg[:, 0].astype(int), seg[:, 1].astype(int)
            x0, x1 = seg[:, 2:4], seg[:, 4:6]
            f0 = np.einsum("sj,sj->s", x0, points[a_i]) - cs[a_i]
            f1 = np.einsum("sj,sj->s", x1, points[a_i]) - cs[a_i]
            length = np.linalg.norm(x1 - x0, axis=1)
            val = segment_exp(length, f0, f1) / np.linalg.norm(points[a_i] - points[a_j], axis=1) / z
            np.add.at(flux, (a_i, a_j), val)
            np.add.at(flux, (a_j, a_i), val)
    tail = tail_bound(n, rho, R, cmax) / z
    return CellIntegrals(log_z, masses / z, flux, hull, tail, R, moment)


def _cell_integrals_1d(p: np.ndarray, c: np.ndarray, hull: LowerHull, want_flux: bool,
                       want_moment: bool) -> CellIntegrals:
    m = len(p)
    idx = hull.simplices[:, 0].tolist() + [int(hull.simplices[-1, 1])]
    ps, cv = p[idx], c[idx]
    if not (ps[0] < 0 < ps[-1]):
        raise TailDivergence("slopes must take both signs")
    shift = float(cv.max())
    cs = cv - shift
    brk = (cs[1:] - cs[:-1]) / (ps[1:] - ps[:-1])  # increasing breakpoints
    fb = ps[1:] * brk - cs[1:]  # phi at breakpoints
    vals = np.zeros(len(idx))
    vals[0] += np.exp(-fb[0]) / -ps[0]
    vals[-1] += np.exp(-fb[-1]) / ps[-1]
    if len(idx) > 2:
        mid = segment_exp(brk[1:] - brk[:-1], fb[:-1], fb[1:])
        vals[1:-1] += mid
    masses = np.zeros(m)
    masses[idx] = vals
    z = vals.sum()
    flux = None
    if want_flux:
        flux = np.zeros((m, m))
        fl = np.exp(-fb) / (ps[1:] - ps[:-1]) / z
        a, b = np.array(idx[:-1]), np.array(idx[1:])
        flux[a, b] = fl
        flux[b, a] = fl
    moment = None
    if want_moment:
        mom = -fb[0] * 0.0
        # int_{-inf}^{x} x e^{-(p x - c)} for p<0 and the mirror on the right
        x0, p0 = brk[0], ps[0]
        mom = np.exp(-fb[0]) * (x0 / -p0 - 1.0 / p0**2)
        x1, p1 = brk[-1], ps[-1]
        mom += np.exp(-fb[-1]) * (x1 / p1 + 1.0 / p1**2)
        for k in range(1, len(idx) - 1):
            a, b = brk[k - 1], brk[k]
            fa, fbb = fb[k - 1], fb[k]
            lam = simplex_exp_moments(np.array([[fa, fbb]]) - min(fa, fbb))[0]
            mom += (b - a) * np.exp(-min(fa, fbb)) * (lam[0] * a + lam[1] * b)
        moment = np.array([mom / z])
    return CellIntegrals(math.log(z) + shift, masses / z, flux, hull, 0.0, math.inf, moment)


def _cell_integrals_nd(points, c, cs, shift, hull, rho, radius, zlow, want_flux, want_moment):
    """Generic-dimension cells through qhull half-space intersection (cold path)."""
    from scipy.optimize import linprog
    from scipy.spatial import HalfspaceIntersection

    m, n = points.shape
    nbrs: list[set] = [set() for _ in range(m)]
    for s in hull.simplices:
        for a in s:
            nbrs[int(a)].update(int(b) for b in s if b != a)
    R = radius
    masses = np.zeros(m)
    moment = np.zeros(n)
    for i in np.flatnonzero(hull.visible):
        rows, rhs = [], []
        for j in sorted(nbrs[i]):
            # <p_j - p_i, x> <= c_j - c_i
            rows.append(points[j] - points[i])
            rhs.append(cs[j] - cs[i])
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            rows.extend([e, -e])
            rhs.extend([R, R])
        A, b = np.array(rows), np.array(rhs)
        norms = np.linalg.norm(A, axis=1)
        res = linprog(np.append(np.zeros(n), -1.0), A_ub=np.column_stack([A, norms]), b_ub=b,
                      bounds=[(None, None)] * n + [(0, None)], method="highs")
        if res.status != 0 or res.x[-1] <= 1e-12:
            continue
        hs = HalfspaceIntersection(np.column_stack([A, -b]), res.x[:n])
        verts = hs.intersections
        ch = ConvexHull(verts)
        centre = verts.mean(axis=0)
        simp = np.concatenate([np.repeat(centre[None, None, :], len(ch.simplices), axis=0),
                               verts[ch.simplices]], axis=1)
        vol = np.abs(np.linalg.det(simp[:, 1:, :] - simp[:, :1, :]))  # n! |S|
        f = simp @ points[i] - cs[i]
        fmin = f.min(axis=1)
        vals = vol * np.exp(-fmin) * simplex_exp_dd(f - fmin[:, None])
        masses[i] = vals.sum()
        if want_moment:
            lam = simplex_exp_moments(f - fmin[:, None])
            w = (vol * np.exp(-fmin))[:, None] * lam
            moment += np.einsum("tk,tkj->j", w, simp)
    z = masses.sum()
    tail = tail_bound(n, rho, R, 0.0) / z
    return CellIntegrals(math.log(z) + shift, masses / z, None, hull, tail, R,
                         moment / z if want_moment else None)
