"""Kähler-Einstein χ-volumes and heights by maximizing the toric Ding objective.

The decision variables are intercepts ``c_i`` at the nodes ``p_i`` of a dual
grid of P.  With ``phi_c(x) = max_i <p_i, x> - c_i`` the objective is

    F(c) = -sum_i w_i c~_i / Vol(P) + log int exp(-phi_c) dx + n log(pi)

where ``c~`` is the lower convex envelope of ``c`` over the nodes.  Without
the envelope the same expression ``G(c)`` is concave (Prékopa), is maximized
at the same value, and has gradient ``mu(Cell_i) - w_i / Vol(P)``.  Both are
invariant under ``c -> c + t + <b, p>``: constants cancel because the weights
sum to Vol(P), and linear terms translate ``x`` while the weighted barycenter
of the nodes is 0.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _cells
from .checks import CheckResult, le_check
from .fano import FanoReport, analyze, ke_height_bounds, pn_height, universal_upper_bound
from .legendre import DualGridFunction, dual_grid, exact_support_integral
from .polytope import PolytopeError, RationalPolytope, det, linear_image, rvec

LOG_PI = math.log(math.pi)
TARGET_NODES_2D = 300


class NotSemistable(PolytopeError):
    """The barycenter of P is not 0, so the Ding objective is unbounded above."""


class NoConvergence(RuntimeError):
    pass


class UnsupportedDimension(PolytopeError):
    pass


def default_grid(P: RationalPolytope) -> int:
    """Grid resolution k (step 1/k): 100 on intervals, about 300 nodes on polygons."""
    if P.dim == 1:
        return 100
    return max(4, round(math.sqrt(TARGET_NODES_2D / float(P.volume))))


@dataclass
class DingConfig:
    grid: int | None = None
    tol: float = 1e-9  # sup-norm of the KE residual
    value_tol: float = 1e-12
    max_iter: int = 200
    method: str = "newton"  # or "supergradient"
    step0: float = 1.0
    polyak_target: float | None = None
    init: str = "auto"  # "zero" (psi_P), "guillemin", "quadratic", "random"; auto picks per method
    seed: int = 0
    integration_rtol: float = 1e-12


@dataclass
class Evaluation:
    value: float  # G(c); equals F(c) when c is its own envelope
    envelope_value: float  # F(c)
    grad: np.ndarray
    hess: np.ndarray | None
    envelope: np.ndarray
    log_z: float
    tail: float


@dataclass
class DingResult:
    F_star: float
    chi_volume: float
    height: float
    ke_residual: float
    iterations: int
    certified: bool
    grid: int
    n_nodes: int
    vol: Fraction
    dim: int
    optimality_gap: float
    integration_error: float
    trace: list = field(default_factory=list)
    dual: DualGridFunction | None = field(default=None, repr=False)
    converged: bool = True
    method: str = "newton"
    seconds: float = 0.0

    @property
    def chi_norm(self) -> float:
        return self.chi_volume / float(self.vol)


def _from_f(F: float, vol: Fraction, n: int) -> tuple[float, float]:
    chi = float(vol) * F / 2
    return chi, math.factorial(n + 1) * chi


class DingProblem:
    """The discretized Ding objective on a fixed dual grid of P."""

    def __init__(self, P: RationalPolytope, grid: int | None = None, *, check_semistable: bool = True):
        if P.dim > 2:
            raise UnsupportedDimension("the Ding optimizer supports dimensions 1 and 2")
        if check_semistable and any(x != 0 for x in P.barycenter):
            raise NotSemistable("barycenter of P is not the origin")
        self.P = P
        self.n = P.dim
        self.grid = grid or default_grid(P)
        self.dual = dual_grid(P, self.grid)
        self.nodes = self.dual.nodes
        self.vol = P.volume
        self.wn = self.dual.weight_array / float(P.volume)
        self.z_unit = float(exact_support_integral(P))
        m = len(self.nodes)
        basis = np.column_stack([np.ones(m), self.nodes])
        self._kernel, _ = np.linalg.qr(basis)
        wp = self.nodes * self.dual.weight_array[:, None]
        self._lin_gram = np.linalg.inv(self.nodes.T @ wp)
        self._wp = wp

    def __len__(self) -> int:
        return len(self.nodes)

    # -- gauge

    def normalize(self, c: np.ndarray) -> np.ndarray:
        """Remove the constant and linear gauge: sum w c = 0 and sum w c p = 0."""
        c = c - self.wn @ c
        b = self._lin_gram @ (self._wp.T @ c)
        return c - self.nodes @ b

    # -- evaluation

    def evaluate(self, c: np.ndarray, order: int = 1) -> Evaluation:
        c = np.asarray(c, dtype=float)
        cells = _cells.cell_integrals(self.nodes, c, z_lower_unit=self.z_unit, want_flux=order >= 2)
        mu = cells.masses
        base = cells.log_z + self.n * LOG_PI
        g = mu - self.wn
        hess = None
        if order >= 2:
            flux = cells.flux
            hess = flux - np.diag(flux.sum(axis=1)) + np.diag(mu) - np.outer(mu, mu)
        return Evaluation(
            value=base - self.wn @ c,
            envelope_value=base - self.wn @ cells.hull.envelope,
            grad=g,
            hess=hess,
            envelope=cells.hull.envelope,
            log_z=cells.log_z,
            tail=cells.tail,
        )

    def objective(self, c) -> float:
        return self.evaluate(c, order=0).envelope_value

    # -- starting points

    def initial(self, kind: str, seed: int = 0) -> np.ndarray:
        p = self.nodes
        if kind == "zero":
            c = np.zeros(len(p))
        elif kind == "quadratic":
            c = 0.5 * (p**2).sum(axis=1)
        elif kind == "guillemin":
            c = np.zeros(len(p))
            for f in self.P.facets:
                ell = p @ np.array(f.normal, dtype=float) + float(f.offset)
                ell = np.clip(ell, 0.0, None)
                with np.errstate(divide="ignore", invalid="ignore"):
                    c += np.where(ell > 0, ell * np.log(ell), 0.0)
        elif kind == "random":
            rng = np.random.default_rng(seed)
            c = 0.5 * (p**2).sum(axis=1) + 0.05 * rng.standard_normal(len(p))
        else:
            raise ValueError(f"unknown initialization {kind!r}")
        return self.normalize(c)

    # -- solvers

    def newton(self, c0: np.ndarray, cfg: DingConfig):
        c = self.normalize(self.evaluate(c0, 0).envelope)
        ev = self.evaluate(c, 2)
        lam = 1.0
        trace = [ev.envelope_value]
        it = 0
        kernel = self._kernel
        while it < cfg.max_iter:
            res = float(np.abs(ev.grad).max())
            if res < cfg.tol:
                break
            neg_h = -ev.hess
            diag = np.diag(neg_h).copy()
            floor = float(diag[diag > 0].mean()) if np.any(diag > 0) else 1.0
            d_reg = np.maximum(diag, floor)
            accepted = False
            while not accepted:
                mat = neg_h + lam * np.diag(d_reg) + floor * (kernel @ kernel.T)
                step = np.linalg.solve(mat, ev.grad)
                trial = self.normalize(c + step)
                ev_t = self.evaluate(trial, 0)
                if ev_t.value >= ev.value - 1e-15 * max(1.0, abs(ev.value)):
                    accepted = True
                else:
                    lam *= 8.0
                    if lam > 1e12:
                        break
            if not accepted:
                break
            c = self.normalize(ev_t.envelope)
            ev_new = self.evaluate(c, 2)
            gain = ev_new.envelope_value - ev.envelope_value
            ev = ev_new
            trace.append(ev.envelope_value)
            lam = max(lam / 4.0, 1e-10)
            it += 1
            if abs(gain) < cfg.value_tol * max(1.0, abs(ev.value)) and res < 1e3 * cfg.tol:
                break
        gap = self._newton_decrement(ev)
        return c, ev, it, trace, gap

    def _newton_decrement(self, ev: Evaluation) -> float:
        if ev.hess is None:
            return float("nan")
        neg_h = -ev.hess + (self._kernel @ self._kernel.T) * max(float(np.diag(-ev.hess).mean()), 1e-300)
        try:
            return 0.5 * float(ev.grad @ np.linalg.solve(neg_h, ev.grad))
        except np.linalg.LinAlgError:
            return float("inf")

    def supergradient(self, c0: np.ndarray, cfg: DingConfig):
        c = self.normalize(c0)
        best_c, best = c, -math.inf
        trace = []
        ev = self.evaluate(c, 1)
        it = 0
        for it in range(1, cfg.max_iter + 1):
            val = ev.envelope_value
            if val > best:
                best, best_c = val, ev.envelope.copy()
            trace.append(best)
            g = ev.grad
            gn = float(np.linalg.norm(g))
            if float(np.abs(g).max()) < cfg.tol or gn == 0:
                break
            if cfg.polyak_target is not None:
                step = max(cfg.polyak_target - ev.value, 0.0) / gn**2
                c = c + step * g
            else:
                c = c + cfg.step0 / math.sqrt(it) * g / gn
            c = self.normalize(c)
            ev = self.evaluate(c, 1)
        final = self.evaluate(self.normalize(best_c), 2)
        return self.normalize(best_c), final, it, trace, self._newton_decrement(final)


def maximize(P: RationalPolytope, cfg: DingConfig | None = None, *, c0: np.ndarray | None = None) -> DingResult:
    """Maximize the discretized Ding objective; the result carries the KE χ-volume and height."""
    cfg = cfg or DingConfig()
    t0 = time.perf_counter()
    prob = DingProblem(P, cfg.grid)
    init = cfg.init
    if init == "auto":
        # the flat start psi_P gives interior nodes empty cells, where Newton has no curvature
        init = "guillemin" if cfg.method == "newton" else "zero"
    start = prob.initial(init, cfg.seed) if c0 is None else np.asarray(c0, dtype=float)
    if cfg.method == "newton":
        c, ev, it, trace, gap = prob.newton(start, cfg)
        if float(np.abs(ev.grad).max()) >= cfg.tol and c0 is None and init != "quadratic":
            c2, ev2, it2, trace2, gap2 = prob.newton(prob.initial("quadratic"), cfg)
            if np.abs(ev2.grad).max() < np.abs(ev.grad).max():
                c, ev, it, trace, gap = c2, ev2, it + it2, trace + trace2, gap2
    elif cfg.method == "supergradient":
        c, ev, it, trace, gap = prob.supergradient(start, cfg)
    else:
        raise ValueError(f"unknown method {cfg.method!r}")
    F = ev.envelope_value
    chi, height = _from_f(F, prob.vol, prob.n)
    residual = float(np.abs(ev.grad).max())
    integ = ev.tail + 1e-13
    converged = residual < cfg.tol
    return DingResult(
        F_star=F,
        chi_volume=chi,
        height=height,
        ke_residual=residual,
        iterations=it,
        certified=bool(converged and integ < cfg.tol and (prob.n == 1 or ev.tail < cfg.integration_rtol)),
        grid=prob.grid,
        n_nodes=len(prob),
        vol=prob.vol,
        dim=prob.n,
        optimality_gap=gap,
        integration_error=integ,
        trace=trace,
        dual=prob.dual.with_values(ev.envelope),
        converged=converged,
        method=cfg.method,
        seconds=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class Extrapolation:
    coarse: DingResult
    fine: DingResult
    F_limit: float
    chi_limit: float
    height_limit: float
    height_error: float  # |limit - fine|, error bar of the extrapolated limit
    fine_error: float  # |fine - coarse|, error bar of the fine height whenever the order is >= 1


def extrapolate(P: RationalPolytope, cfg: DingConfig | None = None, order: float = 2.0, *,
                coarse: int | None = None, fine: int | None = None) -> Extrapolation:
    """Richardson extrapolation from two grids assuming an O(h^order) error.

    By default the grids are k and 2k with k from ``cfg``.  Measured orders on
    the fixtures are about 1.75 to 1.9, so the limit is a slight underestimate
    and ``fine_error`` is the conservative bar for the fine value.
    """
    cfg = cfg or DingConfig()
    kc = coarse or cfg.grid or default_grid(P)
    kf = fine or 2 * kc
    lo = maximize(P, _replace(cfg, grid=kc))
    hi = maximize(P, _replace(cfg, grid=kf))
    r = (kf / kc) ** order
    F_lim = hi.F_star + (hi.F_star - lo.F_star) / (r - 1)
    chi, h = _from_f(F_lim, hi.vol, hi.dim)
    return Extrapolation(lo, hi, F_lim, chi, h, abs(h - hi.height), abs(hi.height - lo.height))


def _replace(cfg: DingConfig, **kw) -> DingConfig:
    from dataclasses import replace

    return replace(cfg, **kw)


def ding_objective(c, P: RationalPolytope, cfg: DingConfig | None = None) -> float:
    prob = DingProblem(P, (cfg or DingConfig()).grid)
    return prob.objective(np.asarray(c, dtype=float))


def ding_subgradient(c, P: RationalPolytope, cfg: DingConfig | None = None) -> np.ndarray:
    prob = DingProblem(P, (cfg or DingConfig()).grid)
    return prob.evaluate(np.asarray(c, dtype=float), 1).grad


def diagnose_unbounded(P: RationalPolytope, iterations: int = 10, grid: int | None = None) -> list[float]:
    """Supergradient ascent on a non-semistable polytope; returns the objective trend.

    The supremum is +inf when the barycenter is not 0, so the values keep growing.
    """
    prob = DingProblem(P, grid, check_semistable=False)
    c = np.zeros(len(prob))
    c = c - prob.wn @ c
    values = []
    for k in range(1, iterations + 1):
        ev = prob.evaluate(c, 1)
        values.append(ev.envelope_value)
        g = ev.grad
        c = c + g / max(float(np.linalg.norm(g)), 1e-300) / math.sqrt(k) * 4.0
        c = c - prob.wn @ c
    return values


def verify_bounds(result: DingResult, report: FanoReport) -> list[CheckResult]:
    """Compare a computed KE height with the closed-form bounds for the same polytope."""
    n = result.dim
    b = report.bounds
    lo, hi = ke_height_bounds(report.vol, n, b.mahler_kind)
    return [
        le_check("chi<=universal_upper", result.chi_volume, universal_upper_bound(report.vol, n), n=n),
        le_check("ke_lower<=height", lo, result.height, n=n),
        le_check("height<=ke_upper", result.height, hi, n=n),
        le_check("height<=pn_height", result.height, pn_height(n), n=n),
    ]


@dataclass(frozen=True)
class LinearEquivalence:
    measured_delta: float
    predicted_delta: float
    base: DingResult
    image: DingResult


def linear_equivalence_experiment(P: RationalPolytope, A, cfg: DingConfig | None = None,
                                  image_cfg: DingConfig | None = None) -> LinearEquivalence:
    """Optimize on P and on A P independently and compare normalized χ-volumes."""
    cfg = cfg or DingConfig()
    rows = [rvec(r) for r in A]
    d = det(rows)
    Q = linear_image(P, rows)
    base = maximize(P, cfg)
    image = maximize(Q, image_cfg or _replace(cfg, grid=None))
    return LinearEquivalence(image.chi_norm - base.chi_norm, -0.5 * math.log(abs(float(d))), base, image)


def analyze_and_maximize(P: RationalPolytope, cfg: DingConfig | None = None):
    report = analyze(P)
    if not report.k_semistable:
        raise NotSemistable("barycenter of P is not the origin")
    result = maximize(P, cfg)
    return report, result, verify_bounds(result, report)
