from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from toricheight._cells import TailDivergence, cell_integrals, lower_hull
from toricheight.fixtures import fixtures
from toricheight.legendre import (
    MaxAffinePotential,
    SupportFunction,
    dual_grid,
    exact_support_integral,
    grid_nodes,
    integrate_dual,
    integrate_exp_neg,
    legendre,
    legendre_transform,
    santalo_check,
)
from toricheight.polytope import builtin_polytope

from oracles import sliced_integral

F = Fraction


def random_potential(rng, n, m=None):
    """Max-affine potential whose slope hull surrounds 0 (jittered even angles)."""
    m = m or int(rng.integers(n + 2, 10))
    if n == 1:
        s = np.r_[rng.uniform(-3, -0.2, 1), rng.uniform(0.2, 3, 1), rng.uniform(-3, 3, m - 2)][:, None]
    else:
        ang = 2 * np.pi * (np.arange(m) + rng.uniform(-0.4, 0.4, m)) / m
        s = np.c_[np.cos(ang), np.sin(ang)] * rng.uniform(0.3, 3, m)[:, None]
    return MaxAffinePotential(s, rng.uniform(-2, 2, len(s)))


# ---------------------------------------------------------------------------
# grids and transforms


def test_grid_weights_sum_to_volume_exactly():
    for name, args, k in [("Pn", (1,), 7), ("Pn", (2,), 5), ("Xpq", (2, 3), 6), ("hexagon", (), 3)]:
        P = builtin_polytope(name, *args)
        u = dual_grid(P, k)
        assert sum(u.weights) == P.volume
        assert all(P.contains(p) for p in u.exact_nodes)
        assert set(P.vertices) <= set(u.exact_nodes)


def test_grid_quadrature_exact_on_affine():
    P = builtin_polytope("Pn", 2)
    u = dual_grid(P, 4)
    vals = np.array([3 * p[0] - p[1] + 2 for p in u.exact_nodes], dtype=object)
    # barycenter 0: integral of an affine function is its value at 0 times Vol
    assert integrate_dual(u.with_values(vals)) == 2 * P.volume


def test_support_function_exact():
    P = builtin_polytope("Pn", 2)
    psi = SupportFunction(P)
    assert psi((F(1), F(1))) == 1
    assert psi((F(1, 2), F(-3))) == 4
    assert psi((1.0, -1.0)) == pytest.approx(3.0)


_sup_transform = legendre_transform


rationals = st.fractions(-5, 5, max_denominator=7)


@given(st.lists(rationals, min_size=6, max_size=6),
       st.lists(st.tuples(rationals, rationals), min_size=1, max_size=8))
def test_biconjugation_idempotent_exact(vals, xs):
    P = builtin_polytope("Pn", 2)
    nodes = grid_nodes(P, 1)  # the ten lattice points
    vals = (vals + vals)[: len(nodes)]
    xs = [tuple(x) for x in xs]
    u_star = _sup_transform(nodes, vals, xs)
    u_bi = _sup_transform(xs, u_star, nodes)
    u_tri = _sup_transform(nodes, u_bi, xs)
    assert u_tri == u_star
    assert all(isinstance(v, Fraction) for v in u_tri)
    assert all(b <= v for b, v in zip(u_bi, vals))


def test_biconjugate_is_convex_envelope():
    rng = np.random.default_rng(3)
    P = builtin_polytope("Pn", 1)
    nodes = grid_nodes(P, 4)
    vals = [F(int(v), 3) for v in rng.integers(-6, 6, len(nodes))]
    hull = lower_hull(np.array([[float(p[0])] for p in nodes]), np.array([float(v) for v in vals]))
    # every envelope slope is a chord slope, so these points realize the biconjugate
    xs = [((vals[j] - vals[i]) / (nodes[j][0] - nodes[i][0]),)
          for i in range(len(nodes)) for j in range(i + 1, len(nodes))]
    u_bi = _sup_transform(xs, _sup_transform(nodes, vals, xs), nodes)
    assert np.allclose([float(v) for v in u_bi], hull.envelope, atol=1e-12)
    assert any(b < v for b, v in zip(u_bi, vals))


def test_legendre_single_point():
    u = dual_grid(builtin_polytope("Pn", 1), 2)
    assert legendre(u, (F(1),)) == 1


# ---------------------------------------------------------------------------
# integrals of exp(-phi)


@pytest.mark.parametrize("fx", fixtures(), ids=lambda f: f.name)
def test_support_integral_equals_polar_volume(fx):
    P = fx.polytope
    res = integrate_exp_neg(MaxAffinePotential.support(P))
    exact = float(exact_support_integral(P))
    assert abs(res.value - exact) <= max(res.error_bound, 1e-12 * exact)
    assert res.value == pytest.approx(exact, rel=1e-10)


def test_support_integral_interval():
    res = integrate_exp_neg(MaxAffinePotential.support(builtin_polytope("Pn", 1)))
    assert res.method == "exact"
    assert res.value == pytest.approx(2.0, rel=1e-15)


@pytest.mark.parametrize("seed", range(20))
def test_one_dimensional_exact_against_mpmath(seed):
    phi = random_potential(np.random.default_rng(seed), 1)
    s, c = phi.slopes[:, 0], phi.intercepts
    kinks = sorted({float((c[i] - c[j]) / (s[i] - s[j]))
                    for i in range(len(s)) for j in range(i) if s[i] != s[j]})
    f = lambda x: mpmath.exp(-max(mpmath.mpf(si) * x - ci for si, ci in zip(s, c)))
    val = float(mpmath.quad(f, [-mpmath.inf, *kinks, mpmath.inf]))
    res = integrate_exp_neg(phi)
    assert abs(res.value - val) <= res.error_bound
    assert res.value == pytest.approx(val, rel=1e-14)


@pytest.mark.parametrize("seed", range(6))
def test_cells_agree_with_adaptive(seed):
    rng = np.random.default_rng(100 + seed)
    phi = random_potential(rng, 2, 6)
    exact = integrate_exp_neg(phi, method="cells")
    adapt = integrate_exp_neg(phi, tol=1e-4, method="adaptive")
    assert abs(exact.value - adapt.value) <= adapt.error_bound + exact.error_bound
    assert exact.value == pytest.approx(adapt.value, rel=1e-5)


@pytest.mark.parametrize("seed", range(4))
def test_cells_against_sliced_oracle(seed):
    phi = random_potential(np.random.default_rng(200 + seed), 2, 5)
    val = sliced_integral(phi.slopes, phi.intercepts)
    res = integrate_exp_neg(phi)
    assert abs(res.value - val) <= res.error_bound
    assert res.value == pytest.approx(val, rel=1e-12)


def test_first_moment_and_masses():
    rng = np.random.default_rng(7)
    phi = random_potential(rng, 2, 7)
    res = cell_integrals(phi.slopes, phi.intercepts, z_lower_unit=1e-3, want_moment=True)
    assert res.masses.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(res.masses >= 0)
    shifted = phi.translate(res.first_moment)
    again = cell_integrals(shifted.slopes, shifted.intercepts, z_lower_unit=1e-3, want_moment=True)
    assert np.allclose(again.first_moment, 0, atol=1e-10)


@pytest.mark.parametrize("slopes", [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
                                    [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]], [[1.0], [2.0]]])
def test_divergent_tail_rejected(slopes):
    phi = MaxAffinePotential(np.array(slopes), np.zeros(len(slopes)))
    with pytest.raises(TailDivergence):
        integrate_exp_neg(phi)
    with pytest.raises(TailDivergence):
        integrate_exp_neg(phi, method="adaptive")


# ---------------------------------------------------------------------------
# functional Santaló


def test_santalo_on_1000_seeded_instances():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(1000):
        n = 1 if i % 2 == 0 else 2
        res = santalo_check(random_potential(rng, n))
        assert res.holds, (i, res.product, res.bound)
        worst = max(worst, res.product / res.bound)
    assert worst < 1.0


@pytest.mark.parametrize("n,L,m,floor", [(1, 9.0, 301, 0.999), (2, 7.0, 41, 0.98)])
def test_santalo_gaussian_near_equality(n, L, m, floor):
    # tangent planes of |x|^2/2 at a grid of slopes: the product tends to (2 pi)^n from below
    t = np.linspace(-L, L, m)
    s = np.stack(np.meshgrid(*([t] * n), indexing="ij"), axis=-1).reshape(-1, n)
    phi = MaxAffinePotential(s, 0.5 * (s**2).sum(axis=1))
    res = santalo_check(phi)
    assert res.holds
    assert res.product / res.bound > floor
