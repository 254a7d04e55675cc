from fractions import Fraction
import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from toricheight.polytope import (
    BUILTIN_NAMES,
    BadParams,
    DegenerateInput,
    DimensionMismatch,
    Empty,
    HalfSpace,
    NotFanoNormalized,
    OriginNotInterior,
    Unbounded,
    boundary_measure,
    boundary_moment,
    builtin_polytope,
    classify_lattice,
    facet_measure,
    from_facets,
    from_vertices,
    linear_image,
    mahler_volume,
    polar_dual,
    product,
    translate,
)
from toricheight.fixtures import fixtures

from oracles import ccw_hull, edge_sigma, polygon_barycenter, qhull_volume, shoelace

F = Fraction

lattice_points = st.lists(
    st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=3, max_size=9, unique=True
)


def _full_dim(points):
    pts = np.array(points, dtype=float)
    return np.linalg.matrix_rank(pts[1:] - pts[0]) == 2


@given(lattice_points)
def test_polygon_volume_and_barycenter_match_shoelace(points):
    if not _full_dim(points):
        with pytest.raises(DegenerateInput):
            from_vertices(points)
        return
    P = from_vertices(points)
    hull = ccw_hull(points)
    area, _, _ = shoelace(hull)
    assert P.volume == area
    assert P.barycenter == polygon_barycenter(hull)
    assert set(P.vertices) == set(hull)


@given(lattice_points, st.sampled_from([((1, 1), (0, 1)), ((2, 1), (1, 1)), ((1, 0), (3, 1)), ((0, 1), (1, 0))]))
def test_unimodular_maps_preserve_volume(points, A):
    if not _full_dim(points):
        return
    P = from_vertices(points)
    Q = linear_image(P, A)
    assert Q.volume == P.volume
    assert Q.barycenter == tuple(sum(A[i][j] * P.barycenter[j] for j in range(2)) for i in range(2))


@given(lattice_points, st.tuples(st.fractions(-3, 3, max_denominator=5), st.fractions(-3, 3, max_denominator=5)))
def test_translation_shifts_barycenter(points, t):
    if not _full_dim(points):
        return
    P = from_vertices(points)
    Q = translate(P, t)
    assert Q.volume == P.volume
    assert Q.barycenter == tuple(b + s for b, s in zip(P.barycenter, t))


@pytest.mark.parametrize("name,args,vol", [
    ("Pn", (1,), F(2)), ("Pn", (2,), F(9, 2)), ("cube", (2,), F(4)), ("hexagon", (), F(3)),
    ("Bl1P2", (), F(4)), ("Bl2P2", (), F(7, 2)), ("Xpq", (2, 3), F(1, 3)), ("Pn", (3,), F(32, 3)),
    ("PnxP1", (3,), F(9)), ("cube", (3,), F(8)), ("Bl1P3", (), F(28, 3)),
])
def test_builtin_volumes(name, args, vol):
    P = builtin_polytope(name, *args)
    assert P.volume == vol
    if P.dim > 1:
        assert P.volume == pytest.approx(qhull_volume(P.vertex_array), rel=1e-12)


def test_pn_volume_formula():
    # (n+1)^n / n!
    from math import factorial
    for n in range(1, 5):
        assert builtin_polytope("Pn", n).volume == F((n + 1) ** n, factorial(n))


def test_three_dimensional_barycenters_against_monte_carlo_free_oracle():
    # barycenter of a simplex-decomposition computed independently with qhull's Delaunay
    from scipy.spatial import Delaunay
    for name, args in [("Bl1P3", ()), ("Pn", (3,)), ("PnxP1", (3,))]:
        P = builtin_polytope(name, *args)
        pts = P.vertex_array
        tri = Delaunay(pts)
        vol = 0.0
        mom = np.zeros(3)
        for s in tri.simplices:
            v = abs(np.linalg.det(pts[s[1:]] - pts[s[0]])) / 6
            vol += v
            mom += v * pts[s].mean(axis=0)
        assert float(P.volume) == pytest.approx(vol, rel=1e-12)
        assert np.allclose([float(x) for x in P.barycenter], mom / vol, atol=1e-12)
    assert builtin_polytope("Bl1P3").barycenter == (F(1, 14),) * 3


def test_blowup_barycenters():
    assert builtin_polytope("Bl1P2").barycenter == (F(1, 12), F(1, 12))
    assert builtin_polytope("Bl2P2").barycenter == (F(-2, 21), F(-2, 21))


def test_facets_agree_with_qhull():
    for fx in fixtures():
        P = fx.polytope
        if P.dim < 2:
            continue
        from scipy.spatial import ConvexHull
        hull = ConvexHull(P.vertex_array)
        # qhull stores a.x + b <= 0 with unit a; ours is l.p + offset >= 0
        ours = {tuple(np.round(np.r_[-np.array(f.normal), -float(f.offset)] / np.linalg.norm(f.normal), 9))
                for f in P.facets}
        theirs = {tuple(np.round(eq, 9)) for eq in hull.equations}
        assert ours == theirs


def test_from_facets_round_trip():
    for fx in fixtures():
        P = fx.polytope
        assert from_facets(P.facets) == P
        assert from_vertices(P.vertices) == P


def test_polar_involution_and_mahler():
    for fx in fixtures():
        P = fx.polytope
        assert polar_dual(polar_dual(P)) == P
        assert mahler_volume(P) == P.volume * polar_dual(P).volume
    assert mahler_volume(builtin_polytope("Pn", 2)) == F(27, 4)
    assert mahler_volume(builtin_polytope("hexagon")) == 9
    assert mahler_volume(builtin_polytope("Xpq", 2, 3)) == 8


def test_boundary_measure_is_n_times_volume_for_reflexive():
    for fx in fixtures():
        P = fx.polytope
        if fx.expected["is_reflexive"]:
            assert boundary_measure(P) == P.dim * P.volume
        if P.dim == 2 and fx.expected["is_reflexive"]:
            assert boundary_measure(P) == edge_sigma(ccw_hull(P.vertices))


def test_boundary_moment_cone_identity():
    # for offsets 1, the cone over each facet gives int_dP p dsigma = (n+1) int_P p dx
    for fx in fixtures():
        P = fx.polytope
        if P.is_fano_normalized():
            assert boundary_moment(P) == tuple((P.dim + 1) * P.volume * b for b in P.barycenter)


def test_facet_measure_sums():
    P = builtin_polytope("Pn", 2)
    assert [facet_measure(P, i) for i in range(3)] == [3, 3, 3]


def test_product():
    P = product(builtin_polytope("Pn", 1), builtin_polytope("Pn", 2))
    assert P.volume == 9 and len(P.vertices) == 6 and len(P.facets) == 5
    assert product(builtin_polytope("Pn", 1), builtin_polytope("Pn", 1)) == builtin_polytope("cube", 2)


def test_lattice_classification():
    X = classify_lattice(builtin_polytope("Xpq", 2, 3))
    assert not X.is_lattice and X.is_simplicial and set(X.vertex_deltas) == {12}
    assert classify_lattice(builtin_polytope("hexagon")).is_smooth
    diamond = classify_lattice(builtin_polytope("Xpq", 1, 1))
    assert diamond.is_lattice and not diamond.is_smooth and set(diamond.vertex_deltas) == {2}
    with pytest.raises(NotFanoNormalized):
        classify_lattice(from_vertices([(-1, -1), (3, -1), (-1, 3)]))


def test_input_errors():
    with pytest.raises(DegenerateInput):
        from_vertices([(0, 0), (1, 1), (2, 2)])
    with pytest.raises(DimensionMismatch):
        from_vertices([(0, 0), (1, 0, 0), (0, 1)])
    with pytest.raises(Unbounded):
        from_facets([HalfSpace((1, 0), 1), HalfSpace((0, 1), 1)])
    with pytest.raises(Empty):
        from_facets([HalfSpace((1, 0), -2), HalfSpace((-1, 0), 1), HalfSpace((0, 1), 1), HalfSpace((0, -1), 1)])
    with pytest.raises(OriginNotInterior):
        polar_dual(from_vertices([(0, 0), (1, 0), (0, 1)]))
    with pytest.raises(BadParams):
        builtin_polytope("Xpq", 2, 4)
    with pytest.raises(BadParams):
        builtin_polytope("nope")


def test_builtin_names_all_construct():
    defaults = {"Pn": (2,), "PnxP1": (2,), "Xpq": (1, 2), "cube": (2,)}
    for name in BUILTIN_NAMES:
        assert builtin_polytope(name, *defaults.get(name, ())).volume > 0


def test_cube_vertices_exact():
    P = builtin_polytope("cube", 3)
    assert set(P.vertices) == {tuple(F(x) for x in v) for v in itertools.product((-1, 1), repeat=3)}
