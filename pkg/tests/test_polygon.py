import pytest
from hypothesis import given, settings, strategies as st

from rigidcert.exactpoly import SparsePoly, ZeroPolynomial
from rigidcert.polygon import (EXPECTED_NORMALS, LatticePolygon, convex_hull, edge_normals,
                               face_restrict, minkowski_hull, minkowski_support, relevant,
                               sumset, support_of)

r13, r23 = SparsePoly.var("r13"), SparsePoly.var("r23")
points = st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=1, max_size=25)


def test_support_examples():
    assert support_of(3 * r13 + r23 ** 3) == {(1, 0), (0, 3)}
    assert support_of(SparsePoly.const(7)) == {(0, 0)}
    assert support_of(r13 * r23) == {(1, 1)}
    assert support_of(SparsePoly.var("h") * r13 + r13) == {(1, 0)}
    with pytest.raises(ZeroPolynomial):
        support_of(SparsePoly())


def test_hull_examples():
    assert convex_hull({(0, 0), (2, 0), (0, 2), (1, 1)}).vertices == ((0, 0), (2, 0), (0, 2))
    assert convex_hull({(3, 4)}).vertices == ((3, 4),)
    seg = convex_hull({(1, 0), (0, 3)})
    assert seg.is_degenerate and len(seg) == 2


def test_minkowski_and_normals_of_unit_square():
    pts, hull = minkowski_support([{(0, 0), (1, 0)}, {(0, 0), (0, 1)}])
    assert pts == {(0, 0), (1, 0), (0, 1), (1, 1)}
    assert hull.vertices == ((0, 0), (1, 0), (1, 1), (0, 1))
    assert {e.normal for e in edge_normals(hull)} == {(1, 0), (0, 1), (-1, 0), (0, -1)}
    assert [e.normal for e in edge_normals(hull)] == [(0, 1), (-1, 0), (0, -1), (1, 0)]


def test_relevance_filter_modes():
    hull = convex_hull({(0, 0), (1, 0), (0, 1), (1, 1)})
    ns = edge_normals(hull)
    assert len(relevant(ns, "all")) == 4
    assert {e.normal for e in relevant(ns, "seven")} == {(1, 0), (0, 1)}
    with pytest.raises(ValueError):
        relevant(ns, "some")


def test_face_restrict_examples():
    p = 3 * r13 + r23 ** 3
    f = face_restrict(p, (3, 1))
    assert f.poly == p and f.weight == 3 and not f.vertex_face
    assert face_restrict(r13 ** 2 + r13 * r23, (1, 1)).poly == r13 ** 2 + r13 * r23
    assert face_restrict(r13 ** 2 + r23, (0, 1)).poly == r13 ** 2
    g = face_restrict(r13 ** 2 + r23, (1, 0))
    assert g.poly == r23 and g.vertex_face


@settings(max_examples=100, deadline=None)
@given(points)
def test_hull_against_brute_force(pts):
    hull = convex_hull(pts)
    for p in pts:
        assert hull.contains(p)
    v = hull.vertices
    if len(v) >= 3:
        # every vertex is extreme: it is not in the hull of the others
        for i, p in enumerate(v):
            others = convex_hull([q for j, q in enumerate(v) if j != i])
            assert not others.contains(p)
        # no point lies strictly outside any edge
        for a, b in hull.edges():
            for p in pts:
                assert (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0


@settings(max_examples=50, deadline=None)
@given(points)
def test_hull_rotation_equivariance(pts):
    rot = [(-y, x) for x, y in pts]
    assert set(convex_hull(rot).vertices) == {(-y, x) for x, y in convex_hull(pts).vertices}


@settings(max_examples=30, deadline=None)
@given(st.lists(points.map(lambda p: [(abs(x), abs(y)) for x, y in p]), min_size=2, max_size=4))
def test_bitset_sumset_matches_direct(sets):
    from rigidcert.polygon import _bitset_sumset
    direct = {(0, 0)}
    for s in sets:
        direct = sumset(direct, s)
    assert _bitset_sumset(sets) == direct


@settings(max_examples=30, deadline=None)
@given(st.lists(points, min_size=2, max_size=3))
def test_minkowski_hull_from_vertices(sets):
    full = {(0, 0)}
    for s in sets:
        full = sumset(full, s)
    assert minkowski_hull([convex_hull(s) for s in sets]) == convex_hull(full)


def test_edge_normals_point_inward():
    hull = convex_hull([(0, 0), (4, 0), (5, 3), (1, 4)])
    cx = sum(x for x, _ in hull.vertices) / len(hull)
    cy = sum(y for _, y in hull.vertices) / len(hull)
    for e in edge_normals(hull):
        (ax, ay), n = e.edge[0], e.normal
        assert n[0] * (cx - ax) + n[1] * (cy - ay) > 0


def test_listed_normals_are_the_filtered_ones():
    assert len(EXPECTED_NORMALS) == 7 and all(a + b >= 0 for a, b in EXPECTED_NORMALS)


def test_polygons_of_the_minors(minors):
    hulls = [convex_hull(support_of(m)) for m in minors]
    assert [len(h) for h in hulls] == [10, 8, 8, 8, 8]
    pts, hull = minkowski_support([h.vertices for h in hulls])
    assert len(pts) == 16854 and len(hull) == 14
    normals = [e.normal for e in edge_normals(hull)]
    assert set(e.normal for e in relevant(edge_normals(hull))) == set(EXPECTED_NORMALS)
    assert len(normals) == 14
    # vertex coefficients of every polygon are nonzero integers
    for m, h in zip(minors, hulls):
        parts = m.project(("r13", "r23"))
        for v in h.vertices:
            c = parts[v]
            assert c.is_constant() and c.constant_value().denominator == 1
