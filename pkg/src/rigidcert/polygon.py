"""Newton polygons in the (r13, r23) exponent plane.

Everything here is exact integer geometry.  A support point is present when
its coefficient, a polynomial in the remaining variables, is nonzero.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

from .exactpoly import SparsePoly, ZeroPolynomial

__all__ = [
    "DegeneratePolygon", "LatticePolygon", "EdgeNormal", "support_of",
    "convex_hull", "minkowski_support", "minkowski_hull", "sumset",
    "edge_normals", "relevant", "face_restrict", "FaceRestriction",
    "EXPECTED_NORMALS",
]

Point = tuple[int, int]

# the lower-left normals that remain after the a + b >= 0 filter
EXPECTED_NORMALS = ((2, -1), (1, 0), (3, 1), (1, 1), (1, 3), (0, 1), (-1, 2))


class DegeneratePolygon(ValueError):
    pass


def support_of(p: SparsePoly, xy: tuple[str, str] = ("r13", "r23")) -> frozenset[Point]:
    if p.is_zero():
        raise ZeroPolynomial("the zero polynomial has empty support")
    return frozenset(p.project(xy))


def _cross(o: Point, a: Point, b: Point) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class LatticePolygon:
    """Vertices counterclockwise from the lexicographically smallest one."""
    vertices: tuple[Point, ...]

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def is_degenerate(self) -> bool:
        return len(self.vertices) < 3

    def edges(self) -> list[tuple[Point, Point]]:
        v = self.vertices
        if len(v) < 3:
            raise DegeneratePolygon("point or segment has no oriented edges")
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def contains(self, p: Point) -> bool:
        """Closed containment by orientation tests."""
        v = self.vertices
        if len(v) == 1:
            return p == v[0]
        if len(v) == 2:
            a, b = v
            return (_cross(a, b, p) == 0 and min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
                    and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))
        return all(_cross(a, b, p) >= 0 for a, b in self.edges())


def convex_hull(points: Iterable[Point]) -> LatticePolygon:
    """Andrew's monotone chain; collinear boundary points are dropped."""
    pts = sorted(set(points))
    if not pts:
        raise ValueError("hull of an empty point set")
    if len(pts) <= 2:
        return LatticePolygon(tuple(pts))
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        hull = hull[:1]
    return LatticePolygon(tuple(hull))


def sumset(a: Iterable[Point], b: Iterable[Point]) -> set[Point]:
    b = list(b)
    return {(p[0] + q[0], p[1] + q[1]) for p in a for q in b}


def _bitset_sumset(supports: Sequence[Iterable[Point]]) -> set[Point]:
    """Sumset of large supports using one integer bitmask per column."""
    def to_cols(pts):
        cols: dict[int, int] = {}
        for x, y in pts:
            cols[x] = cols.get(x, 0) | (1 << y)
        return cols

    acc = to_cols(supports[0])
    for sup in supports[1:]:
        nxt: dict[int, int] = {}
        cols = to_cols(sup)
        for xb, mb in cols.items():
            shifts = [y for y in range(mb.bit_length()) if mb >> y & 1]
            for xa, ma in acc.items():
                m = 0
                for y in shifts:
                    m |= ma << y
                nxt[xa + xb] = nxt.get(xa + xb, 0) | m
        acc = nxt
    out = set()
    for x, m in acc.items():
        y = 0
        while m:
            if m & 1:
                out.add((x, y))
            m >>= 1
            y += 1
    return out


def minkowski_support(supports: Sequence[Iterable[Point]]) -> tuple[set[Point], LatticePolygon]:
    """Pointwise sumset of the given point sets and its hull."""
    if not supports:
        raise ValueError("need at least one support")
    if sum(len(list(s)) for s in supports) > 400:
        total = _bitset_sumset([list(s) for s in supports])
    else:
        total = {(0, 0)}
        for s in supports:
            total = sumset(total, s)
    return total, convex_hull(total)


def minkowski_hull(polygons: Sequence[LatticePolygon]) -> LatticePolygon:
    """Hull of a Minkowski sum, computed from vertex sets only."""
    acc = {(0, 0)}
    for P in polygons:
        acc = set(convex_hull(sumset(acc, P.vertices)).vertices)
    return convex_hull(acc)


@dataclass(frozen=True)
class EdgeNormal:
    edge: tuple[Point, Point]
    normal: tuple[int, int]


def edge_normals(poly: LatticePolygon) -> list[EdgeNormal]:
    """Primitive inner normal of every edge, in vertex order."""
    out = []
    for a, b in poly.edges():
        dx, dy = b[0] - a[0], b[1] - a[1]
        g = gcd(dx, dy)
        # counterclockwise traversal keeps the interior on the left
        out.append(EdgeNormal((a, b), (-dy // g, dx // g)))
    return out


def relevant(normals: Sequence[EdgeNormal], mode: str = "seven") -> list[EdgeNormal]:
    """Relevance filter: ``seven`` keeps inner normals with a + b >= 0,
    ``all`` keeps every edge."""
    if mode == "all":
        return list(normals)
    if mode == "seven":
        return [e for e in normals if e.normal[0] + e.normal[1] >= 0]
    raise ValueError(f"unknown relevance mode {mode!r}")


@dataclass(frozen=True)
class FaceRestriction:
    poly: SparsePoly
    weight: int
    vertex_face: bool


def face_restrict(p: SparsePoly, normal: tuple[int, int],
                  xy: tuple[str, str] = ("r13", "r23")) -> FaceRestriction:
    """Terms of p minimizing a*m + b*n over its (r13, r23) exponents."""
    if p.is_zero():
        raise ZeroPolynomial("face of the zero polynomial")
    a, b = normal
    parts = p.project(xy)
    w = min(a * m + b * n for m, n in parts)
    keep = [(mn, c) for mn, c in parts.items() if a * mn[0] + b * mn[1] == w]
    face = SparsePoly()
    for (m, n), c in keep:
        face = face + c * SparsePoly.monomial({xy[0]: m, xy[1]: n})
    return FaceRestriction(face, w, len(keep) == 1)
