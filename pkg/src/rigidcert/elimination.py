"""Reduction of the constant-distance conditions to polynomials in r13, r23.

With r12 fixed, rotate so that z1 = (1, 0) and u1 = 0.  The remaining phase
variables are traded for the distances r13, r23 and their rates w13, w23;
y2 survives only linearly and is removed using the third derivative.  The
result is four equations quadratic in (w13, w23) whose coefficient matrix,
extended by the derivative condition on its determinant, yields five
polynomials in (r13, r23) with parameters (h, om).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .dynamics import (EQUAL_MASSES, MassParams, POSITIONS, VELOCITIES,
                       conserved_quantities, derivative_cascade, derive_field,
                       distance_squares)
from .exactpoly import (RatExpr, SparsePoly, ZeroPolynomial, poly_det_ff,
                        poly_subst, strip_known_factors)

__all__ = [
    "DegenerateGeometry", "NotLinearInY2", "LinearVelocityTerm",
    "NormalizedState", "QuadraticVelocityForm", "MinorSystem", "GSystem",
    "KNOWN_FACTORS", "apply_normalization", "eliminate_geometry", "reduce_y2",
    "solve_y2", "build_g_system", "decompose_quadratic", "build_minor_system",
    "FIFTH_ROW_SIGNS",
]


class DegenerateGeometry(ArithmeticError):
    pass


class NotLinearInY2(ValueError):
    pass


class LinearVelocityTerm(ValueError):
    """A velocity monomial other than 1, w13², w13 w23, w23² was found."""


def _v(name: str) -> SparsePoly:
    return SparsePoly.var(name)


r13, r23, om = _v("r13"), _v("r23"), _v("om")

# Factors that are removed wherever they divide.  Each vanishes only on a
# locus that is either impossible or excluded from the analysis; the label is
# what the certificate records.
KNOWN_FACTORS: list[tuple[str, SparsePoly, str]] = [
    ("om", om, "zero angular momentum, excluded: the y2 solve divides by a multiple of om"),
    ("r13-r23", r13 - r23, "isosceles instants r13 = r23, where f3 loses its y2-free part"),
    ("r13+r23+1", r13 + r23 + 1, "positive for positive distances"),
    ("r13+r23-1", r13 + r23 - 1, "collinear instant (y2 = 0), excluded"),
    ("r13-r23+1", r13 - r23 + 1, "collinear instant (y2 = 0), excluded"),
    ("r13-r23-1", r13 - r23 - 1, "collinear instant (y2 = 0), excluded"),
    ("1+r13^2+r23^2", 1 + r13 ** 2 + r23 ** 2, "positive"),
    ("r13^2+r13r23+r23^2", r13 ** 2 + r13 * r23 + r23 ** 2, "positive for positive distances"),
]


# variables whose powers may be divided out: distances are positive and
# om = 0 is excluded
NONZERO_VARIABLES = ("r13", "r23", "om")


def strip_catalog(p: SparsePoly) -> tuple[SparsePoly, dict]:
    """Remove catalog factors, content and monomial; return core and a
    JSON-friendly record of what was removed."""
    core, removed, content, mono = strip_known_factors(
        p, [(k, f) for k, f, _ in KNOWN_FACTORS], NONZERO_VARIABLES)
    rec = {"factors": removed, "content": str(content), "monomial": mono.to_text()}
    return core, rec


# ---------------------------------------------------------------------------
# normalization

@dataclass(frozen=True)
class NormalizedState:
    """Substitution table r12→1, x1→1, y1→0, u1→0 and v1 from Ω = om."""
    table: dict

    @classmethod
    def build(cls, m: MassParams = EQUAL_MASSES) -> "NormalizedState":
        x2, y2, u2, v2 = map(_v, ("x2", "y2", "u2", "v2"))
        v1 = (om - (x2 * v2 - y2 * u2) * m.mu2) * (1 / m.mu1)
        one, zero = SparsePoly.const(1), SparsePoly()
        return cls({"r12": one, "x1": one, "y1": zero, "u1": zero, "v1": v1})


def apply_normalization(e, state: NormalizedState | None = None) -> RatExpr:
    state = state or NormalizedState.build()
    e = RatExpr.lift(e)
    return RatExpr(e.num.compose(state.table), e.den.compose(state.table))


# ---------------------------------------------------------------------------
# geometry

@dataclass
class Geometry:
    """Substitutions for x2, y2² and the solved velocities u2, v2."""
    x2: SparsePoly
    Y: SparsePoly                 # y2² as a polynomial in r13, r23
    u2: RatExpr
    v2: RatExpr
    cramer_det: SparsePoly


def build_geometry(m: MassParams = EQUAL_MASSES) -> Geometry:
    state = NormalizedState.build(m)
    sq = {k: p.compose(state.table) for k, p in distance_squares(m).items()}
    # r13² - r23² is linear in x2 after normalization
    diff = sq["r13"] - sq["r23"]
    parts = diff.coefficients_in("x2")
    if set(parts) - {0, 1} or parts.get(1, SparsePoly()).is_zero():
        raise DegenerateGeometry("distance difference is not linear in x2")
    x2 = ((r13 ** 2 - r23 ** 2) - parts.get(0, SparsePoly())) / parts[1].constant_value()
    Y = r13 ** 2 - (sq["r13"] - _v("y2") ** 2).compose({"x2": x2})
    # r w = ½ d(r²)/dt, linear in (u2, v2) once v1 is eliminated
    rows = []
    for pair, w in (("r13", "w13"), ("r23", "w23")):
        full = distance_squares(m)[pair]
        rate = SparsePoly()
        for q, v in zip(POSITIONS, VELOCITIES):
            rate = rate + full.diff(q) * _v(v)
        rate = (rate * Fraction(1, 2)).compose(state.table).compose({"x2": x2})
        eq = rate - _v(pair) * _v(w)
        by = eq.project(("u2", "v2"))
        if set(by) - {(0, 0), (1, 0), (0, 1)}:
            raise DegenerateGeometry("velocity relation is not linear in u2, v2")
        rows.append((by.get((1, 0), SparsePoly()), by.get((0, 1), SparsePoly()),
                     -by.get((0, 0), SparsePoly())))
    (a, b, e), (c, d, f) = rows
    det = a * d - b * c
    if det.is_zero():
        raise DegenerateGeometry("velocity relations are singular")
    u2 = RatExpr(e * d - b * f, det)
    v2 = RatExpr(a * f - e * c, det)
    return Geometry(x2, Y, u2, v2, det)


def reduce_y2(p: SparsePoly, Y: SparsePoly) -> tuple[SparsePoly, SparsePoly]:
    """Write p as p0 + p1*y2 modulo y2² = Y."""
    p0, p1 = SparsePoly(), SparsePoly()
    pows = {0: SparsePoly.const(1)}
    for e, c in p.coefficients_in("y2").items():
        j = e // 2
        if j not in pows:
            pows[j] = Y ** j
        if e % 2:
            p1 = p1 + c * pows[j]
        else:
            p0 = p0 + c * pows[j]
    return p0, p1


@dataclass
class ReducedExpr:
    """(p0 + p1*y2) / den with den free of y2."""
    p0: SparsePoly
    p1: SparsePoly
    den: SparsePoly

    def numerator(self) -> SparsePoly:
        return self.p0 + self.p1 * _v("y2")


def eliminate_geometry(e: RatExpr, geo: Geometry) -> ReducedExpr:
    """Substitute x2, u2, v2 and reduce the y2-dependence to degree one,
    rationalizing a denominator linear in y2 by its conjugate."""
    e = RatExpr.lift(e)
    for name, val in (("x2", RatExpr(geo.x2)), ("u2", geo.u2), ("v2", geo.v2)):
        e = poly_subst(e.num, name, val) / poly_subst(e.den, name, val)
    n0, n1 = reduce_y2(e.num, geo.Y)
    d0, d1 = reduce_y2(e.den, geo.Y)
    if not d1.is_zero():
        n0, n1 = n0 * d0 - n1 * d1 * geo.Y, n1 * d0 - n0 * d1
        d0 = d0 * d0 - d1 * d1 * geo.Y
        if d0.is_zero():
            raise DegenerateGeometry("conjugate of the denominator vanishes")
    # cancel a common polynomial factor, if any
    g = d0.gcd(n0.gcd(n1) if not n1.is_zero() else n0) if not n0.is_zero() else d0.gcd(n1)
    if not g.is_constant():
        n0, n1, d0 = (n0.exact_div(g) if not n0.is_zero() else n0,
                      n1.exact_div(g) if not n1.is_zero() else n1, d0.exact_div(g))
    bad = {"x1", "y1", "u1", "v1", "u2", "v2", "x2", "r12"} & set(
        n0.variables() + n1.variables() + d0.variables())
    if bad or "y2" in n0.variables() + n1.variables() + d0.variables():
        raise DegenerateGeometry(f"variables survived elimination: {sorted(bad)}")
    return ReducedExpr(n0, n1, d0)


def solve_y2(f3: ReducedExpr, Y: SparsePoly, form: str = "direct") -> RatExpr:
    """Solve c0 + c1*y2 = 0 (the numerator of the reduced f3).

    ``direct`` returns -c0/c1.  ``rationalized`` multiplies the equation by y2
    first and returns -c1*Y/c0; both agree wherever y2² = Y, but only the
    rationalized form keeps the resulting equations even in the velocities."""
    c0, c1 = f3.p0, f3.p1
    if c1.is_zero():
        raise NotLinearInY2("reduced f3 has no y2 term")
    if form == "direct":
        return RatExpr(-c0, c1)
    if form == "rationalized":
        if c0.is_zero():
            raise NotLinearInY2("reduced f3 has no y2-free part")
        return RatExpr(-c1 * Y, c0)
    raise ValueError(f"unknown form {form!r}")


# ---------------------------------------------------------------------------
# the four equations

@dataclass
class GSystem:
    reduced: dict            # name -> ReducedExpr for f2, f3, f4, H-h
    c0: SparsePoly
    c1: SparsePoly
    Y: SparsePoly
    y2: RatExpr
    raw: list                # g1..g4 before stripping
    g: list                  # stripped cores
    ledger: dict = field(default_factory=dict)


def build_g_system(m: MassParams = EQUAL_MASSES, y2_form: str = "direct") -> GSystem:
    F = derive_field(m)
    fs = derivative_cascade(4, F)
    cons = conserved_quantities(m)
    geo = build_geometry(m)
    sources = {"f2": fs[1], "f3": fs[2], "f4": fs[3],
               "H-h": cons.H - RatExpr(_v("h"))}
    reduced = {k: eliminate_geometry(apply_normalization(e), geo) for k, e in sources.items()}
    f3 = reduced["f3"]
    y2 = solve_y2(f3, geo.Y, y2_form)
    raw = []
    for name in ("f2", "f4", "H-h"):
        r = reduced[name]
        # numerator of p0 + p1 * (num/den)
        raw.append(r.p0 * y2.den + r.p1 * y2.num)
    raw.append(y2.num ** 2 - geo.Y * y2.den ** 2)
    g, records = [], []
    for p in raw:
        if p.is_zero():
            raise ZeroPolynomial("an eliminated equation vanished identically")
        core, rec = strip_catalog(p)
        g.append(core)
        records.append(rec)
    ledger = {
        "substitution_order": ["normalization", "x2", "u2,v2", "y2 parity", "solve f3 for y2",
                               "substitute into f2, f4, H-h and y2^2 relation"],
        "x2": geo.x2.to_text(),
        "y2_squared": geo.Y.to_text(),
        "velocity_system_determinant": geo.cramer_det.to_text(),
        "denominators": {k: r.den.to_text() for k, r in reduced.items()},
        "y2_solution_form": y2_form,
        "y2_numerator": y2.num.to_text(),
        "y2_denominator": y2.den.to_text(),
        "f3_c0_terms": len(f3.p0),
        "f3_c1_terms": len(f3.p1),
        "g_strip": records,
        "excluded_loci": {k: why for k, _, why in KNOWN_FACTORS},
    }
    return GSystem(reduced, f3.p0, f3.p1, geo.Y, y2, raw, g, ledger)


# ---------------------------------------------------------------------------
# quadratic velocity forms

VELOCITY_KEYS = ((0, 0), (2, 0), (1, 1), (0, 2))


@dataclass(frozen=True)
class QuadraticVelocityForm:
    a0: SparsePoly
    a1: SparsePoly
    a2: SparsePoly
    a3: SparsePoly

    def coeffs(self) -> tuple[SparsePoly, ...]:
        return (self.a0, self.a1, self.a2, self.a3)

    def reassemble(self) -> SparsePoly:
        w13, w23 = _v("w13"), _v("w23")
        return self.a0 + self.a1 * w13 ** 2 + self.a2 * w13 * w23 + self.a3 * w23 ** 2


def decompose_quadratic(g: SparsePoly) -> QuadraticVelocityForm:
    parts = g.project(("w13", "w23"))
    extra = sorted(set(parts) - set(VELOCITY_KEYS))
    if extra:
        raise LinearVelocityTerm(f"unexpected velocity monomials w13^i w23^j: {extra}")
    return QuadraticVelocityForm(*(parts.get(k, SparsePoly()) for k in VELOCITY_KEYS))


# ---------------------------------------------------------------------------
# determinant and minors

# Sign of the Q² entry in the appended row (0, P², 0, ±Q²).  Differentiating
# G along the motion gives P w13 + Q w23 = 0, hence P²w13² - Q²w23² = 0
# ("derived").  The "published" sign reproduces the reference polygon data.
FIFTH_ROW_SIGNS = {"published": 1, "derived": -1}


@dataclass
class MinorSystem:
    G: SparsePoly
    P: SparsePoly
    Q: SparsePoly
    minors: list          # G1..G5, stripped
    fifth_row: str
    det_raw: SparsePoly
    ledger: dict = field(default_factory=dict)


def build_minor_system(forms: Sequence[QuadraticVelocityForm],
                       fifth_row: str = "published") -> MinorSystem:
    if len(forms) != 4:
        raise ValueError("need exactly four quadratic forms")
    sign = FIFTH_ROW_SIGNS[fifth_row]
    rows = [list(f.coeffs()) for f in forms]
    memo: dict = {}
    det_raw = poly_det_ff(rows, memo=memo)
    if det_raw.is_zero():
        raise ZeroPolynomial("coefficient determinant vanishes identically")
    G, g_rec = strip_catalog(det_raw)
    P, Q = G.diff("r13"), G.diff("r23")
    last = [SparsePoly(), P * P, SparsePoly(), Q * Q * sign]
    full = rows + [last]
    minors, records = [], []
    for i in range(5):
        kept = [full[j] for j in range(5) if j != i]
        if i < 4:
            # expand along the sparse appended row; moving it to the top of
            # four rows costs three transpositions
            det = -poly_det_ff([last] + kept[:3], memo=memo)
        else:
            det = det_raw
        core, rec = strip_catalog(det)
        rec["terms"] = len(core)
        rec["max_degree"] = max(core.degree("r13"), core.degree("r23"))
        minors.append(core)
        records.append(rec)
    if minors[4] != G:
        raise ArithmeticError("minor without the appended row differs from G")
    ledger = {"G_strip": g_rec, "minor_strip": records, "fifth_row": fifth_row}
    return MinorSystem(G, P, Q, minors, fifth_row, det_raw, ledger)
