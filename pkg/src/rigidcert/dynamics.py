"""Planar three-body problem in Jacobi coordinates.

Positions are z1 = (x1, y1), z2 = (x2, y2) with velocities (u1, v1), (u2, v2).
The mutual distances r12, r13, r23 are kept as symbols tied to their defining
squares, and the accelerations are obtained by differentiating the force
function of the Lagrangian rather than being written out by hand.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .exactpoly import RatExpr, SparsePoly

__all__ = [
    "MassParams", "VectorField", "ConservedPair", "EQUAL_MASSES", "derive_field",
    "lie_derivative", "derivative_cascade", "conserved_quantities",
    "distance_squares", "force_function", "POSITIONS", "VELOCITIES",
]

POSITIONS = ("x1", "y1", "x2", "y2")
VELOCITIES = ("u1", "v1", "u2", "v2")
PAIRS = ("r12", "r13", "r23")


@dataclass(frozen=True)
class MassParams:
    m1: Fraction = Fraction(1)
    m2: Fraction = Fraction(1)
    m3: Fraction = Fraction(1)

    @property
    def total(self) -> Fraction:
        return self.m1 + self.m2 + self.m3

    @property
    def mu1(self) -> Fraction:
        return self.m1 * self.m2 / (self.m1 + self.m2)

    @property
    def mu2(self) -> Fraction:
        return (self.m1 + self.m2) * self.m3 / self.total

    @property
    def nu1(self) -> Fraction:
        return self.m1 / (self.m1 + self.m2)

    @property
    def nu2(self) -> Fraction:
        return self.m2 / (self.m1 + self.m2)

    def pair_mass(self, pair: str) -> Fraction:
        return {"r12": self.m1 * self.m2, "r13": self.m1 * self.m3,
                "r23": self.m2 * self.m3}[pair]


EQUAL_MASSES = MassParams()


def _v(name):
    return SparsePoly.var(name)


def distance_squares(m: MassParams = EQUAL_MASSES) -> dict[str, SparsePoly]:
    """Defining polynomials of r12², r13², r23² in the Jacobi positions."""
    x1, y1, x2, y2 = map(_v, POSITIONS)
    return {
        "r12": x1 ** 2 + y1 ** 2,
        "r13": (x2 + m.nu2 * x1) ** 2 + (y2 + m.nu2 * y1) ** 2,
        "r23": (x2 - m.nu1 * x1) ** 2 + (y2 - m.nu1 * y1) ** 2,
    }


def force_function(m: MassParams = EQUAL_MASSES) -> RatExpr:
    """U = sum of m_i m_j / r_ij."""
    total = RatExpr(SparsePoly())
    for pair in PAIRS:
        total = total + RatExpr(SparsePoly.const(m.pair_mass(pair)), _v(pair))
    return total


@dataclass
class VectorField:
    """Time derivatives of the eight phase variables plus the attached
    distance relations used to differentiate the distance symbols."""
    rates: dict[str, RatExpr]
    squares: dict[str, SparsePoly]
    masses: MassParams = EQUAL_MASSES
    _distance_rates: dict[str, RatExpr] = field(default_factory=dict, repr=False)

    def __getitem__(self, name: str) -> RatExpr:
        return self.rates[name]

    def distance_rate(self, pair: str) -> RatExpr:
        """d r/dt = (d r²/dt) / (2 r), the numerator taken along positions."""
        if pair not in self._distance_rates:
            sq = self.squares[pair]
            num = SparsePoly()
            for q in POSITIONS:
                num = num + sq.diff(q) * self.rates[q].as_poly()
            self._distance_rates[pair] = RatExpr(num, 2 * _v(pair))
        return self._distance_rates[pair]

    def evaluate(self, state: Mapping[str, float]) -> dict[str, float]:
        return {k: float(e.evaluate(state, convert=float)) for k, e in self.rates.items()}


def derive_field(m: MassParams = EQUAL_MASSES) -> VectorField:
    """Euler-Lagrange field for L = T + U with T = ½μ1|ζ1|² + ½μ2|ζ2|².

    Each acceleration is μ⁻¹ ∂U/∂q; since ∂(1/r)/∂q = -(∂r²/∂q)/(2r³) this
    is assembled from derivatives of the distance squares."""
    squares = distance_squares(m)
    rates: dict[str, RatExpr] = {}
    for q, v in zip(POSITIONS, VELOCITIES):
        rates[q] = RatExpr(_v(v))
    inertia = {"x1": m.mu1, "y1": m.mu1, "x2": m.mu2, "y2": m.mu2}
    for q, v in zip(POSITIONS, VELOCITIES):
        acc = RatExpr(SparsePoly())
        for pair in PAIRS:
            dsq = squares[pair].diff(q)
            if dsq.is_zero():
                continue
            coef = -m.pair_mass(pair) / (2 * inertia[q])
            acc = acc + RatExpr(dsq * coef, _v(pair) ** 3)
        rates[v] = acc
    return VectorField(rates, squares, m)


def lie_derivative(e, F: VectorField) -> RatExpr:
    """Total time derivative along F by the chain rule."""
    e = RatExpr.lift(e)
    if e.is_polynomial():
        return _lie_poly(e.as_poly(), F)
    dn = _lie_poly(e.num, F)
    dd = _lie_poly(e.den, F)
    return (dn * e.den - dd * e.num) / RatExpr(e.den ** 2)


def _lie_poly(p: SparsePoly, F: VectorField) -> RatExpr:
    total = RatExpr(SparsePoly())
    names = set(p.variables())
    for q in POSITIONS + VELOCITIES:
        if q in names:
            total = total + F.rates[q] * RatExpr(p.diff(q))
    for pair in PAIRS:
        if pair in names:
            total = total + F.distance_rate(pair) * RatExpr(p.diff(pair))
    return total


def derivative_cascade(depth: int = 4, F: VectorField | None = None) -> list[RatExpr]:
    """f1..f_depth: successive time derivatives of f = ½ r12²."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    F = F or derive_field()
    f = RatExpr(F.squares["r12"] * Fraction(1, 2))
    out = []
    for _ in range(depth):
        f = lie_derivative(f, F)
        out.append(f)
    return out


@dataclass(frozen=True)
class ConservedPair:
    H: RatExpr
    Omega: SparsePoly


def conserved_quantities(m: MassParams = EQUAL_MASSES) -> ConservedPair:
    u1, v1, u2, v2 = map(_v, VELOCITIES)
    x1, y1, x2, y2 = map(_v, POSITIONS)
    kinetic = (u1 ** 2 + v1 ** 2) * (m.mu1 / 2) + (u2 ** 2 + v2 ** 2) * (m.mu2 / 2)
    H = RatExpr(kinetic) - force_function(m)
    Omega = (x1 * v1 - y1 * u1) * m.mu1 + (x2 * v2 - y2 * u2) * m.mu2
    return ConservedPair(H, Omega)


def reduce_distances(p: SparsePoly, squares: Mapping[str, SparsePoly]) -> SparsePoly:
    """Replace r^(2j+e) by (r²)^j r^e using the defining squares."""
    out = p
    for pair, sq in squares.items():
        if pair not in out.variables():
            continue
        acc = SparsePoly()
        for e, c in out.coefficients_in(pair).items():
            acc = acc + c * sq ** (e // 2) * _v(pair) ** (e % 2)
        out = acc
    return out
