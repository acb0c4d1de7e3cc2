"""Exclusion of the candidate Puiseux branches.

For a normal with a nondegenerate leading root the branch is written with an
integer-power tail r13 = s (root + a2 s + a3 s^2 + ...), r23 = s and the
coefficients of each minor are solved order by order; the accumulated ideal
eventually becomes the unit ideal.  Degenerate roots go through the Newton
diagram of the shifted equations instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

import flint

from .exactpoly import SparsePoly, poly_strip, primitive
from .polygon import convex_hull
from .solve import NONZERO, buchberger, dehomogenize, is_unit_ideal, normal_form
from .polygon import face_restrict

__all__ = [
    "TruncationInsufficient", "DegenerateRoot", "NoBranch", "SeriesAnsatz",
    "series_substitute", "newton_diagram", "NewtonDiagram", "ift_certify",
    "IftCertificate", "analyze_branch", "BranchVerdict", "shifted_equation",
]

MAX_ORDER = 19  # a2..a20 exist in the alphabet


class TruncationInsufficient(RuntimeError):
    pass


class DegenerateRoot(ValueError):
    pass


class NoBranch(ValueError):
    pass


def _v(name):
    return SparsePoly.var(name)


# ---------------------------------------------------------------------------
# series

@dataclass(frozen=True)
class SeriesAnsatz:
    """r_fixed = s and r_free = s^weight * (root + a2 s + ... + a_{N+1} s^N).

    ``free`` is the distance carrying the tail; the other one is s."""
    root: Fraction
    order: int
    free: str = "r13"
    weight: int = 1

    @property
    def fixed(self) -> str:
        return "r23" if self.free == "r13" else "r13"

    def tail_names(self) -> list[str]:
        if self.order > MAX_ORDER:
            raise TruncationInsufficient(f"truncation {self.order} exceeds the alphabet")
        return [f"a{j}" for j in range(2, self.order + 2)]

    def base(self) -> list[SparsePoly]:
        return [SparsePoly.const(self.root)] + [_v(a) for a in self.tail_names()]


def _mul_trunc(a: list, b: list, n: int) -> list:
    out = [SparsePoly() for _ in range(n + 1)]
    for i, x in enumerate(a[:n + 1]):
        if x.is_zero():
            continue
        for j, y in enumerate(b[:n + 1 - i]):
            if not y.is_zero():
                out[i + j] = out[i + j] + x * y
    return out


def series_substitute(G: SparsePoly, ansatz: SeriesAnsatz) -> tuple[int, list[SparsePoly]]:
    """Coefficients of G under the ansatz.

    Returns ``(d, [c_0, ..., c_N])`` with G = s^d (c_0 + c_1 s + ... ) where d
    is the smallest weighted degree present; orders beyond N are dropped."""
    N = ansatz.order
    w = ansatz.weight
    parts = G.project((ansatz.free, ansatz.fixed))
    d = min(w * m + n for m, n in parts)
    base = ansatz.base()
    powers = {0: [SparsePoly.const(1)] + [SparsePoly()] * N}
    out = [SparsePoly() for _ in range(N + 1)]
    for (m, n), c in sorted(parts.items()):
        shift = w * m + n - d
        if shift > N:
            continue
        while max(powers) < m:
            top = max(powers)
            powers[top + 1] = _mul_trunc(powers[top], base, N)
        pw = powers[m]
        for t in range(N + 1 - shift):
            if not pw[t].is_zero():
                out[shift + t] = out[shift + t] + c * pw[t]
    return d, out


# ---------------------------------------------------------------------------
# implicit function theorem certificate

@dataclass
class IftCertificate:
    root: Fraction
    faces: list            # F_i(k, 0)
    cofactors: list        # phi_i(k)
    P: SparsePoly          # monic gcd
    derivative_at_root: Fraction


def _to_fmpq_poly(p: SparsePoly, var="k") -> flint.fmpq_poly:
    cs = p.coefficients_in(var) if not p.is_zero() else {}
    deg = max(cs) if cs else 0
    vals = []
    for e in range(deg + 1):
        c = cs[e].constant_value() if e in cs else Fraction(0)
        vals.append(flint.fmpq(c.numerator, c.denominator))
    return flint.fmpq_poly(vals)


def _from_fmpq_poly(q: flint.fmpq_poly, var="k") -> SparsePoly:
    x = _v(var)
    out = SparsePoly()
    for e, c in enumerate(q.coeffs()):
        c = flint.fmpq(c)
        if c != 0:
            out = out + x ** e * Fraction(int(c.p), int(c.q))
    return out


def ift_certify(root, faces_at_s0: Sequence[SparsePoly], var: str = "k") -> IftCertificate:
    """Combine the univariate faces into their gcd P with explicit cofactors
    and check that ``root`` is a simple root of P."""
    root = Fraction(root)
    polys = [_to_fmpq_poly(f, var) for f in faces_at_s0]
    g = flint.fmpq_poly([0])
    cof = [flint.fmpq_poly([0]) for _ in polys]
    for i, p in enumerate(polys):
        if p.is_zero():
            continue
        if g.is_zero():
            g = p
            cof[i] = flint.fmpq_poly([1])
            continue
        # xgcd returns the monic gcd with s*g + t*p = gcd
        ng, s, t = g.xgcd(p)
        cof = [c * s for c in cof]
        cof[i] = t
        g = ng
    lc = g.coeffs()[-1]
    g = g / lc
    cof = [c / lc for c in cof]
    combo = sum((c * p for c, p in zip(cof, polys)), flint.fmpq_poly([0]))
    if combo != g:
        raise ArithmeticError("cofactor identity failed")
    P = _from_fmpq_poly(g, var)
    if g(flint.fmpq(root.numerator, root.denominator)) != 0:
        raise ValueError(f"{root} is not a root of the combined polynomial")
    dv = g.derivative()(flint.fmpq(root.numerator, root.denominator))
    dv = Fraction(int(dv.p), int(dv.q))
    cert = IftCertificate(root, list(faces_at_s0), [_from_fmpq_poly(c, var) for c in cof], P, dv)
    if dv == 0:
        raise DegenerateRoot(cert)
    return cert


# ---------------------------------------------------------------------------
# Newton diagram

@dataclass
class NewtonDiagram:
    support: list                    # (i, j): s^i u^j
    vertices: list                   # lower-left chain from the u-axis to the s-axis
    slopes: list                     # Fractions, negative
    candidates: list                 # d = -1/slope
    vertex_coefficients: list = field(default_factory=list)


def newton_diagram(F: SparsePoly, s: str = "s", u: str = "u") -> NewtonDiagram:
    if F.is_zero():
        raise NoBranch("zero polynomial")
    parts = F.project((s, u))
    if (0, 0) in parts:
        raise NoBranch("F(0, 0) != 0")
    pts = sorted(parts)
    on_u = [p for p in pts if p[0] == 0]
    on_s = [p for p in pts if p[1] == 0]
    if not on_u or not on_s:
        raise NoBranch("support does not meet both axes")
    # lower hull of the support together with far points closing it off
    hull = convex_hull(pts).vertices
    start = min(on_u, key=lambda p: p[1])
    end = min(on_s, key=lambda p: p[0])
    i0 = hull.index(start)
    chain = [start]
    k = i0
    while chain[-1] != end:
        k = (k + 1) % len(hull)
        chain.append(hull[k])
        if len(chain) > len(hull) + 1:
            raise NoBranch("diagram chain did not reach the s-axis")
    slopes, cands = [], []
    for a, b in zip(chain, chain[1:]):
        m = Fraction(b[1] - a[1], b[0] - a[0])
        if m >= 0:
            raise NoBranch("non-negative slope on the lower boundary")
        slopes.append(m)
        cands.append(-1 / m)
    if not slopes:
        raise NoBranch("no negative-slope segment")
    coeffs = [parts[v] for v in chain]
    return NewtonDiagram(pts, chain, slopes, cands, coeffs)


def shifted_equation(G: SparsePoly, normal: tuple[int, int], root: Fraction,
                     box: tuple[int, int] | None = None) -> SparsePoly:
    """F(s, u) = G with the scaled distance at root + u and the other at s.

    Only terms s^i u^j with i <= box[0], j <= box[1] are produced; by default
    the box reaches the first points of the support on both axes, which
    contains the whole Newton diagram."""
    free, fixed = ("r13", "r23") if normal == (0, 1) else ("r23", "r13")
    if normal not in ((0, 1), (1, 0)):
        raise ValueError("shifted equations are used for the axis normals only")
    parts = G.project((free, fixed))
    root = Fraction(root)
    by_n: dict[int, dict[int, SparsePoly]] = {}
    for (m, n), c in parts.items():
        by_n.setdefault(n, {})[m] = c

    def taylor(col: dict[int, SparsePoly], j: int) -> SparsePoly:
        acc = SparsePoly()
        for m, c in col.items():
            if m >= j:
                acc = acc + c * (comb(m, j) * root ** (m - j))
        return acc

    if box is None:
        col0 = by_n.get(0, {})
        J = 0
        while taylor(col0, J).is_zero():
            J += 1
            if J > max(col0, default=0):
                raise NoBranch("G vanishes identically on the axis")
        I = 0
        while taylor(by_n.get(I, {}), 0).is_zero():
            I += 1
            if I > max(by_n):
                raise NoBranch("G(root, s) vanishes identically")
        box = (I, J)
    I, J = box
    s, u = _v("s"), _v("u")
    out = SparsePoly()
    for n, col in by_n.items():
        if n > I:
            continue
        for j in range(J + 1):
            t = taylor(col, j)
            if not t.is_zero():
                out = out + t * s ** n * u ** j
    return out


def leading_coefficient_system(Fs: Sequence[SparsePoly], d: Fraction) -> list[SparsePoly]:
    """Lowest-order coefficients of F_i(s^q, k s^p) for d = p/q."""
    p, q = d.numerator, d.denominator
    out = []
    for F in Fs:
        parts = F.project(("s", "u"))
        wmin = min(q * i + p * j for i, j in parts)
        c = SparsePoly()
        for (i, j), coef in parts.items():
            if q * i + p * j == wmin:
                c = c + coef * _v("k") ** j
        out.append(c)
    return out


# ---------------------------------------------------------------------------
# branch verdicts

@dataclass
class BranchVerdict:
    normal: tuple[int, int]
    root: Fraction
    outcome: str                 # Inconsistent | ParameterConstraintThenInconsistent | Unresolved
    order: int | None = None
    constraints: list = field(default_factory=list)
    witness: list = field(default_factory=list)
    transcript: list = field(default_factory=list)
    reason: str = ""
    method: str = ""
    truncation: int = 0
    degrees: list = field(default_factory=list)
    ift: IftCertificate | None = None
    diagram: NewtonDiagram | None = None
    candidates: list = field(default_factory=list)

    @property
    def excluded(self) -> bool:
        return self.outcome in ("Inconsistent", "ParameterConstraintThenInconsistent")


def _params(polys) -> tuple[str, ...]:
    names = set()
    for p in polys:
        names |= set(p.variables())
    return tuple(n for n in ("h", "om") if n in names)


def _tail_order(names) -> list[str]:
    return sorted((n for n in names if n.startswith("a")), key=lambda n: -int(n[1:]))


def _series_branch(normal, root, minors, N, faces0, ift) -> BranchVerdict:
    free = "r13" if normal[1] == 1 else "r23"
    weight = normal[0] if free == "r13" else normal[1]
    ansatz = SeriesAnsatz(Fraction(root), N, free, weight)
    series = [series_substitute(G, ansatz) for G in minors]
    v = BranchVerdict(tuple(normal), Fraction(root), "", method="series",
                      truncation=N, degrees=[d for d, _ in series], ift=ift)
    if any(not c[0].is_zero() for _, c in series):
        raise ArithmeticError("leading coefficients do not vanish at the root")
    gens: list[SparsePoly] = []
    basis: list[SparsePoly] = []
    for j in range(1, N + 1):
        new = [primitive(c[j]) for _, c in series if not c[j].is_zero()]
        variables = tuple(_tail_order({n for p in gens + new for n in p.variables()})) \
            + _params(gens + new)
        reduced = []
        for p in new:
            r = normal_form(p, basis, variables, "lex") if basis else p
            if not r.is_zero():
                reduced.append(primitive(r))
        gens = gens + new
        basis_next = buchberger(gens, variables, order="lex")
        entry = {"order": j, "equations": new, "reduced": reduced, "basis": basis_next}
        v.transcript.append(entry)
        if is_unit_ideal(basis_next):
            v.order = j
            v.witness = reduced
            v.constraints = [g for g in basis if not any(n.startswith("a") for n in g.variables())]
            v.outcome = "ParameterConstraintThenInconsistent" if v.constraints else "Inconsistent"
            return v
        basis = basis_next
    v.outcome = "Unresolved"
    v.reason = f"TruncationInsufficient: no inconsistency through order {N}"
    return v


def _diagram_branch(normal, root, minors, ift_error) -> BranchVerdict:
    Fs = [shifted_equation(G, normal, root) for G in minors]
    v = BranchVerdict(tuple(normal), Fraction(root), "", method="newton-diagram")
    v.ift = ift_error
    simplest = min(range(len(Fs)), key=lambda i: (len(minors[i]), i))
    diag = newton_diagram(Fs[simplest])
    v.diagram = diag
    v.degrees = [simplest]
    nonconst = [c for c in diag.vertex_coefficients if not c.is_constant()]
    if nonconst:
        v.outcome = "Unresolved"
        v.reason = "a Newton-diagram vertex coefficient depends on the parameters"
        return v
    all_inconsistent = True
    for d in diag.candidates:
        lead = leading_coefficient_system(Fs, d)
        eqs = [poly_strip(p, NONZERO)[0] for p in lead if not p.is_zero()]
        variables = ("k",) + _params(eqs)
        basis = buchberger(eqs, variables, order="lex")
        ok = is_unit_ideal(basis)
        v.candidates.append({"d": d, "equations": eqs, "basis": basis, "inconsistent": ok})
        all_inconsistent &= ok
    if all_inconsistent:
        v.outcome = "Inconsistent"
        v.order = 0
        v.witness = [e for c in v.candidates for e in c["equations"]]
    else:
        v.outcome = "Unresolved"
        v.reason = "a leading form survives the first order"
    return v


def analyze_branch(normal: tuple[int, int], root, minors: Sequence[SparsePoly],
                   truncation: int = 8, ceiling: int = 16) -> BranchVerdict:
    """Exclude Puiseux branches with leading exponent ``normal`` and
    leading coefficient ``root``."""
    restr = [face_restrict(G, normal).poly for G in minors]
    faces0 = [primitive(dehomogenize(f, normal)) for f in restr]
    try:
        ift = ift_certify(root, faces0)
    except DegenerateRoot as exc:
        if normal in ((0, 1), (1, 0)):
            return _diagram_branch(normal, root, minors, exc.args[0])
        v = BranchVerdict(tuple(normal), Fraction(root), "Unresolved", method="none",
                          reason="degenerate root off the coordinate axes", ift=exc.args[0])
        return v
    if 1 not in normal or min(normal) < 0:
        return BranchVerdict(tuple(normal), Fraction(root), "Unresolved", method="none",
                             reason="series ansatz implemented for normals with a unit component",
                             ift=ift)
    N = truncation
    while True:
        v = _series_branch(normal, root, minors, N, faces0, ift)
        if v.outcome != "Unresolved" or N >= ceiling:
            return v
        N = min(N + 2, ceiling)
