"""Gröbner bases and the face-system verdicts.

The Buchberger implementation works over Q with every symbol, including
the parameters h and om, treated as a ring variable.  Bases are returned
reduced and monic, sorted by leading monomial.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import flint

from .exactpoly import SparsePoly, poly_strip, primitive

# powers of these may be divided out of face equations: r13, r23 and the
# leading coefficient k are nonzero by construction and om = 0 is excluded
NONZERO = ("r13", "r23", "k", "om")
from .polygon import face_restrict

__all__ = [
    "ResourceLimit", "LIMITS", "buchberger", "normal_form", "face_verdict",
    "factor_univariate_rational", "FaceVerdict", "dehomogenize", "is_unit_ideal",
]


class ResourceLimit(RuntimeError):
    pass


# defaults for buchberger; the pipeline overrides them from its config
LIMITS = {"max_basis": 500, "max_pairs": 200000}


_ORDERS = {"grevlex": "degrevlex", "lex": "lex", "deglex": "deglex"}


class _Ring:
    """Local flint context over an ordered subset of variables."""

    def __init__(self, variables: Sequence[str], order: str):
        if order not in _ORDERS:
            raise ValueError(f"unknown monomial order {order!r}")
        self.names = tuple(variables)
        self.order = order
        self.ctx = flint.fmpq_mpoly_ctx.get(self.names, _ORDERS[order])

    def lift(self, p: SparsePoly):
        extra = set(p.variables()) - set(self.names)
        if extra:
            raise ValueError(f"variables {sorted(extra)} not in the declared ring")
        return self.ctx.from_dict({tuple(k): v.raw.leading_coefficient()
                                   for k, v in p.project(self.names).items()})

    def lower(self, q) -> SparsePoly:
        return SparsePoly.from_terms(
            [({n: int(e) for n, e in zip(self.names, m)}, Fraction(int(c.p), int(c.q)))
             for m, c in zip(q.monoms(), q.coeffs())])

    def key(self, exps: tuple[int, ...]):
        if self.order == "lex":
            return exps
        if self.order == "deglex":
            return (sum(exps), exps)
        return (sum(exps), tuple(-e for e in reversed(exps)))


def _lm(q) -> tuple[int, ...]:
    return tuple(int(e) for e in q.monomial(0))


def _divides(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _reduce(p, basis, ctx):
    """Full normal form of p modulo basis (leading data precomputed)."""
    rem = ctx.from_dict({})
    while not p.is_zero():
        lm = _lm(p)
        lc = p.coefficient(0)
        for g, glm, glc in basis:
            if _divides(glm, lm):
                shift = tuple(x - y for x, y in zip(lm, glm))
                p = p - ctx.term(lc / glc, shift) * g
                break
        else:
            t = ctx.term(lc, lm)
            rem = rem + t
            p = p - t
    return rem


def _monic(q):
    return q / q.leading_coefficient()


def buchberger(generators: Sequence[SparsePoly], variables: Sequence[str],
               order: str = "grevlex", max_basis: int | None = None,
               max_pairs: int | None = None) -> list[SparsePoly]:
    """Reduced Gröbner basis of the ideal generated by ``generators`` in
    Q[variables] (first variable largest)."""
    max_basis = max_basis or LIMITS["max_basis"]
    max_pairs = max_pairs or LIMITS["max_pairs"]
    ring = _Ring(variables, order)
    ctx = ring.ctx
    G: list = []
    for p in generators:
        if p.is_zero():
            continue
        q = _monic(ring.lift(p))
        G.append(q)
    if not G:
        return []
    lms = [_lm(g) for g in G]
    if any(not any(m) for m in lms):
        return [SparsePoly.const(1)]
    pairs = {(i, j) for j in range(len(G)) for i in range(j)}
    done = 0
    while pairs:
        # normal strategy: smallest lcm degree, ties by index
        def key(ij):
            a, b = lms[ij[0]], lms[ij[1]]
            return (sum(max(x, y) for x, y in zip(a, b)), ij[1], ij[0])
        i, j = min(pairs, key=key)
        pairs.discard((i, j))
        done += 1
        if done > max_pairs:
            raise ResourceLimit("too many S-pairs")
        a, b = lms[i], lms[j]
        lcm = tuple(max(x, y) for x, y in zip(a, b))
        if all(min(x, y) == 0 for x, y in zip(a, b)):
            continue
        # chain criterion
        if any(k not in (i, j) and _divides(lms[k], lcm)
               and (min(i, k), max(i, k)) not in pairs and (min(j, k), max(j, k)) not in pairs
               for k in range(len(G))):
            continue
        s = (ctx.term(flint.fmpq(1), tuple(x - y for x, y in zip(lcm, a))) * G[i]
             - ctx.term(flint.fmpq(1), tuple(x - y for x, y in zip(lcm, b))) * G[j])
        basis = [(g, lms[k], g.leading_coefficient()) for k, g in enumerate(G)]
        r = _reduce(s, basis, ctx)
        if r.is_zero():
            continue
        r = _monic(r)
        rl = _lm(r)
        if not any(rl):
            return [SparsePoly.const(1)]
        G.append(r)
        lms.append(rl)
        if len(G) > max_basis:
            raise ResourceLimit("Gröbner basis grew beyond the configured limit")
        n = len(G) - 1
        pairs |= {(k, n) for k in range(n)}
    # minimize then interreduce
    keep = []
    for k, m in enumerate(lms):
        if any(_divides(lms[o], m) and (lms[o] != m or o < k) for o in range(len(G)) if o != k):
            continue
        keep.append(k)
    reduced = []
    for k in keep:
        others = [(G[o], lms[o], G[o].leading_coefficient()) for o in keep if o != k]
        lead = ctx.term(G[k].coefficient(0), lms[k])
        tail = _reduce(G[k] - lead, others, ctx)
        reduced.append(_monic(lead + tail))
    reduced.sort(key=lambda q: ring.key(_lm(q)))
    return [ring.lower(q) for q in reduced]


def normal_form(p: SparsePoly, basis: Sequence[SparsePoly], variables: Sequence[str],
                order: str = "grevlex") -> SparsePoly:
    ring = _Ring(variables, order)
    B = [ring.lift(g) for g in basis]
    data = [(g, _lm(g), g.leading_coefficient()) for g in B if not g.is_zero()]
    return ring.lower(_reduce(ring.lift(p), data, ring.ctx))


def is_unit_ideal(basis: Sequence[SparsePoly]) -> bool:
    return len(basis) == 1 and basis[0].is_constant() and not basis[0].is_zero()


# ---------------------------------------------------------------------------
# univariate roots

@dataclass
class RationalRoots:
    roots: list[tuple[Fraction, int]]
    remainder: SparsePoly          # product of factors without rational roots
    flagged: bool                  # remainder is nonconstant

    def nonzero(self) -> list[tuple[Fraction, int]]:
        return [(r, m) for r, m in self.roots if r != 0]


def factor_univariate_rational(p: SparsePoly, var: str | None = None) -> RationalRoots:
    names = p.variables()
    if len(names) > 1:
        raise ValueError("polynomial is not univariate")
    if p.is_zero():
        raise ValueError("zero polynomial")
    var = var or (names[0] if names else "k")
    coeffs = p.coefficients_in(var)
    deg = max(coeffs)
    up = flint.fmpq_poly([flint.fmpq(c.constant_value().numerator, c.constant_value().denominator)
                          if e in coeffs else 0 for e in range(deg + 1)
                          for c in [coeffs.get(e, SparsePoly())]])
    _, facs = up.factor()
    roots, rest = [], flint.fmpq_poly([1])
    for f, m in facs:
        if f.degree() == 1:
            c = f.coeffs()
            r = -flint.fmpq(c[0]) / flint.fmpq(c[1])
            roots.append((Fraction(int(r.p), int(r.q)), int(m)))
        else:
            rest *= f ** int(m)
    roots.sort()
    x = SparsePoly.var(var)
    rem = SparsePoly()
    for e, c in enumerate(rest.coeffs()):
        c = flint.fmpq(c)
        rem = rem + x ** e * Fraction(int(c.p), int(c.q))
    return RationalRoots(roots, rem, rest.degree() > 0)


# ---------------------------------------------------------------------------
# face verdicts

def dehomogenize(face: SparsePoly, normal: tuple[int, int]) -> SparsePoly:
    """Fix the scaling freedom of a quasi-homogeneous face: set r23 = 1 and
    rename r13 to k, or the mirror when the normal has no r23 component."""
    fixed, free = ("r23", "r13") if normal[1] != 0 else ("r13", "r23")
    return face.compose({fixed: SparsePoly.const(1), free: SparsePoly.var("k")})


@dataclass
class FaceVerdict:
    normal: tuple[int, int]
    kind: str                                  # VertexFace | NoNonzeroSolution | CandidateRoots | Unresolved
    faces: list = field(default_factory=list)  # stripped face polynomials in r13, r23
    vertex_faces: list = field(default_factory=list)
    normalized: list = field(default_factory=list)
    basis: list = field(default_factory=list)        # with powers of k removed
    face_basis: list = field(default_factory=list)   # of the faces as they stand
    roots: list = field(default_factory=list)  # nonzero (root, multiplicity)
    variables: tuple = ()
    note: str = ""

    @property
    def excluded(self) -> bool:
        return self.kind in ("VertexFace", "NoNonzeroSolution")


def face_verdict(normal: tuple[int, int], polys: Sequence[SparsePoly],
                 params: Sequence[str] = ("h", "om")) -> FaceVerdict:
    """Decide whether the face system of ``polys`` for ``normal`` has a
    solution with r13, r23 both nonzero."""
    restr = [face_restrict(p, normal) for p in polys]
    faces = [poly_strip(r.poly, NONZERO)[0] for r in restr]
    vf = [i for i, r in enumerate(restr) if r.vertex_face]
    v = FaceVerdict(tuple(normal), "", faces=faces, vertex_faces=vf)
    if vf:
        v.kind = "VertexFace"
        v.note = "a face is a single monomial, which has no root with r13 r23 != 0"
        return v
    raw = [primitive(dehomogenize(r.poly, normal)) for r in restr]
    norm = [poly_strip(f, NONZERO)[0] for f in raw]   # k != 0: drop powers of k
    v.normalized = norm
    used = tuple(p for p in params if any(p in f.variables() for f in raw))
    v.variables = ("k",) + used
    v.basis = buchberger(norm, v.variables, order="lex")
    v.face_basis = buchberger(raw, v.variables, order="lex")
    if is_unit_ideal(v.basis):
        v.kind = "NoNonzeroSolution"
        return v
    uni = [g for g in v.basis if set(g.variables()) <= {"k"} and not g.is_constant()]
    if not uni:
        v.kind = "Unresolved"
        v.note = "basis has no univariate element in k"
        return v
    rr = factor_univariate_rational(uni[0], "k")
    v.roots = rr.nonzero()
    if rr.flagged:
        v.kind = "Unresolved"
        v.note = f"irrational factor {rr.remainder.to_text()} needs review"
        return v
    v.kind = "CandidateRoots" if v.roots else "NoNonzeroSolution"
    return v
