"""Exact sparse multivariate polynomials over the rationals.

Polynomials live in a single fixed ring whose variables are listed in
``ALPHABET``.  The heavy lifting is delegated to python-flint; this module adds
the operations the pipeline needs on top of it: substitution of rational
expressions, fraction-free determinants, content/monomial stripping, exact
division by known factors and a canonical text format.
"""
from __future__ import annotations

import hashlib
import re
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Callable, Iterable, Mapping, Sequence

import flint

__all__ = [
    "ALPHABET", "SparsePoly", "RatExpr", "ZeroPolynomial", "NotDivisible",
    "ParseError", "poly_arith", "poly_diff", "poly_subst", "poly_det_ff",
    "poly_strip", "strip_known_factors", "parse_poly", "format_poly",
]

PHASE = ("x1", "y1", "x2", "y2", "u1", "v1", "u2", "v2")
DISTANCES = ("r12", "r13", "r23")
AUX = ("w13", "w23", "h", "om", "Y", "s", "u", "k")
SERIES = tuple(f"a{i}" for i in range(2, 21))
ALPHABET: tuple[str, ...] = PHASE + DISTANCES + AUX + SERIES
INDEX = {name: i for i, name in enumerate(ALPHABET)}
NVARS = len(ALPHABET)

_CTX = flint.fmpq_mpoly_ctx.get(ALPHABET, "deglex")


class ZeroPolynomial(ValueError):
    """Raised when an operation needs a nonzero polynomial and gets zero."""


class NotDivisible(ArithmeticError):
    pass


class ParseError(ValueError):
    pass


def _frac(q) -> Fraction:
    q = flint.fmpq(q)
    return Fraction(int(q.p), int(q.q))


def _fmpq(c) -> flint.fmpq:
    if isinstance(c, Fraction):
        return flint.fmpq(c.numerator, c.denominator)
    return flint.fmpq(c)


def _exp_vector(exp) -> tuple[int, ...]:
    if isinstance(exp, Mapping):
        v = [0] * NVARS
        for name, e in exp.items():
            if e < 0:
                raise ValueError("negative exponent")
            v[INDEX[name]] += int(e)
        return tuple(v)
    exp = tuple(int(e) for e in exp)
    if len(exp) != NVARS:
        raise ValueError(f"exponent vector must have length {NVARS}")
    return exp


class SparsePoly:
    """Immutable polynomial with rational coefficients.

    Terms are kept by flint in graded lexicographic order (variables compared
    in ``ALPHABET`` order), which is also the order of the text format.
    """

    __slots__ = ("_p", "_hash")

    def __init__(self, raw=None):
        if raw is None:
            raw = _CTX.from_dict({})
        elif not isinstance(raw, flint.fmpq_mpoly):
            raw = _CTX.constant(_fmpq(raw))
        self._p = raw
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def var(cls, name: str) -> "SparsePoly":
        return cls(_CTX.gens()[INDEX[name]])

    @classmethod
    def const(cls, c) -> "SparsePoly":
        return cls(_CTX.constant(_fmpq(c)))

    @classmethod
    def from_terms(cls, terms) -> "SparsePoly":
        """Build from ``{exponent: coefficient}``; exponents are full-length
        tuples or ``{name: power}`` mappings."""
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[tuple[int, ...], Fraction] = {}
        for exp, c in items:
            key = _exp_vector(exp)
            acc[key] = acc.get(key, Fraction(0)) + Fraction(c)
        return cls(_CTX.from_dict({k: _fmpq(c) for k, c in acc.items() if c}))

    @classmethod
    def monomial(cls, exp, coeff=1) -> "SparsePoly":
        return cls(_CTX.term(_fmpq(coeff), _exp_vector(exp)))

    # inspection -------------------------------------------------------
    @property
    def raw(self) -> flint.fmpq_mpoly:
        return self._p

    def is_zero(self) -> bool:
        return self._p.is_zero()

    def is_constant(self) -> bool:
        return self._p.is_constant()

    def __len__(self) -> int:
        return len(self._p)

    def terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Terms as (exponent tuple, Fraction), leading term first."""
        return [(tuple(int(e) for e in m), _frac(c))
                for m, c in zip(self._p.monoms(), self._p.coeffs())]

    def monoms(self) -> list[tuple[int, ...]]:
        return [tuple(int(e) for e in m) for m in self._p.monoms()]

    def coeffs(self) -> list[Fraction]:
        return [_frac(c) for c in self._p.coeffs()]

    def variables(self) -> tuple[str, ...]:
        degs = self._p.degrees()
        return tuple(n for n, d in zip(ALPHABET, degs) if int(d) > 0)

    def degree(self, name: str | None = None) -> int:
        if self.is_zero():
            return -1
        if name is None:
            return max(sum(m) for m in self.monoms())
        return int(self._p.degrees()[INDEX[name]])

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return Fraction(0) if self.is_zero() else self.coeffs()[0]

    def leading_coefficient(self) -> Fraction:
        if self.is_zero():
            raise ZeroPolynomial("zero polynomial has no leading coefficient")
        return _frac(self._p.leading_coefficient())

    def coefficients_in(self, name: str) -> dict[int, "SparsePoly"]:
        """Split as sum of ``c_e * name**e`` with ``c_e`` free of ``name``."""
        i = INDEX[name]
        parts: dict[int, dict] = {}
        for m, c in zip(self._p.monoms(), self._p.coeffs()):
            m = [int(e) for e in m]
            e = m[i]
            m[i] = 0
            parts.setdefault(e, {})[tuple(m)] = c
        return {e: SparsePoly(_CTX.from_dict(d)) for e, d in parts.items()}

    def coefficient_in(self, name: str, e: int) -> "SparsePoly":
        return self.coefficients_in(name).get(e, SparsePoly())

    def project(self, names: Sequence[str]) -> dict[tuple[int, ...], "SparsePoly"]:
        """Group terms by their exponents in ``names``; values are the
        coefficient polynomials in the remaining variables."""
        idx = [INDEX[n] for n in names]
        parts: dict[tuple[int, ...], dict] = {}
        for m, c in zip(self._p.monoms(), self._p.coeffs()):
            m = [int(e) for e in m]
            key = tuple(m[i] for i in idx)
            for i in idx:
                m[i] = 0
            parts.setdefault(key, {})[tuple(m)] = c
        return {k: SparsePoly(_CTX.from_dict(d)) for k, d in parts.items()}

    # arithmetic -------------------------------------------------------
    @staticmethod
    def _lift(other):
        if isinstance(other, SparsePoly):
            return other._p
        if isinstance(other, (int, Fraction)):
            return _CTX.constant(_fmpq(other))
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        return NotImplemented if o is NotImplemented else SparsePoly(self._p + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return NotImplemented if o is NotImplemented else SparsePoly(self._p - o)

    def __rsub__(self, other):
        o = self._lift(other)
        return NotImplemented if o is NotImplemented else SparsePoly(o - self._p)

    def __mul__(self, other):
        o = self._lift(other)
        return NotImplemented if o is NotImplemented else SparsePoly(self._p * o)

    __rmul__ = __mul__

    def __neg__(self):
        return SparsePoly(-self._p)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        return SparsePoly(self._p ** n)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError
            return SparsePoly(self._p / _fmpq(other))
        if isinstance(other, SparsePoly):
            return self.exact_div(other)
        return NotImplemented

    def exact_div(self, other: "SparsePoly") -> "SparsePoly":
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        q, r = divmod(self._p, other._p)
        if not r.is_zero():
            raise NotDivisible("polynomial division is not exact")
        return SparsePoly(q)

    def divides(self, other: "SparsePoly") -> bool:
        """True when self divides other."""
        if self.is_zero():
            return other.is_zero()
        return divmod(other._p, self._p)[1].is_zero()

    def __eq__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self._p == o

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(format_poly(self))
        return self._hash

    def __bool__(self):
        return not self._p.is_zero()

    # calculus and substitution ---------------------------------------
    def diff(self, name: str) -> "SparsePoly":
        return SparsePoly(self._p.derivative(INDEX[name]))

    def subs(self, values: Mapping[str, object]) -> "SparsePoly":
        """Substitute rational constants for variables."""
        return SparsePoly(self._p.subs({k: _fmpq(v) for k, v in values.items()}))

    def compose(self, values: Mapping[str, "SparsePoly"]) -> "SparsePoly":
        """Substitute polynomials for variables simultaneously."""
        gens = _CTX.gens()
        args = [values[n]._p if n in values else gens[i]
                for i, n in enumerate(ALPHABET)]
        return SparsePoly(self._p.compose(*args))

    def rename(self, mapping: Mapping[str, str]) -> "SparsePoly":
        return self.compose({a: SparsePoly.var(b) for a, b in mapping.items()})

    def evaluate(self, values: Mapping[str, object], zero=0, convert: Callable | None = None):
        """Evaluate numerically with cached powers.  ``convert`` maps each
        Fraction coefficient into the numeric type (default: leave as is)."""
        conv = convert or (lambda c: c)
        names = self.variables()
        missing = [n for n in names if n not in values]
        if missing:
            raise KeyError(f"no value for {missing}")
        cache: dict[tuple[int, int], object] = {}
        total = zero
        for m, c in self.terms():
            t = conv(c)
            for i, e in enumerate(m):
                if e:
                    key = (i, e)
                    if key not in cache:
                        cache[key] = values[ALPHABET[i]] ** e
                    t = t * cache[key]
            total = total + t
        return total

    def factor(self) -> tuple[Fraction, list[tuple["SparsePoly", int]]]:
        c, fs = self._p.factor()
        return _frac(c), [(SparsePoly(f), int(e)) for f, e in fs]

    def gcd(self, other: "SparsePoly") -> "SparsePoly":
        return SparsePoly(self._p.gcd(other._p))

    def to_text(self) -> str:
        return format_poly(self)

    def __reduce__(self):
        items = [(tuple(int(e) for e in m), int(c.p), int(c.q))
                 for m, c in zip(self._p.monoms(), self._p.coeffs())]
        return (_unpickle, (items,))

    def digest(self) -> str:
        return hashlib.sha256(format_poly(self).encode()).hexdigest()

    def __repr__(self):
        text = format_poly(self)
        if len(text) > 120:
            text = text[:117] + "..."
        return f"SparsePoly({text})"

    def __str__(self):
        return format_poly(self)


def _unpickle(items) -> SparsePoly:
    return SparsePoly(_CTX.from_dict({m: flint.fmpq(p, q) for m, p, q in items}))


# ---------------------------------------------------------------------------
# text format

def _format_coeff(c: Fraction) -> str:
    sign = "-" if c < 0 else "+"
    a = abs(c)
    return sign + (str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}")


def format_poly(p: SparsePoly) -> str:
    """Canonical text: signed rational coefficient then ``var^e`` factors,
    terms in graded lexicographic order, zero written as ``0``."""
    if p.is_zero():
        return "0"
    out = []
    for m, c in p.terms():
        factors = []
        for i, e in enumerate(m):
            if e == 1:
                factors.append(ALPHABET[i])
            elif e > 1:
                factors.append(f"{ALPHABET[i]}^{e}")
        out.append(" ".join([_format_coeff(c)] + factors))
    return " ".join(out)


_TERM_RE = re.compile(r"([+-])\s*(\d+)?(?:/(\d+))?((?:\s*[A-Za-z][A-Za-z0-9]*(?:\^\d+)?)*)")
_FACTOR_RE = re.compile(r"([A-Za-z][A-Za-z0-9]*)(?:\^(\d+))?")


def parse_poly(text: str) -> SparsePoly:
    """Inverse of :func:`format_poly`.  Accepts any term order and repeated
    monomials; rejects anything outside the format."""
    text = text.strip()
    if text == "0":
        return SparsePoly()
    if not text:
        raise ParseError("empty polynomial text")
    if text[0] not in "+-":
        text = "+" + text
    pos = 0
    acc: dict[tuple[int, ...], Fraction] = {}
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"cannot parse term at offset {pos}: {text[pos:pos + 30]!r}")
        sign, num, den, facs = m.groups()
        if num is None and (den is not None or not facs.strip()):
            raise ParseError(f"malformed term at offset {pos}")
        num = num or "1"
        if den is not None and int(den) == 0:
            raise ParseError("zero denominator")
        c = Fraction(int(num), int(den) if den else 1)
        if sign == "-":
            c = -c
        exp = [0] * NVARS
        for fm in _FACTOR_RE.finditer(facs):
            name, e = fm.group(1), fm.group(2)
            if name not in INDEX:
                raise ParseError(f"unknown variable {name!r}")
            exp[INDEX[name]] += int(e) if e else 1
        key = tuple(exp)
        acc[key] = acc.get(key, Fraction(0)) + c
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return SparsePoly.from_terms({k: v for k, v in acc.items() if v})


# ---------------------------------------------------------------------------
# free functions

def poly_arith(p: SparsePoly, q, op: str) -> SparsePoly:
    if op in ("add", "+"):
        return p + q
    if op in ("sub", "-"):
        return p - q
    if op in ("mul", "*"):
        return p * q
    if op in ("pow", "^"):
        return p ** int(q)
    raise ValueError(f"unknown operator {op!r}")


def poly_diff(p: SparsePoly, name: str) -> SparsePoly:
    return p.diff(name)


def poly_strip(p: SparsePoly, variables: Sequence[str] | None = None
               ) -> tuple[SparsePoly, Fraction, SparsePoly]:
    """Return ``(stripped, content, monomial)`` with
    ``p == content * monomial * stripped``; the stripped part has coprime
    integer coefficients, a positive leading coefficient and no variable
    dividing every term.  With ``variables`` given, only powers of those
    variables are removed."""
    if p.is_zero():
        raise ZeroPolynomial("cannot strip the zero polynomial")
    terms = p.terms()
    low = [min(col) for col in zip(*(m for m, _ in terms))]
    if variables is not None:
        keep = {INDEX[v] for v in variables}
        low = [e if i in keep else 0 for i, e in enumerate(low)]
    mono = SparsePoly.monomial(low)
    num = reduce(gcd, (abs(c.numerator) for _, c in terms))
    den = reduce(lcm, (c.denominator for _, c in terms))
    content = Fraction(num, den)
    if terms[0][1] < 0:
        content = -content
    shifted = {tuple(a - b for a, b in zip(m, low)): c / content for m, c in terms}
    return SparsePoly.from_terms(shifted), content, mono


def primitive(p: SparsePoly) -> SparsePoly:
    """Content-free, sign-normalized part (keeps monomial factors)."""
    return p if p.is_zero() else poly_strip(p, ())[0]


def strip_known_factors(p: SparsePoly, factors: Iterable[tuple[str, SparsePoly]],
                        variables: Sequence[str] | None = None
                        ) -> tuple[SparsePoly, dict[str, int], Fraction, SparsePoly]:
    """Divide out every listed factor as often as it divides exactly, then
    strip content and monomial.  Returns ``(core, multiplicities, content,
    monomial)``."""
    if p.is_zero():
        raise ZeroPolynomial("cannot strip the zero polynomial")
    removed: dict[str, int] = {}
    cur = p
    for label, f in factors:
        n = 0
        while True:
            q, r = divmod(cur.raw, f.raw)
            if not r.is_zero():
                break
            cur = SparsePoly(q)
            n += 1
        if n:
            removed[label] = n
    core, content, mono = poly_strip(cur, variables)
    return core, removed, content, mono


def _is_term(p: SparsePoly) -> bool:
    return len(p) == 1


def _monomial_gcd(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(min(x, y) for x, y in zip(a, b))


class RatExpr:
    """Quotient of two polynomials, kept with the denominator's content moved
    into the numerator and common monomial factors cancelled."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _normalize=True):
        num = num if isinstance(num, SparsePoly) else SparsePoly.const(num)
        den = SparsePoly.const(1) if den is None else (
            den if isinstance(den, SparsePoly) else SparsePoly.const(den))
        if den.is_zero():
            raise ZeroDivisionError("rational expression with zero denominator")
        self.num, self.den = num, den
        if _normalize:
            self._normalize()

    def _normalize(self):
        if self.num.is_zero():
            self.den = SparsePoly.const(1)
            return
        d, c, dm = poly_strip(self.den)
        n = self.num / c
        nt = n.terms()
        low_n = [min(col) for col in zip(*(m for m, _ in nt))]
        dmono = dm.monoms()[0]
        common = _monomial_gcd(low_n, dmono)
        if any(common):
            cm = SparsePoly.monomial(common)
            n = n.exact_div(cm)
            dm = dm.exact_div(cm)
        self.num, self.den = n, d * dm

    @classmethod
    def lift(cls, x) -> "RatExpr":
        if isinstance(x, RatExpr):
            return x
        return cls(x)

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_poly(self) -> SparsePoly:
        if not self.den.is_constant():
            raise ValueError("expression has a nonconstant denominator")
        return self.num / self.den.constant_value()

    def __add__(self, other):
        o = RatExpr.lift(other)
        if self.den == o.den:
            return RatExpr(self.num + o.num, self.den)
        if _is_term(self.den) and _is_term(o.den):
            a, b = self.den.monoms()[0], o.den.monoms()[0]
            l = SparsePoly.monomial(tuple(max(x, y) for x, y in zip(a, b)))
            ca, cb = self.den.coeffs()[0], o.den.coeffs()[0]
            return RatExpr(self.num * l.exact_div(SparsePoly.monomial(a)) / ca
                           + o.num * l.exact_div(SparsePoly.monomial(b)) / cb, l)
        return RatExpr(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatExpr(-self.num, self.den, _normalize=False)

    def __sub__(self, other):
        return self + (-RatExpr.lift(other))

    def __rsub__(self, other):
        return RatExpr.lift(other) - self

    def __mul__(self, other):
        o = RatExpr.lift(other)
        return RatExpr(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = RatExpr.lift(other)
        if o.num.is_zero():
            raise ZeroDivisionError("division by a zero expression")
        return RatExpr(self.num * o.den, self.den * o.num)

    def __pow__(self, n: int):
        if n < 0:
            return RatExpr(self.den ** (-n), self.num ** (-n))
        return RatExpr(self.num ** n, self.den ** n, _normalize=False)

    def diff(self, name: str) -> "RatExpr":
        return RatExpr(self.num.diff(name) * self.den - self.num * self.den.diff(name),
                       self.den ** 2)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def evaluate(self, values, zero=0, convert=None):
        return (self.num.evaluate(values, zero, convert)
                / self.den.evaluate(values, zero, convert))

    def __eq__(self, other):
        o = RatExpr.lift(other) if isinstance(other, (int, Fraction, SparsePoly)) else other
        if not isinstance(o, RatExpr):
            return NotImplemented
        return (self.num * o.den - o.num * self.den).is_zero()

    __hash__ = None

    def __repr__(self):
        return f"RatExpr({self.num!r} / {self.den!r})"


def poly_subst(p, name: str, value) -> RatExpr:
    """Substitute a polynomial or rational expression for one variable.

    The result's denominator is a power of the value's denominator."""
    value = RatExpr.lift(value)
    if isinstance(p, RatExpr):
        return poly_subst(p.num, name, value) / poly_subst(p.den, name, value)
    if value.is_polynomial():
        return RatExpr(p.compose({name: value.as_poly()}))
    parts = p.coefficients_in(name)
    top = max(parts)
    num_pows = [SparsePoly.const(1)]
    den_pows = [SparsePoly.const(1)]
    for _ in range(top):
        num_pows.append(num_pows[-1] * value.num)
        den_pows.append(den_pows[-1] * value.den)
    total = SparsePoly()
    for e, c in parts.items():
        total = total + c * num_pows[e] * den_pows[top - e]
    return RatExpr(total, den_pows[top])


def poly_det_ff(matrix: Sequence[Sequence[SparsePoly]], method: str = "laplace",
                memo: dict | None = None) -> SparsePoly:
    """Exact determinant of a square polynomial matrix.

    ``laplace`` expands along the first row and memoizes sub-minors keyed by
    (rows, columns), so determinants of overlapping submatrices can share
    work through ``memo``.  ``bareiss`` is the fraction-free elimination."""
    n = len(matrix)
    if any(len(r) != n for r in matrix):
        raise ValueError("matrix is not square")
    if n == 0:
        return SparsePoly.const(1)
    if not all(isinstance(x, SparsePoly) for r in matrix for x in r):
        matrix = [r if all(isinstance(x, SparsePoly) for x in r)
                  else [x if isinstance(x, SparsePoly) else SparsePoly.const(x) for x in r]
                  for r in matrix]
    if method == "bareiss":
        return _bareiss(matrix)
    if method != "laplace":
        raise ValueError(f"unknown determinant method {method!r}")
    if memo is None:
        memo = {}
    # rows are identified by object identity so that callers building several
    # matrices from the same row objects share memoized sub-minors
    return _laplace(matrix, tuple(range(n)), tuple(range(n)), memo, id)


def _laplace(M, rows, cols, memo, key_of):
    key = (tuple(key_of(M[r]) for r in rows), cols)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if len(rows) == 1:
        res = M[rows[0]][cols[0]]
    else:
        res = SparsePoly()
        r0, rest = rows[0], rows[1:]
        for j, c in enumerate(cols):
            entry = M[r0][c]
            if entry.is_zero():
                continue
            sub = _laplace(M, rest, cols[:j] + cols[j + 1:], memo, key_of)
            term = entry * sub
            res = res - term if j % 2 else res + term
    memo[key] = res
    return res


def _bareiss(matrix):
    A = [list(r) for r in matrix]
    n = len(A)
    sign = 1
    prev = SparsePoly.const(1)
    for k in range(n - 1):
        if A[k][k].is_zero():
            piv = next((i for i in range(k + 1, n) if not A[i][k].is_zero()), None)
            if piv is None:
                return SparsePoly()
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]).exact_div(prev)
        prev = A[k][k]
    return A[n - 1][n - 1] * sign
