from fractions import Fraction

import pytest
import sympy

from rigidcert.exactpoly import SparsePoly
from rigidcert.solve import (ResourceLimit, buchberger, dehomogenize, face_verdict,
                             factor_univariate_rational, is_unit_ideal, normal_form)

k, r13, r23, x, y, z = (SparsePoly.var(n) for n in ("k", "r13", "r23", "h", "om", "s"))


def _sym(p):
    out = sympy.Integer(0)
    names = p.variables()
    for m, c in p.project(names).items():
        t = sympy.Rational(c.constant_value().numerator, c.constant_value().denominator)
        for n, e in zip(names, m):
            t *= sympy.Symbol(n) ** e
        out += t
    return out


def test_buchberger_examples():
    assert buchberger([k ** 2 + k], ["k"]) == [k ** 2 + k]
    gens = [3 * r13 + r23 ** 3, 12636 * r13 ** 2 + 9828 * r13 * r23 ** 3 + 1915 * r23 ** 6,
            r13 * r23 - 1]
    assert is_unit_ideal(buchberger(gens, ["r13", "r23"]))
    assert buchberger([k, k + 1], ["k"]) == [SparsePoly.const(1)]


@pytest.mark.parametrize("order,sorder", [("lex", "lex"), ("grevlex", "grevlex"), ("deglex", "grlex")])
def test_buchberger_matches_sympy(order, sorder):
    gens = [x ** 2 * y - z + 1, x * y ** 2 - x, y * z - x ** 2 + 3]
    names = ["h", "om", "s"]
    ours = buchberger(gens, names, order=order)
    ref = sympy.groebner([_sym(g) for g in gens], *sympy.symbols(names), order=sorder)
    assert {sympy.expand(_sym(g)) for g in ours} == {sympy.expand(g / sympy.Poly(g, *sympy.symbols(names)).LC(order=sorder)) for g in ref.exprs}


def test_normal_form_and_membership():
    basis = buchberger([x ** 2 - 1, y - x], ["h", "om"], order="lex")
    # h reduces to om, then om^2 to 1
    assert normal_form((x - 1) * (y + 3), basis, ["h", "om"], "lex") == 2 * y - 2
    assert normal_form((x ** 2 - 1) * y, basis, ["h", "om"], "lex").is_zero()


def test_resource_limit():
    gens = [x ** 3 - y * z, y ** 3 - x * z, z ** 3 - x * y, x * y * z - 1]
    with pytest.raises(ResourceLimit):
        buchberger(gens, ["h", "om", "s"], max_basis=3)


def test_unknown_order_rejected():
    with pytest.raises(ValueError):
        buchberger([x], ["h"], order="weird")


def test_factor_examples():
    rr = factor_univariate_rational(k * (1 + k))
    assert rr.roots == [(Fraction(-1), 1), (Fraction(0), 1)] and not rr.flagged
    rr = factor_univariate_rational(k ** 21 * (k - 1) ** 7 * (k + 1) ** 7)
    assert rr.roots == [(Fraction(-1), 7), (Fraction(0), 21), (Fraction(1), 7)]
    assert rr.nonzero() == [(Fraction(-1), 7), (Fraction(1), 7)]
    rr = factor_univariate_rational(k ** 2 + 1)
    assert rr.roots == [] and rr.flagged and rr.remainder == k ** 2 + 1
    with pytest.raises(ValueError):
        factor_univariate_rational(k * x)


def test_dehomogenize_mirrors_for_axis_normal():
    f = r13 ** 2 * r23 + 3 * r23 ** 4
    assert dehomogenize(f, (1, 1)) == k ** 2 + 3
    assert dehomogenize(r13 ** 3 + r13 * r23, (1, 0)) == 1 + k


def test_face_verdict_toys():
    v = face_verdict((1, 1), [r13 - r23, r13 + r23 + r13 ** 2])
    assert v.kind == "NoNonzeroSolution"
    v = face_verdict((1, 1), [r13 + r23 + r13 ** 3, (r13 + r23) * r13])
    assert v.kind == "CandidateRoots" and v.roots == [(Fraction(-1), 1)]
    v = face_verdict((1, 0), [r13 + r23 ** 5, r13 ** 2])
    assert v.kind == "VertexFace" and v.excluded
    v = face_verdict((1, 1), [r13 ** 2 + r23 ** 2 + r13 ** 3])
    assert v.kind == "Unresolved" and "irrational" in v.note


def test_face_verdicts_of_the_minors(minors):
    v = face_verdict((3, 1), minors)
    assert v.kind == "NoNonzeroSolution"
    assert 3 * r13 + r23 ** 3 in v.faces
    v = face_verdict((1, 1), minors)
    assert v.face_basis == [k ** 2 + k] and v.roots == [(Fraction(-1), 1)]
    v = face_verdict((0, 1), minors)
    assert v.face_basis == [k ** 21 * (k - 1) ** 7 * (k + 1) ** 7]
    assert v.roots == [(Fraction(-1), 7), (Fraction(1), 7)]
    for n in ((2, -1), (-1, 2)):
        assert face_verdict(n, minors).kind == "VertexFace"
