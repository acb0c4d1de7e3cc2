import math
from fractions import Fraction

import numpy as np
import pytest

from rigidcert.dynamics import (EQUAL_MASSES, MassParams, conserved_quantities, derivative_cascade,
                                derive_field, lie_derivative)
from rigidcert.exactpoly import RatExpr, SparsePoly
from rigidcert.oracle import inertial_from_jacobi, newton_accelerations

V = SparsePoly.var


def _with_distances(state):
    x1, y1, x2, y2 = (state[k] for k in ("x1", "y1", "x2", "y2"))
    out = dict(state)
    out["r12"] = math.hypot(x1, y1)
    out["r13"] = math.hypot(x2 + x1 / 2, y2 + y1 / 2)
    out["r23"] = math.hypot(x2 - x1 / 2, y2 - y1 / 2)
    return out


def test_equal_mass_parameters():
    m = EQUAL_MASSES
    assert (m.mu1, m.mu2, m.nu1, m.nu2) == (Fraction(1, 2), Fraction(2, 3), Fraction(1, 2), Fraction(1, 2))
    assert MassParams(1, 2, 3).total == 6


def test_position_rates_are_velocities():
    F = derive_field()
    for q, v in (("x1", "u1"), ("y1", "v1"), ("x2", "u2"), ("y2", "v2")):
        assert F[q] == RatExpr(V(v))


def test_field_matches_newtonian_forces_at_equilateral():
    F = derive_field()
    s3 = math.sqrt(3)
    state = {"x1": 1.0, "y1": 0.0, "x2": 0.0, "y2": s3 / 2,
             "u1": 0.0, "v1": 0.0, "u2": 0.0, "v2": 0.0}
    rates = F.evaluate(_with_distances(state))
    q, _ = inertial_from_jacobi(np.array([state[k] for k in
                                          ("x1", "y1", "x2", "y2", "u1", "v1", "u2", "v2")]))
    acc = newton_accelerations(q)
    a1 = acc[1] - acc[0]
    a2 = acc[2] - (acc[0] + acc[1]) / 2
    expect = {"u1": a1[0], "v1": a1[1], "u2": a2[0], "v2": a2[1]}
    for k, val in expect.items():
        assert abs(rates[k] - val) < 1e-12


def test_field_matches_newtonian_forces_generic():
    F = derive_field()
    rng = np.random.default_rng(7)
    for _ in range(5):
        s = dict(zip(("x1", "y1", "x2", "y2", "u1", "v1", "u2", "v2"), rng.normal(size=8)))
        rates = F.evaluate(_with_distances(s))
        q, _ = inertial_from_jacobi(np.array(list(s.values())))
        acc = newton_accelerations(q)
        a1, a2 = acc[1] - acc[0], acc[2] - (acc[0] + acc[1]) / 2
        assert np.allclose([rates["u1"], rates["v1"], rates["u2"], rates["v2"]],
                           [*a1, *a2], rtol=1e-11, atol=1e-11)


def test_collinear_configuration_has_no_transverse_acceleration():
    F = derive_field()
    s = {"x1": 1.0, "y1": 0.0, "x2": 1.3, "y2": 0.0, "u1": 0.2, "v1": 0.0, "u2": -0.1, "v2": 0.0}
    rates = F.evaluate(_with_distances(s))
    assert rates["v1"] == 0 and rates["v2"] == 0


def test_rotation_invariance_of_field():
    F = derive_field()
    rng = np.random.default_rng(3)
    s = dict(zip(("x1", "y1", "x2", "y2", "u1", "v1", "u2", "v2"), rng.normal(size=8)))
    c, sn = math.cos(0.7), math.sin(0.7)

    def rot(a, b):
        return c * a - sn * b, sn * a + c * b

    r = {}
    for px, py in (("x1", "y1"), ("x2", "y2"), ("u1", "v1"), ("u2", "v2")):
        r[px], r[py] = rot(s[px], s[py])
    a, b = F.evaluate(_with_distances(s)), F.evaluate(_with_distances(r))
    for px, py in (("u1", "v1"), ("u2", "v2")):
        ex, ey = rot(a[px], a[py])
        assert abs(ex - b[px]) < 1e-12 and abs(ey - b[py]) < 1e-12


def test_lie_derivative_examples():
    F = derive_field()
    x1, y1, u1, v1 = (V(n) for n in ("x1", "y1", "u1", "v1"))
    f1 = lie_derivative((x1 ** 2 + y1 ** 2) * Fraction(1, 2), F)
    assert f1 == RatExpr(x1 * u1 + y1 * v1)
    f2 = lie_derivative(f1, F)
    assert f2 == RatExpr(u1 ** 2 + v1 ** 2) + RatExpr(x1) * F["u1"] + RatExpr(y1) * F["v1"]
    assert lie_derivative(SparsePoly.const(5), F).is_zero()


def test_cascade_prefix():
    fs = derivative_cascade(2)
    assert fs[0] == RatExpr(V("x1") * V("u1") + V("y1") * V("v1"))
    assert len(derivative_cascade(4)) == 4
    with pytest.raises(ValueError):
        derivative_cascade(0)


def test_conserved_quantities_are_exact_invariants():
    F = derive_field()
    c = conserved_quantities()
    expected = ((V("x1") * V("v1") - V("y1") * V("u1")) * Fraction(1, 2)
                + (V("x2") * V("v2") - V("y2") * V("u2")) * Fraction(2, 3))
    assert c.Omega == expected
    assert lie_derivative(c.Omega, F).is_zero()
    assert lie_derivative(c.H, F).is_zero()
