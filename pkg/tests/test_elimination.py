import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import brentq

from rigidcert.dynamics import conserved_quantities, derivative_cascade
from rigidcert.elimination import (KNOWN_FACTORS, LinearVelocityTerm, apply_normalization,
                                   build_g_system, build_geometry, decompose_quadratic, solve_y2)
from rigidcert.exactpoly import RatExpr, SparsePoly

V = SparsePoly.var
r13, r23, w13, w23 = (V(n) for n in ("r13", "r23", "w13", "w23"))


@pytest.fixture(scope="module")
def gsys():
    return build_g_system()


@pytest.fixture(scope="module")
def geo():
    return build_geometry()


def test_normalization_examples():
    f1 = derivative_cascade(1)[0]
    assert apply_normalization(f1).is_zero()
    assert apply_normalization(conserved_quantities().Omega) == RatExpr(V("om"))
    assert apply_normalization(V("r12") ** 3) == RatExpr(SparsePoly.const(1))


def test_x2_and_y2_squared(geo):
    assert geo.x2 == (r13 ** 2 - r23 ** 2) * Fraction(1, 2)
    x2 = geo.x2
    assert geo.Y == r13 ** 2 - (x2 + Fraction(1, 2)) ** 2
    heron = (r13 + r23 + 1) * (r13 + r23 - 1) * (r13 - r23 + 1) * (r23 - r13 + 1) * Fraction(1, 4)
    assert geo.Y == heron
    printed = (r13 + r23 + 1) * (r13 + r23 - 1) * (r13 - r23 + 1) * (r23 - r13 - 1) * Fraction(1, 4)
    assert geo.Y != printed


def _normalized_point(rng):
    x2, y2, u2, v2, om = rng.uniform(-1, 1, 5)
    y2 = abs(y2) + 0.3
    v1 = (om - 2 / 3 * (x2 * v2 - y2 * u2)) * 2
    ra = math.hypot(x2 + 0.5, y2)
    rb = math.hypot(x2 - 0.5, y2)
    wa = ((x2 + 0.5) * u2 + y2 * (v2 + v1 / 2)) / ra
    wb = ((x2 - 0.5) * u2 + y2 * (v2 - v1 / 2)) / rb
    return {"x2": x2, "y2": y2, "u2": u2, "v2": v2, "om": om, "v1": v1,
            "r13": ra, "r23": rb, "w13": wa, "w23": wb}


def test_solved_velocities_reproduce_state(geo):
    rng = np.random.default_rng(11)
    for _ in range(5):
        p = _normalized_point(rng)
        u2 = geo.u2.evaluate(p, convert=float)
        v2 = geo.v2.evaluate(p, convert=float)
        assert abs(u2 - p["u2"]) < 1e-12 and abs(v2 - p["v2"]) < 1e-12
        # the relation without v1 holds only up to the y2 v1 term
        assert abs(p["r13"] * p["w13"] - p["r23"] * p["w23"] - (p["u2"] + p["y2"] * p["v1"])) < 1e-12


def test_f3_reduction_shape(gsys):
    assert len(gsys.c1) == 2 and len(gsys.c0) == 14
    assert not {"w13", "w23"} & set(gsys.c1.variables())
    assert gsys.c1 == 24 * V("om") * (r13 ** 4 * r23 - r13 * r23 ** 4)


def test_y2_solution_back_substitutes(gsys):
    y2 = solve_y2(gsys.reduced["f3"], gsys.Y)
    back = RatExpr(gsys.c0) + RatExpr(gsys.c1) * y2
    assert back.is_zero()


def _f3_root_states(count=4, seed=2):
    """Normalized states (x1 = 1, y1 = u1 = 0, so f1 = 0) with y2 chosen by
    root finding so that f3 vanishes."""
    f3 = derivative_cascade(3)[2]
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        x2, u2, v2, v1 = rng.uniform(-1, 1, 4)
        base = {"x1": 1.0, "y1": 0.0, "u1": 0.0, "v1": v1, "x2": x2, "u2": u2, "v2": v2}

        def state(y2):
            d = dict(base, y2=y2, r12=1.0)
            d["r13"] = math.hypot(x2 + 0.5, y2)
            d["r23"] = math.hypot(x2 - 0.5, y2)
            return d

        grid = np.linspace(0.2, 2.0, 60)
        vals = [f3.evaluate(state(y), convert=float) for y in grid]
        for i in range(len(grid) - 1):
            if vals[i] * vals[i + 1] < 0:
                y2 = brentq(lambda y: f3.evaluate(state(y), convert=float), grid[i], grid[i + 1],
                            xtol=1e-15)
                out.append(state(y2))
                break
    return out


def test_solved_y2_matches_state_where_f3_vanishes(gsys):
    for s in _f3_root_states():
        om = 0.5 * s["v1"] + 2 / 3 * (s["x2"] * s["v2"] - s["y2"] * s["u2"])
        point = {"r13": s["r13"], "r23": s["r23"], "om": om,
                 "w13": ((s["x2"] + 0.5) * s["u2"] + s["y2"] * (s["v2"] + s["v1"] / 2)) / s["r13"],
                 "w23": ((s["x2"] - 0.5) * s["u2"] + s["y2"] * (s["v2"] - s["v1"] / 2)) / s["r23"]}
        y2 = gsys.y2.evaluate(point, convert=float)
        assert abs(y2 - s["y2"]) < 1e-9 * max(1, abs(s["y2"]))


def test_g_sizes_and_quadratic_structure(gsys):
    assert [len(g) for g in gsys.g] == [128, 414, 64, 97]
    for g in gsys.g:
        form = decompose_quadratic(g)
        assert form.reassemble() == g
        assert all((i + j) % 2 == 0 for i, j in g.project(("w13", "w23")))


def test_rationalized_y2_form_breaks_quadratic_structure():
    gs = build_g_system(y2_form="rationalized")
    with pytest.raises(LinearVelocityTerm):
        for g in gs.g:
            decompose_quadratic(g)


def test_decompose_examples():
    f = decompose_quadratic(5 + r13 * w13 ** 2)
    assert f.coeffs() == (SparsePoly.const(5), r13, SparsePoly(), SparsePoly())
    f = decompose_quadratic(r23 * w13 * w23 + w23 ** 2)
    assert f.coeffs() == (SparsePoly(), SparsePoly(), r23, SparsePoly.const(1))
    with pytest.raises(LinearVelocityTerm):
        decompose_quadratic(w13 * r13)


def test_g4_vanishes_at_equilateral_rest(gsys):
    g4 = gsys.g[3]
    a0 = decompose_quadratic(g4).a0
    parts = a0.coefficients_in("om")
    val = sum(c.subs({"r13": 1, "r23": 1, "h": Fraction(-3, 2)}).constant_value() * Fraction(3) ** (e // 2)
              for e, c in parts.items())
    assert val == 0


def test_catalog_factors_have_stated_sign():
    rng = np.random.default_rng(5)
    for _ in range(200):
        a, b = rng.uniform(0.05, 3, 2)
        for label, f, why in KNOWN_FACTORS:
            if why.startswith("positive"):
                assert f.evaluate({"r13": a, "r23": b, "om": 1.0}, convert=float) > 0, label
