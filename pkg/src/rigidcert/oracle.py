"""Floating-point cross-checks that do not reuse the symbolic field.

Orbits are integrated from Newton's law in inertial coordinates and mapped
to Jacobi coordinates afterwards.  Relative equilibria are built from the
central-configuration relations lambda = U/I, omega^2 = U*I, h = -U/2, which
hold for every central configuration of a homogeneous degree -1 potential.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import mpmath
import numpy as np
from scipy.integrate import solve_ivp

from .exactpoly import RatExpr, SparsePoly

__all__ = [
    "CollisionApproach", "MissingAssignment", "PhaseState", "Trajectory", "Witness",
    "integrate", "finite_diff_check", "relative_equilibrium_witnesses",
    "eval_poly", "scaled_value", "newton_accelerations", "jacobi_from_inertial",
    "inertial_from_jacobi", "energy", "angular_momentum", "exact_eval", "cc_residual", "StepSweep", "step_sweep", "generic_orbit_state",
]

MASSES = (1.0, 1.0, 1.0)
PHASE = ("x1", "y1", "x2", "y2", "u1", "v1", "u2", "v2")


class CollisionApproach(RuntimeError):
    pass


class MissingAssignment(KeyError):
    pass


PhaseState = dict  # name -> float, over PHASE


# ---------------------------------------------------------------------------
# coordinates

def jacobi_from_inertial(q: np.ndarray, v: np.ndarray, m=MASSES) -> np.ndarray:
    """q, v of shape (3, 2) -> Jacobi state (x1, y1, x2, y2, u1, v1, u2, v2)."""
    m1, m2, _ = m
    z1 = q[1] - q[0]
    z2 = q[2] - (m1 * q[0] + m2 * q[1]) / (m1 + m2)
    w1 = v[1] - v[0]
    w2 = v[2] - (m1 * v[0] + m2 * v[1]) / (m1 + m2)
    return np.concatenate([z1, z2, w1, w2])


def inertial_from_jacobi(state: np.ndarray, m=MASSES) -> tuple[np.ndarray, np.ndarray]:
    """Inverse map with the center of mass at rest at the origin."""
    m1, m2, m3 = m
    M = m1 + m2 + m3
    nu1, nu2 = m1 / (m1 + m2), m2 / (m1 + m2)
    z1, z2, w1, w2 = state[0:2], state[2:4], state[4:6], state[6:8]

    def place(a, b):
        return np.array([-nu2 * a - m3 / M * b, nu1 * a - m3 / M * b, (m1 + m2) / M * b])

    return place(z1, z2), place(w1, w2)


def newton_accelerations(q: np.ndarray, m=MASSES) -> np.ndarray:
    acc = np.zeros_like(q)
    for i in range(3):
        for j in range(3):
            if i != j:
                d = q[j] - q[i]
                acc[i] += m[j] * d / np.linalg.norm(d) ** 3
    return acc


def energy(q: np.ndarray, v: np.ndarray, m=MASSES) -> float:
    kin = 0.5 * sum(m[i] * v[i] @ v[i] for i in range(3))
    pot = sum(m[i] * m[j] / np.linalg.norm(q[i] - q[j]) for i in range(3) for j in range(i + 1, 3))
    return kin - pot


def angular_momentum(q: np.ndarray, v: np.ndarray, m=MASSES) -> float:
    return float(sum(m[i] * (q[i][0] * v[i][1] - q[i][1] * v[i][0]) for i in range(3)))


# ---------------------------------------------------------------------------
# integration

@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray       # (n, 8) Jacobi states
    q: np.ndarray            # (n, 3, 2)
    v: np.ndarray            # (n, 3, 2)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def distances(self) -> np.ndarray:
        q = self.q
        return np.stack([np.linalg.norm(q[:, 1] - q[:, 0], axis=1),
                         np.linalg.norm(q[:, 2] - q[:, 0], axis=1),
                         np.linalg.norm(q[:, 2] - q[:, 1], axis=1)], axis=1)

    def energies(self) -> np.ndarray:
        return np.array([energy(a, b) for a, b in zip(self.q, self.v)])

    def angular_momenta(self) -> np.ndarray:
        return np.array([angular_momentum(a, b) for a, b in zip(self.q, self.v)])


def integrate(state, T: float, tol: float = 1e-12, samples: int = 1001,
              floor: float = 1e-3, m=MASSES) -> Trajectory:
    """Integrate with the 8th-order Dormand-Prince scheme and sample at
    uniform times on [0, T]."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    s0 = np.array([state[k] for k in PHASE], dtype=float) if isinstance(state, Mapping) \
        else np.asarray(state, dtype=float)
    q0, v0 = inertial_from_jacobi(s0, m)
    y0 = np.concatenate([q0.ravel(), v0.ravel()])

    def rhs(_t, y):
        q = y[:6].reshape(3, 2)
        return np.concatenate([y[6:], newton_accelerations(q, m).ravel()])

    def close(_t, y):
        q = y[:6].reshape(3, 2)
        return min(np.linalg.norm(q[i] - q[j]) for i, j in ((0, 1), (0, 2), (1, 2))) - floor
    close.terminal = True

    ts = np.linspace(0.0, T, samples)
    rtol = max(tol, 2.5e-14)
    sol = solve_ivp(rhs, (0.0, T), y0, method="DOP853", t_eval=ts, rtol=rtol,
                    atol=rtol * 1e-2, events=close)
    if sol.status == 1:
        raise CollisionApproach(f"a distance fell below {floor} at t = {sol.t_events[0][0]:.6g}")
    if not sol.success:
        raise RuntimeError(sol.message)
    qs = sol.y[:6].T.reshape(-1, 3, 2)
    vs = sol.y[6:].T.reshape(-1, 3, 2)
    states = np.array([jacobi_from_inertial(a, b, m) for a, b in zip(qs, vs)])
    return Trajectory(sol.t, states, qs, vs)


# central difference stencils of second order for derivatives 1..4
_STENCILS = {
    1: ({-1: -0.5, 1: 0.5}, 1),
    2: ({-1: 1.0, 0: -2.0, 1: 1.0}, 2),
    3: ({-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5}, 3),
    4: ({-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0}, 4),
}


def _central(f: np.ndarray, k: int, stride: int, h: float, idx: np.ndarray) -> np.ndarray:
    weights, p = _STENCILS[k]
    return sum(w * f[idx + o * stride] for o, w in weights.items()) / h ** p


def _symbolic_along(expr: RatExpr, traj: Trajectory, idx: np.ndarray) -> np.ndarray:
    dist = traj.distances()
    out = []
    num = expr.num
    den = expr.den
    for i in idx:
        vals = dict(zip(PHASE, traj.states[i]))
        vals.update(r12=dist[i, 0], r13=dist[i, 1], r23=dist[i, 2])
        out.append(num.evaluate(vals, 0.0, float) / den.evaluate(vals, 0.0, float))
    return np.array(out)


def generic_orbit_state() -> dict:
    """A bounded non-symmetric state: the equilateral rotation, perturbed."""
    s3 = 3 ** 0.5
    q = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, s3 / 2]])
    state = _rigid_state(q, 3 ** 0.5)
    state["u2"] += 0.05
    state["v1"] -= 0.1
    state["y2"] += 0.05
    return state


def finite_diff_check(f_k: RatExpr, traj: Trajectory, k: int, stride: int = 1,
                      points: int = 40) -> float:
    """Max deviation between f_k along the orbit and the Richardson-improved
    k-th central difference of ½ r12(t)², relative to max |f_k|."""
    if not 1 <= k <= 4:
        raise ValueError("k must be between 1 and 4")
    f = 0.5 * traj.distances()[:, 0] ** 2
    h = traj.dt * stride
    reach = 2 * 2 * stride
    n = len(f)
    idx = np.linspace(reach, n - 1 - reach, points).astype(int)
    d1 = _central(f, k, stride, h, idx)
    d2 = _central(f, k, 2 * stride, 2 * h, idx)
    rich = (4.0 * d1 - d2) / 3.0
    sym = _symbolic_along(f_k, traj, idx)
    return float(np.max(np.abs(rich - sym)) / np.max(np.abs(sym)))


@dataclass
class StepSweep:
    k: int
    strides: list
    deviations: list

    @property
    def best(self) -> float:
        return min(self.deviations)

    def converges(self, runs: int = 3, factor: float = 4.0) -> bool:
        """True when the deviation drops by ``factor`` at least ``runs``
        times in a row while the step is halved (truncation regime)."""
        d = self.deviations
        streak = 0
        for a, b in zip(d, d[1:]):
            streak = streak + 1 if a > factor * b else 0
            if streak >= runs:
                return True
        return False


def step_sweep(f_k: RatExpr, traj: Trajectory, k: int,
               strides: Sequence[int] = (256, 128, 64, 32, 16, 8, 4)) -> StepSweep:
    """Deviation of ``finite_diff_check`` for steps halving from coarse to fine."""
    return StepSweep(k, list(strides), [finite_diff_check(f_k, traj, k, s) for s in strides])


# ---------------------------------------------------------------------------
# witnesses

@dataclass
class Witness:
    label: str
    state: dict                      # Jacobi phase state, floats
    r13: Fraction
    r23: Fraction
    h: Fraction
    om2: Fraction                    # omega squared, exact
    om: mpmath.mpf = field(default=None)
    positions: tuple = ()            # inertial positions, exact where rational

    def assignment(self, dps: int = 60) -> dict:
        with mpmath.workdps(dps):
            return {"r13": mpmath.mpf(self.r13.numerator) / self.r13.denominator,
                    "r23": mpmath.mpf(self.r23.numerator) / self.r23.denominator,
                    "h": mpmath.mpf(self.h.numerator) / self.h.denominator,
                    "om": mpmath.sqrt(mpmath.mpf(self.om2.numerator) / self.om2.denominator)}

    def as_json(self) -> dict:
        return {"label": self.label, "r13": str(self.r13), "r23": str(self.r23),
                "h": str(self.h), "omega_squared": str(self.om2),
                "omega": mpmath.nstr(self.om, 30),
                "state": {k: repr(float(v)) for k, v in self.state.items()}}


def _cc_invariants(r: dict, m=(1, 1, 1)) -> tuple[Fraction, Fraction]:
    """U and I = sum m_i m_j r_ij² / M for the distances r12, r13, r23."""
    pairs = {"r12": (0, 1), "r13": (0, 2), "r23": (1, 2)}
    M = sum(m)
    U = sum(Fraction(m[i] * m[j]) / r[k] for k, (i, j) in pairs.items())
    I = sum(Fraction(m[i] * m[j]) * r[k] ** 2 for k, (i, j) in pairs.items()) / M
    return U, I


def _rigid_state(q: np.ndarray, theta_dot: float) -> dict:
    c = q.mean(axis=0)
    q = q - c
    v = theta_dot * np.stack([-q[:, 1], q[:, 0]], axis=1)
    return dict(zip(PHASE, jacobi_from_inertial(q, v)))


def relative_equilibrium_witnesses(dps: int = 60) -> list[Witness]:
    s3 = np.sqrt(3.0)
    shapes = {
        "Lagrange": (np.array([[0.0, 0.0], [1.0, 0.0], [0.5, s3 / 2]]),
                     {"r12": Fraction(1), "r13": Fraction(1), "r23": Fraction(1)}),
        "Euler-3": (np.array([[-0.5, 0.0], [0.5, 0.0], [0.0, 0.0]]),
                    {"r12": Fraction(1), "r13": Fraction(1, 2), "r23": Fraction(1, 2)}),
        "Euler-2": (np.array([[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]),
                    {"r12": Fraction(1), "r13": Fraction(2), "r23": Fraction(1)}),
        "Euler-1": (np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0]]),
                    {"r12": Fraction(1), "r13": Fraction(1), "r23": Fraction(2)}),
    }
    out = []
    for label, (q, r) in shapes.items():
        U, I = _cc_invariants(r)
        lam = U / I
        om2 = U * I
        with mpmath.workdps(dps):
            om = mpmath.sqrt(mpmath.mpf(om2.numerator) / om2.denominator)
        out.append(Witness(label, _rigid_state(q, float(lam) ** 0.5), r["r13"], r["r23"],
                           -U / 2, om2, om, tuple(map(tuple, q))))
    return out


def cc_residual(q: np.ndarray, m=MASSES) -> float:
    """Relative residual of the central-configuration equations."""
    c = sum(m[i] * q[i] for i in range(3)) / sum(m)
    acc = newton_accelerations(q, m)
    d = q - c
    lam = -float(np.sum(acc * d) / np.sum(d * d))
    return float(np.max(np.abs(acc + lam * d)) / np.max(np.abs(acc)))


# ---------------------------------------------------------------------------
# evaluation

def eval_poly(p: SparsePoly, assignment: Mapping[str, object], dps: int = 60):
    """Evaluate p in mpmath arithmetic with at least 50 digits."""
    dps = max(dps, 50)
    missing = [n for n in p.variables() if n not in assignment]
    if missing:
        raise MissingAssignment(missing)
    with mpmath.workdps(dps):
        vals = {k: mpmath.mpf(v) if not isinstance(v, Fraction)
                else mpmath.mpf(v.numerator) / v.denominator for k, v in assignment.items()}
        terms = []
        cache: dict = {}
        for m, c in p.terms():
            t = mpmath.mpf(c.numerator) / c.denominator
            for name, e in zip(_alphabet(), m):
                if e:
                    key = (name, e)
                    if key not in cache:
                        cache[key] = vals[name] ** e
                    t *= cache[key]
            terms.append(t)
        return mpmath.fsum(terms)


def scaled_value(p: SparsePoly, assignment: Mapping[str, object], dps: int = 60):
    """|p| divided by the sum of absolute term values at the point."""
    dps = max(dps, 50)
    with mpmath.workdps(dps):
        val = eval_poly(p, assignment, dps)
        absp = SparsePoly.from_terms([(m, abs(c)) for m, c in p.terms()])
        absvals = {k: abs(mpmath.mpf(v) if not isinstance(v, Fraction)
                          else mpmath.mpf(v.numerator) / v.denominator)
                   for k, v in assignment.items()}
        scale = eval_poly(absp, absvals, dps)
        return abs(val) / scale if scale else abs(val)


def exact_eval(p: SparsePoly, values: Mapping[str, Fraction], om2: Fraction | None = None) -> Fraction:
    """Exact value at rational data; om may enter through even powers only,
    in which case om² is supplied."""
    if om2 is not None and "om" in p.variables():
        parts = p.coefficients_in("om")
        if any(e % 2 for e in parts):
            raise ValueError("odd power of om")
        p = sum((c * om2 ** (e // 2) for e, c in parts.items()), SparsePoly())
    return p.subs(dict(values)).constant_value()


def _alphabet():
    from .exactpoly import ALPHABET
    return ALPHABET
