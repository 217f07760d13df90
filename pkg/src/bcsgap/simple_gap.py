"""Constant-potential gap curves: the envelopes of every general solution.

For a constant coupling U the gap equation collapses to a scalar equation for
Delta(T).  The two couplings u1 < u2 give the lower/upper envelopes Delta_1,
Delta_2 that sandwich the full solution, the vanishing temperatures tau_1 <
tau_2 bracket the transition, and the crossing temperature tau_0 (where
Delta_1 equals 2*z0*T) fixes the small-temperature regime boundary
tau_3 = tau_0 / 2 used by the contraction diagnostics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, NumericalError
from .model import PhysicalParams
from .quadrature import integrate
from .rootfind import grow_bracket_up, solve_bracketed

_QUAD_TOL = 1e-13


@lru_cache(maxsize=None)
def solve_z0() -> float:
    """Unique positive root of 2/z = tanh z (about 2.0653)."""
    return solve_bracketed(lambda z: 2.0 / z - math.tanh(z), 1.5, 2.5,
                           rtol=1e-15)


def gap_rhs(u_const: float, t: float, delta: float, params: PhysicalParams,
            tol: float = _QUAD_TOL) -> float:
    """Right side of the constant-coupling gap equation at (T, Delta)."""
    if t == 0.0:
        def f(xi):
            return 1.0 / np.hypot(xi, delta)
    else:
        def f(xi):
            e = np.hypot(xi, delta)
            return np.tanh(e / (2.0 * t)) / e
    return u_const * integrate(f, params.epsilon, params.hbar_omega_d, tol).value


def delta_at_zero(u_const: float, params: PhysicalParams) -> float:
    """Closed-form zero-temperature gap for a constant coupling."""
    eps, om = params.epsilon, params.hbar_omega_d
    a = math.exp(1.0 / u_const)
    rad = (om - eps * a) * (om - eps / a)
    if rad <= 0.0:
        raise ConfigError("cutoff too large for this coupling")
    return math.sqrt(rad) / math.sinh(1.0 / u_const)


@lru_cache(maxsize=None)
def solve_tau(u_const: float, params: PhysicalParams) -> float:
    """Temperature where the constant-coupling gap vanishes."""
    eps, om = params.epsilon, params.hbar_omega_d
    if u_const * math.log(om / eps) <= 1.0:
        raise NumericalError("no transition for this coupling/cutoff")

    def f(t):
        return gap_rhs(u_const, t, 0.0, params) - 1.0

    lo = 1e-8 * om
    for _ in range(80):
        if f(lo) > 0.0:
            break
        lo *= 0.5
    else:
        raise NumericalError("no transition for this coupling/cutoff")
    lo, hi = grow_bracket_up(f, lo, max(om, 4.0 * lo))
    return solve_bracketed(f, lo, hi, rtol=1e-12)


def solve_simple_gap(t: float, u_const: float, params: PhysicalParams) -> float:
    """Gap Delta(T) for a constant coupling; exactly 0 at and above tau."""
    if t < 0:
        raise ConfigError("temperature must be nonnegative")
    tau = solve_tau(u_const, params)
    if t >= tau:
        return 0.0

    def f(delta):
        return gap_rhs(u_const, t, delta, params) - 1.0

    lo, hi = grow_bracket_up(f, 0.0, 10.0 * params.hbar_omega_d)
    return solve_bracketed(f, lo, hi, rtol=1e-12,
                           atol=1e-15 * params.hbar_omega_d)


@lru_cache(maxsize=None)
def solve_tau0(params: PhysicalParams) -> float:
    """Temperature where Delta_1 crosses 2*z0*T (inside (0, tau_1))."""
    z0 = solve_z0()
    tau1 = solve_tau(params.u1, params)

    def h(t):
        return solve_simple_gap(t, params.u1, params) - 2.0 * z0 * t

    return solve_bracketed(h, 1e-6 * tau1, tau1 * (1.0 - 1e-12), rtol=1e-12)


def tau3(params: PhysicalParams) -> float:
    """Small-temperature regime boundary, fixed as half of tau_0."""
    return 0.5 * solve_tau0(params)


@dataclass
class SimpleGapCurve:
    coupling: float
    tau: float
    t: np.ndarray
    delta: np.ndarray
    residual: np.ndarray

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.delta.tolist()))


def build_simple_gap_curve(u_const: float, params: PhysicalParams,
                           t_points: int, t_max: float | None = None) -> SimpleGapCurve:
    """Sample Delta(T) on a uniform grid, recording the equation residual."""
    tau = solve_tau(u_const, params)
    if t_max is None:
        t_max = 1.05 * tau
    ts = np.linspace(0.0, t_max, t_points)
    deltas = np.empty_like(ts)
    resid = np.empty_like(ts)
    for i, t in enumerate(ts):
        d = solve_simple_gap(float(t), u_const, params)
        deltas[i] = d
        resid[i] = 0.0 if d == 0.0 else abs(gap_rhs(u_const, float(t), d, params) - 1.0)
    return SimpleGapCurve(u_const, tau, ts, deltas, resid)
