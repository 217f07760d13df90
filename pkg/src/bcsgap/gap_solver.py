"""Discretized gap operator, Picard fixed-point solver, sweeps and T_c.

The unknown u(T, .) lives on an EnergyGrid; between nodes it is extended by
monotone piecewise-cubic interpolation, and the operator integral is taken
with a per-interval 7-point Gauss rule whose panels coincide with the grid
intervals (exact for the interpolant, spectrally accurate for the smooth
factors).  The kernel-times-weights matrix is precomputed once per
(kernel, grid), so one operator application is a slope rebuild, a Horner
evaluation and a matrix-vector product.

Convergence accounting: with measured residual ratio q, the distance to the
fixed point is about residual * q / (1 - q); iteration stops only when that
estimate is inside the tolerance, so slowly contracting solves near the
transition cannot terminate on a deceptively small residual.

T_c detection bisects the zero/nonzero predicate.  Away from the transition
the predicate is decided by the solver itself; at the bisection's fine scale
the same boundary is located as the instability threshold of the discretized
operator linearized at u = 0 (its Perron eigenvalue crossing 1), which is the
exact zero/nonzero boundary of the discrete fixed-point problem and, unlike
plain Picard iteration, is decidable at tolerance 1e-8 * tau_2.  The result
is confirmed by two actual solves at resolvable offsets.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError
from .interpolate import PreparedQueries, pchip_eval_prepared, pchip_slopes
from .model import PhysicalParams, PotentialSpec
from .quadrature import composite_gauss
from .simple_gap import solve_simple_gap, solve_tau, solve_tau0, tau3
from .special import sech2


@dataclass(frozen=True)
class EnergyGrid:
    nodes: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.nodes, dtype=float)
        if n.ndim != 1 or n.size < 16:
            raise ConfigError("energy grid needs at least 16 ascending nodes")
        if np.any(np.diff(n) <= 0):
            raise ConfigError("energy grid nodes must be strictly ascending")
        n.setflags(write=False)
        object.__setattr__(self, "nodes", n)

    @property
    def count(self) -> int:
        return self.nodes.size


def build_grid(params: PhysicalParams, count: int = 129) -> EnergyGrid:
    """Geometric spacing near the cutoff, uniform across the rest of the shell."""
    eps, om = params.epsilon, params.hbar_omega_d
    split = 0.125 * om
    if eps >= split:
        nodes = np.geomspace(eps, om, count)
    else:
        n_log = count // 2
        log_part = np.geomspace(eps, split, n_log)
        lin_part = np.linspace(split, om, count - n_log + 1)[1:]
        nodes = np.concatenate([log_part, lin_part])
    nodes[0], nodes[-1] = eps, om
    return EnergyGrid(nodes)


@dataclass
class GapSlice:
    T: float
    x: np.ndarray
    values: np.ndarray
    iterations: int
    final_residual: float
    residual_history: list | None = field(default=None, repr=False)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass
class GapSurface:
    t_grid: np.ndarray
    slices: list
    tc: float | None
    metadata: dict


@dataclass
class ContractionReport:
    a: float
    b: float
    gamma: float
    alpha: float
    tau: float
    gamma_feasible: bool
    alpha_feasible: bool
    tau0: float
    tau3: float
    tc: float
    alpha_argmax: tuple  # (T, x)


@dataclass
class SolverOpts:
    tol: float | None = None
    max_iter: int = 400_000
    zero_threshold: float | None = None
    t_tol: float | None = None
    damping: float = 0.5
    damping_patience: int = 5
    seed: np.ndarray | None = None
    record_residuals: bool = False
    confirm_tc: bool = True
    workers: int = 1

    def resolved_tol(self, delta2_zero: float) -> float:
        return self.tol if self.tol is not None else 1e-10 * delta2_zero

    def resolved_zero_threshold(self, delta2_zero: float) -> float:
        return (self.zero_threshold if self.zero_threshold is not None
                else 1e-8 * delta2_zero)

    def resolved_t_tol(self, tau2: float) -> float:
        return self.t_tol if self.t_tol is not None else 1e-8 * tau2


class Discretization:
    """Quadrature nodes, prepared interpolation queries and the kernel matrix."""

    def __init__(self, kernel: PotentialSpec, grid: EnergyGrid):
        self.kernel = kernel
        self.grid = grid
        x = grid.nodes
        self.qn, self.qw = composite_gauss(x)
        self.prep = PreparedQueries(x, self.qn)
        if kernel.is_constant:
            self._mode = "const"
            self._u0 = kernel.u0
        elif kernel.is_separable:
            self._mode = "sep"
            self._fx = kernel.factor(x)
            self._fq = kernel.factor(self.qn)
        else:
            self._mode = "full"
            self._W = kernel._eval(x[:, None], self.qn[None, :]) * self.qw[None, :]
        # hat-function interpolation matrix (query values from grid values),
        # used only for the linearized operator
        q = self.qn.size
        P = np.zeros((q, x.size))
        i = self.prep.idx
        w = self.prep.t / self.prep.h
        P[np.arange(q), i] = 1.0 - w
        P[np.arange(q), i + 1] = w
        self._P = P

    def kernel_apply(self, phi: np.ndarray) -> np.ndarray:
        """Integral of U(x_i, xi) * phi(xi) over the shell, for all grid nodes."""
        if self._mode == "const":
            return np.full(self.grid.count, self._u0 * float(self.qw @ phi))
        if self._mode == "sep":
            return self._fx * float((self._fq * self.qw) @ phi)
        return self._W @ phi

    def interp(self, values: np.ndarray) -> np.ndarray:
        d = pchip_slopes(self.grid.nodes, values)
        return pchip_eval_prepared(values, d, self.prep)

    def linearized_matrix(self, weight_q: np.ndarray) -> np.ndarray:
        """Matrix of u -> integral U(x_i, xi) weight(xi) u(xi) dxi on grid values."""
        if self._mode == "const":
            row = (self.qw * weight_q) @ self._P
            return self._u0 * np.tile(row, (self.grid.count, 1))
        if self._mode == "sep":
            row = (self._fq * self.qw * weight_q) @ self._P
            return np.outer(self._fx, row)
        return (self._W * weight_q) @ self._P

    def spectral_radius(self, weight_q: np.ndarray) -> float:
        if self._mode == "const":
            return self._u0 * float(self.qw @ weight_q)
        if self._mode == "sep":
            # rank one: radius is the trace of the outer-product form
            row = (self._fq * self.qw * weight_q) @ self._P
            return float(row @ self._fx)
        m = self.linearized_matrix(weight_q)
        return float(np.max(np.abs(np.linalg.eigvals(m))))


def _phi_gap(disc: Discretization, values: np.ndarray, t: float) -> np.ndarray:
    u = disc.interp(values)
    e = np.hypot(disc.qn, u)
    if t == 0.0:
        return u / e
    return u / e * np.tanh(e / (2.0 * t))


def apply_A(u: GapSlice, kernel: PotentialSpec, params: PhysicalParams,
            disc: Discretization | None = None) -> GapSlice:
    """One application of the gap operator to a slice."""
    if disc is None:
        disc = Discretization(kernel, EnergyGrid(u.x))
    out = disc.kernel_apply(_phi_gap(disc, u.values, u.T))
    return GapSlice(u.T, u.x, out, u.iterations, u.final_residual)


def apply_dA_dT(u: GapSlice, du: np.ndarray, kernel: PotentialSpec,
                params: PhysicalParams, disc: Discretization | None = None) -> np.ndarray:
    """Analytic temperature derivative of the operator at (u, du); T > 0."""
    t = u.T
    if t <= 0.0:
        raise ValueError("temperature derivative of the operator needs T > 0; "
                         "the T = 0 limit is identically zero")
    if disc is None:
        disc = Discretization(kernel, EnergyGrid(u.x))
    uu = disc.interp(u.values)
    dd = disc.interp(np.asarray(du, dtype=float))
    e2 = disc.qn ** 2 + uu ** 2
    e = np.sqrt(e2)
    th = np.tanh(e / (2.0 * t))
    s2 = sech2(e / (2.0 * t))
    i1 = dd * disc.qn ** 2 / (e2 * e) * th
    i2 = dd * uu ** 2 / (2.0 * t * e2) * s2
    i3 = -uu / (2.0 * t * t) * s2
    return disc.kernel_apply(i1 + i2 + i3)


def du_dT_at_fixed_point(u: GapSlice, kernel: PotentialSpec,
                         params: PhysicalParams,
                         disc: Discretization | None = None) -> np.ndarray:
    """Solve the linear fixed-point equation for du/dT at a converged slice.

    Differentiating u = Au in T gives du = L du + c with L the
    derivative-coupling part of the operator and c the explicit temperature
    term; the dense linear system is solved directly on the grid.
    """
    t = u.T
    if t <= 0.0:
        return np.zeros_like(u.values)
    if disc is None:
        disc = Discretization(kernel, EnergyGrid(u.x))
    uu = disc.interp(u.values)
    e2 = disc.qn ** 2 + uu ** 2
    e = np.sqrt(e2)
    th = np.tanh(e / (2.0 * t))
    s2 = sech2(e / (2.0 * t))
    coef = disc.qn ** 2 / (e2 * e) * th + uu ** 2 / (2.0 * t * e2) * s2
    c = disc.kernel_apply(-uu / (2.0 * t * t) * s2)
    L = disc.linearized_matrix(coef)
    n = disc.grid.count
    return np.linalg.solve(np.eye(n) - L, c)


def _delta2_zero(params: PhysicalParams) -> float:
    return solve_simple_gap(0.0, params.u2, params)


def solve_at_T(t: float, kernel: PotentialSpec, params: PhysicalParams,
               opts: SolverOpts | None = None,
               grid: EnergyGrid | None = None,
               disc: Discretization | None = None) -> GapSlice:
    """Fixed point of the gap operator at one temperature.

    Seeded at the upper envelope Delta_2(T) (or opts.seed), plain Picard with
    the damping fallback; at and above tau_2 the zero slice is returned
    outright.  Iterates falling below a quarter of the zero threshold collapse
    to the exact zero slice (the operator fixes zero exactly).

    Plain iteration contracts at roughly 1 - |T - T_c|/T_c near the
    transition, so temperatures within about 1e-4 relative below T_c may
    exhaust the iteration budget; the error carries the last iterate.
    """
    if t < 0:
        raise ConfigError("temperature must be nonnegative")
    opts = opts or SolverOpts()
    if disc is None:
        if grid is None:
            grid = build_grid(params)
        disc = Discretization(kernel, grid)
    grid = disc.grid
    x = grid.nodes

    tau2 = solve_tau(params.u2, params)
    if t >= tau2:
        return GapSlice(t, x, np.zeros_like(x), 0, 0.0,
                        [] if opts.record_residuals else None)

    # Subcritical operator: the only nonnegative fixed point is zero, which
    # plain iteration from the upper envelope would approach at a crawl for T
    # just above the transition.  The zero slice is exact there.
    w = (1.0 / disc.qn) if t == 0.0 else np.tanh(disc.qn / (2.0 * t)) / disc.qn
    if disc.spectral_radius(w) <= 1.0:
        return GapSlice(t, x, np.zeros_like(x), 0, 0.0,
                        [] if opts.record_residuals else None)

    d20 = _delta2_zero(params)
    tol = opts.resolved_tol(d20)
    zthr = opts.resolved_zero_threshold(d20)

    if opts.seed is not None:
        u = np.array(opts.seed, dtype=float)
        if u.shape != x.shape:
            raise ConfigError("seed shape does not match the energy grid")
    else:
        u = np.full_like(x, solve_simple_gap(t, params.u2, params))

    history = [] if opts.record_residuals else None
    res_prev = np.inf
    ratios = []
    no_decrease = 0
    damping = 1.0
    for it in range(1, opts.max_iter + 1):
        au = disc.kernel_apply(_phi_gap(disc, u, t))
        res = float(np.max(np.abs(au - u)))
        if history is not None:
            history.append(res)
        if res_prev > 0 and np.isfinite(res_prev):
            ratios.append(res / res_prev)
            if len(ratios) > 5:
                ratios.pop(0)
        if res >= res_prev:
            no_decrease += 1
            if no_decrease >= opts.damping_patience:
                damping = opts.damping
        else:
            no_decrease = 0
        res_prev = res

        u_next = au if damping == 1.0 else u + damping * (au - u)

        if float(np.max(u_next)) < 0.25 * zthr:
            return GapSlice(t, x, np.zeros_like(x), it, 0.0, history)
        if res <= tol:
            q = max(ratios) if ratios else 0.0
            err_est = res * q / (1.0 - q) if q < 1.0 else np.inf
            if err_est <= tol:
                return GapSlice(t, x, u_next, it, res, history)
        u = u_next

    raise NumericalError(
        f"gap iteration budget exhausted at T={t:g} (residual {res_prev:g})",
        best=u, residual=res_prev)


def sweep(t_grid, kernel: PotentialSpec, params: PhysicalParams,
          opts: SolverOpts | None = None, grid: EnergyGrid | None = None,
          tc: float | None = None, attach_tc: bool = True) -> GapSurface:
    """Independent per-temperature solves assembled in grid order."""
    opts = opts or SolverOpts()
    ts = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(ts) <= 0):
        raise ConfigError("temperature grid must be strictly ascending")
    tau2 = solve_tau(params.u2, params)
    if ts[0] < 0 or ts[-1] > tau2 * (1 + 1e-12):
        raise ConfigError("temperature grid must lie within [0, tau_2]")
    if grid is None:
        grid = build_grid(params)
    disc = Discretization(kernel, grid)

    def one(t):
        return solve_at_T(float(t), kernel, params, opts, disc=disc)

    if opts.workers > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as ex:
            slices = list(ex.map(one, ts))
    else:
        slices = [one(t) for t in ts]

    if attach_tc and tc is None:
        tc = find_Tc(kernel, params, opts, grid=grid)
    d20 = _delta2_zero(params)
    meta = {
        "energy_points": grid.count,
        "t_points": ts.size,
        "tol": opts.resolved_tol(d20),
        "zero_threshold": opts.resolved_zero_threshold(d20),
        "tau1": solve_tau(params.u1, params),
        "tau2": tau2,
        "tau0": solve_tau0(params),
        "tau3": tau3(params),
        "tc": tc,
    }
    return GapSurface(ts, slices, tc, meta)


def find_Tc(kernel: PotentialSpec, params: PhysicalParams,
            opts: SolverOpts | None = None,
            grid: EnergyGrid | None = None) -> float:
    """Transition temperature: boundary of the zero-solution region.

    Bisection on [tau_1, tau_2] against the zero predicate, evaluated through
    the Perron eigenvalue of the linearized operator (see module docstring),
    then confirmed by direct solves on both sides.
    """
    opts = opts or SolverOpts()
    if grid is None:
        grid = build_grid(params)
    disc = Discretization(kernel, grid)
    tau1 = solve_tau(params.u1, params)
    tau2 = solve_tau(params.u2, params)
    t_tol = opts.resolved_t_tol(tau2)

    def excess(t):
        return disc.spectral_radius(np.tanh(disc.qn / (2.0 * t)) / disc.qn) - 1.0

    lo, hi = tau1, tau2
    f_lo, f_hi = excess(lo), excess(hi)
    if not (f_lo >= 0.0 >= f_hi):
        raise NumericalError(
            "T_c bracket invalid: zero predicate has the same value at tau_1 and tau_2")
    while hi - lo > t_tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    # return the zero-side endpoint so a solve exactly at the reported T_c
    # lands on the subcritical fast path deterministically
    tc = hi

    if opts.confirm_tc:
        d20 = _delta2_zero(params)
        zthr = opts.resolved_zero_threshold(d20)
        m = min(0.02 * tc, 0.45 * (tc - tau1), 0.45 * (tau2 - tc))
        if m > 10 * t_tol:
            below = solve_at_T(tc - m, kernel, params, opts, disc=disc)
            above = solve_at_T(tc + m, kernel, params, opts, disc=disc)
            if not (below.sup() >= zthr > above.sup()):
                raise NumericalError(
                    "T_c confirmation failed: solves straddling the detected "
                    "transition do not change zero classification")
    return tc


def contraction_diagnostics(kernel: PotentialSpec, params: PhysicalParams,
                            tau: float, opts: SolverOpts | None = None,
                            grid: EnergyGrid | None = None,
                            tc: float | None = None) -> ContractionReport:
    """Certified iteration constants on the two proven regimes.

    a and b bound the low-temperature band [0, tau_3] (gamma is their
    Lipschitz combination, flagged infeasible when 1 - u2*a <= 0); alpha is
    the near-transition contraction bound, maximized over a fine grid on
    [tau, T_c] x [epsilon, hbar_omega_d] and flagged when it fails to be < 1.
    """
    opts = opts or SolverOpts()
    if grid is None:
        grid = build_grid(params)
    disc = Discretization(kernel, grid)
    if tc is None:
        tc = find_Tc(kernel, params, opts, grid=grid)
    if not 0.0 < tau < tc:
        raise ConfigError("tau must lie strictly between 0 and T_c")

    t0 = solve_tau0(params)
    t3 = 0.5 * t0
    qn, qw = disc.qn, disc.qw

    a = 0.0
    for t in np.linspace(0.0, t3, 65):
        d1 = solve_simple_gap(float(t), params.u1, params)
        e = np.hypot(qn, d1)
        a = max(a, float(qw @ (np.tanh(e / (2.0 * t0)) / e)))

    d1_t3 = solve_simple_gap(t3, params.u1, params)
    b = 32.0 * t3 ** 2 / d1_t3 ** 2 * np.arctan(params.hbar_omega_d / d1_t3)

    gamma_feasible = 1.0 - params.u2 * a > 0.0
    gamma = params.u2 * b / (1.0 - params.u2 * a) if gamma_feasible else np.inf

    d2_tau = solve_simple_gap(tau, params.u2, params)
    pref = d2_tau ** 2 / (2.0 * params.epsilon ** 2)
    alpha = -np.inf
    argmax = (tau, params.epsilon)
    for t in np.linspace(tau, tc, 33):
        d2 = solve_simple_gap(float(t), params.u2, params)
        e = np.hypot(qn, d2)
        term1 = disc.kernel_apply(np.tanh(e / (2.0 * t)) / e)
        term2 = pref * disc.kernel_apply(np.tanh(qn / (2.0 * t)) / qn)
        total = term1 + term2
        i = int(np.argmax(total))
        if total[i] > alpha:
            alpha = float(total[i])
            argmax = (float(t), float(grid.nodes[i]))

    return ContractionReport(a=a, b=float(b), gamma=float(gamma), alpha=alpha,
                             tau=tau, gamma_feasible=gamma_feasible,
                             alpha_feasible=alpha < 1.0, tau0=t0, tau3=t3,
                             tc=tc, alpha_argmax=argmax)


def alpha_at(kernel: PotentialSpec, params: PhysicalParams, tau: float,
             t: float, x: float, grid: EnergyGrid | None = None) -> float:
    """Recompute the contraction bound integrand at one (T, x) point."""
    if grid is None:
        grid = build_grid(params)
    disc = Discretization(kernel, grid)
    qn, qw = disc.qn, disc.qw
    d2_tau = solve_simple_gap(tau, params.u2, params)
    d2 = solve_simple_gap(t, params.u2, params)
    e = np.hypot(qn, d2)
    u_row = kernel._eval(np.full_like(qn, x), qn)
    term1 = float((qw * u_row) @ (np.tanh(e / (2.0 * t)) / e))
    term2 = (d2_tau ** 2 / (2.0 * params.epsilon ** 2)
             * float((qw * u_row) @ (np.tanh(qn / (2.0 * t)) / qn)))
    return term1 + term2
