"""Physical parameters, interaction kernels and the density of states.

Everything here is immutable after construction and safe to evaluate from
concurrent workers.  Energies are in units where the Boltzmann constant is 1;
the natural choice is to measure all energies in units of the Debye energy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class PhysicalParams:
    """Cutoff, Debye energy, chemical potential, DOS level and coupling bounds."""

    epsilon: float
    hbar_omega_d: float
    mu: float
    n0: float
    u1: float
    u2: float


def validate_params(raw: PhysicalParams) -> PhysicalParams:
    """Return ``raw`` unchanged if all orderings hold, else raise ConfigError.

    The first violated condition is reported by name.
    """
    if not raw.epsilon > 0:
        raise ConfigError("cutoff must be positive")
    if not raw.epsilon < raw.hbar_omega_d:
        raise ConfigError("epsilon < hbar_omega_d violated")
    if not raw.hbar_omega_d < raw.mu:
        raise ConfigError("hbar_omega_d < mu violated")
    if not raw.n0 > 0:
        raise ConfigError("N0 must be positive")
    if not raw.u1 > 0:
        raise ConfigError("U1 must be positive")
    if not raw.u1 < raw.u2:
        raise ConfigError("U1 < U2 violated")
    return raw


def _readonly(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


class PotentialSpec:
    """Interaction kernel U(x, xi) on [epsilon, hbar_omega_d]^2.

    Subclasses provide ``_eval`` on already-validated broadcastable arrays.
    Construction checks that the kernel range lies strictly inside (u1, u2).
    """

    def __init__(self, params: PhysicalParams):
        self.params = params
        self.domain = (params.epsilon, params.hbar_omega_d)
        self.u1 = params.u1
        self.u2 = params.u2

    def _check_range(self, lo: float, hi: float) -> None:
        if not (self.u1 < lo and hi < self.u2):
            raise ConfigError(
                "kernel values must lie strictly between u1 and u2 "
                f"(range [{lo:g}, {hi:g}] vs ({self.u1:g}, {self.u2:g}))"
            )

    def _eval(self, x, xi):
        raise NotImplementedError

    @property
    def is_constant(self) -> bool:
        return False

    @property
    def is_separable(self) -> bool:
        return False


class ConstantPotential(PotentialSpec):
    def __init__(self, u0: float, params: PhysicalParams):
        super().__init__(params)
        self.u0 = float(u0)
        self._check_range(self.u0, self.u0)

    def _eval(self, x, xi):
        return np.broadcast_to(self.u0, np.broadcast(x, xi).shape).copy()

    @property
    def is_constant(self) -> bool:
        return True


class SeparablePotential(PotentialSpec):
    """U(x, xi) = f(x) f(xi) with f > 0 piecewise linear between its samples.

    Linear interpolation keeps every kernel value inside
    [min(f)^2, max(f)^2], so the (u1, u2) bounds are checked once here.
    """

    def __init__(self, f_nodes, f_values, params: PhysicalParams):
        super().__init__(params)
        self.f_nodes = _readonly(f_nodes)
        self.f_values = _readonly(f_values)
        if self.f_nodes.ndim != 1 or self.f_nodes.shape != self.f_values.shape:
            raise ConfigError("separable kernel needs matching 1-d node/value arrays")
        if np.any(np.diff(self.f_nodes) <= 0):
            raise ConfigError("separable kernel nodes must be strictly ascending")
        if np.any(self.f_values <= 0):
            raise ConfigError("separable kernel factor must be positive")
        lo, hi = self.f_values.min(), self.f_values.max()
        self._check_range(lo * lo, hi * hi)

    def factor(self, x):
        return np.interp(x, self.f_nodes, self.f_values)

    def _eval(self, x, xi):
        return self.factor(x) * self.factor(xi)

    @property
    def is_separable(self) -> bool:
        return True


class TabulatedPotential(PotentialSpec):
    """Kernel tabulated on a node grid, bilinear in between, clamped at edges."""

    def __init__(self, nodes, values, params: PhysicalParams):
        super().__init__(params)
        self.nodes = _readonly(nodes)
        self.values = _readonly(values)
        if self.nodes.ndim != 1 or self.nodes.size < 2:
            raise ConfigError("tabulated kernel needs at least 2 nodes")
        if np.any(np.diff(self.nodes) <= 0):
            raise ConfigError("tabulated kernel nodes must be strictly ascending")
        n = self.nodes.size
        if self.values.shape != (n, n):
            raise ConfigError("tabulated kernel values must be an n-by-n table")
        self._check_range(self.values.min(), self.values.max())

    def _cell(self, q):
        t = self.nodes
        i = np.clip(np.searchsorted(t, q, side="right") - 1, 0, t.size - 2)
        w = (np.clip(q, t[0], t[-1]) - t[i]) / (t[i + 1] - t[i])
        return i, w

    def _eval(self, x, xi):
        x, xi = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float))
        i, s = self._cell(x)
        j, t = self._cell(xi)
        v = self.values
        return ((1 - s) * (1 - t) * v[i, j] + s * (1 - t) * v[i + 1, j]
                + (1 - s) * t * v[i, j + 1] + s * t * v[i + 1, j + 1])


def eval_kernel(spec: PotentialSpec, x, xi):
    """Evaluate U(x, xi); arguments must lie in [epsilon, hbar_omega_d]."""
    lo, hi = spec.domain
    x = np.asarray(x, float)
    xi = np.asarray(xi, float)
    tol = 1e-12 * hi
    if np.any(x < lo - tol) or np.any(x > hi + tol) or np.any(xi < lo - tol) or np.any(xi > hi + tol):
        raise ConfigError("kernel argument outside [epsilon, hbar_omega_d]")
    out = spec._eval(x, xi)
    return float(out) if out.ndim == 0 else out


class DosModel:
    """Density of states N(xi) on [-mu, inf), equal to n0 on the shell."""

    def __init__(self, n0: float, params: PhysicalParams):
        self.n0 = float(n0)
        self.params = params

    def _eval(self, xi):
        raise NotImplementedError


class FlatShellDos(DosModel):
    def _eval(self, xi):
        return np.full_like(xi, self.n0)


class SqrtBandDos(DosModel):
    """Free-electron-like sqrt growth off the shell, anchored for continuity.

    Below the shell N = n0*sqrt((xi+mu)/(epsilon+mu)), above it
    N = n0*sqrt((xi+mu)/(hbar_omega_d+mu)); both equal n0 at the shell edges,
    vanish at xi = -mu and grow like sqrt(xi) at large xi.
    """

    def _eval(self, xi):
        p = self.params
        out = np.full_like(xi, self.n0)
        below = xi < p.epsilon
        above = xi > p.hbar_omega_d
        out[below] = self.n0 * np.sqrt((xi[below] + p.mu) / (p.epsilon + p.mu))
        out[above] = self.n0 * np.sqrt((xi[above] + p.mu) / (p.hbar_omega_d + p.mu))
        return out


def eval_dos(model: DosModel, xi):
    """Evaluate N(xi); xi must satisfy xi >= -mu."""
    xi = np.asarray(xi, float)
    if np.any(xi < -model.params.mu):
        raise ConfigError("density of states argument below -mu")
    out = model._eval(np.atleast_1d(xi).astype(float))
    return float(out[0]) if xi.ndim == 0 else out
