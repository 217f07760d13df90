"""Run configuration: flat key=value files with dotted keys, strict schema.

Unknown keys are errors; silent typos in physics parameters are the costliest
failure mode.  Every default that fills a missing key is recorded so output
metadata can echo the fully resolved configuration.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .model import (ConstantPotential, DosModel, FlatShellDos, PhysicalParams,
                    PotentialSpec, SeparablePotential, SqrtBandDos,
                    TabulatedPotential, validate_params)

_SCALAR_KEYS = {
    "epsilon", "hbar_omega_d", "mu", "n0", "u1", "u2",
    "potential.u0",
    "grids.energy_points", "grids.t_points",
    "tolerances.quad_tol", "tolerances.solver_tol", "tolerances.t_tol",
}
_STRING_KEYS = {"potential.type", "dos.type"}
_LIST_KEYS = {"potential.f_nodes", "potential.f_values",
              "potential.nodes", "potential.values"}
KNOWN_KEYS = _SCALAR_KEYS | _STRING_KEYS | _LIST_KEYS


@dataclass
class RunConfig:
    params: PhysicalParams
    potential: PotentialSpec
    dos: DosModel
    energy_points: int
    t_points: int
    quad_tol: float
    solver_tol: float | None
    t_tol: float | None
    resolved: dict = field(default_factory=dict)
    defaults_applied: dict = field(default_factory=dict)


def _parse_items(text: str, origin: str) -> dict:
    items = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{origin}:{lineno}: unknown key '{key}'")
        if key in items:
            raise ConfigError(f"{origin}:{lineno}: duplicate key '{key}'")
        items[key] = value
    return items


def _get(items, defaults_applied, key, default, cast):
    if key in items:
        try:
            return cast(items[key])
        except ValueError as exc:
            raise ConfigError(f"invalid value for '{key}': {items[key]}") from exc
    defaults_applied[key] = default
    return default


def _floats(text: str) -> np.ndarray:
    return np.array([float(s) for s in text.split(",") if s.strip() != ""])


def load_config(path: str | None) -> RunConfig:
    """Load and validate a configuration file; None gives pure defaults."""
    if path is None:
        items = {}
        origin = "<defaults>"
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        origin = path
        items = _parse_items(text, origin)

    defaults: dict = {}
    om = _get(items, defaults, "hbar_omega_d", 1.0, float)
    eps = _get(items, defaults, "epsilon", 1e-3 * om, float)
    mu = _get(items, defaults, "mu", 20.0 * om, float)
    n0 = _get(items, defaults, "n0", 1.0, float)
    u1 = _get(items, defaults, "u1", 0.25, float)
    u2 = _get(items, defaults, "u2", 0.35, float)
    params = validate_params(PhysicalParams(eps, om, mu, n0, u1, u2))

    ptype = _get(items, defaults, "potential.type", "constant", str)
    if ptype == "constant":
        u0 = _get(items, defaults, "potential.u0", 0.3, float)
        if not (u1 < u0 < u2):
            raise ConfigError("potential.u0 must lie strictly between u1 and u2")
        potential: PotentialSpec = ConstantPotential(u0, params)
    elif ptype == "separable":
        if "potential.f_values" not in items:
            raise ConfigError("separable potential needs potential.f_values")
        fv = _floats(items["potential.f_values"])
        if "potential.f_nodes" in items:
            fn = _floats(items["potential.f_nodes"])
        else:
            fn = np.linspace(eps, om, fv.size)
            defaults["potential.f_nodes"] = "uniform on [epsilon, hbar_omega_d]"
        potential = SeparablePotential(fn, fv, params)
    elif ptype == "tabulated":
        if "potential.nodes" not in items or "potential.values" not in items:
            raise ConfigError("tabulated potential needs potential.nodes and potential.values")
        nodes = _floats(items["potential.nodes"])
        vals = _floats(items["potential.values"])
        n = nodes.size
        if vals.size != n * n:
            raise ConfigError("potential.values must hold n*n entries (row major)")
        potential = TabulatedPotential(nodes, vals.reshape(n, n), params)
    else:
        raise ConfigError(f"unknown potential.type '{ptype}'")

    dtype = _get(items, defaults, "dos.type", "sqrt_band", str)
    if dtype == "flat_shell":
        dos: DosModel = FlatShellDos(n0, params)
    elif dtype == "sqrt_band":
        dos = SqrtBandDos(n0, params)
    else:
        raise ConfigError(f"unknown dos.type '{dtype}'")

    energy_points = _get(items, defaults, "grids.energy_points", 129, int)
    t_points = _get(items, defaults, "grids.t_points", 33, int)
    if energy_points < 16:
        raise ConfigError("grids.energy_points must be at least 16")
    if t_points < 8:
        raise ConfigError("grids.t_points must be at least 8")

    quad_tol = _get(items, defaults, "tolerances.quad_tol", 1e-10, float)
    solver_tol = float(items["tolerances.solver_tol"]) if "tolerances.solver_tol" in items else None
    t_tol = float(items["tolerances.t_tol"]) if "tolerances.t_tol" in items else None

    resolved = {
        "hbar_omega_d": om, "epsilon": eps, "mu": mu, "n0": n0,
        "u1": u1, "u2": u2, "potential.type": ptype, "dos.type": dtype,
        "grids.energy_points": energy_points, "grids.t_points": t_points,
        "tolerances.quad_tol": quad_tol,
        "tolerances.solver_tol": solver_tol if solver_tol is not None else "auto",
        "tolerances.t_tol": t_tol if t_tol is not None else "auto",
    }
    if ptype == "constant":
        resolved["potential.u0"] = u0
    return RunConfig(params, potential, dos, energy_points, t_points,
                     quad_tol, solver_tol, t_tol, resolved, defaults)
