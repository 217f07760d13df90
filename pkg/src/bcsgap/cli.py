"""Command-line interface: subcommand dispatch, CSV and report emission.

Every run is deterministic for a fixed configuration; CSV numbers are written
with 17 significant digits so files round-trip doubles and diff cleanly.
Each CSV gets a .meta sidecar echoing the resolved configuration together
with the derived temperatures and thresholds, so every number in a summary is
recomputable from the sidecar alone.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .critical_field import build_hc_curve, linear_law_check
from .errors import ConfigError, NumericalError
from .gap_solver import (SolverOpts, build_grid, contraction_diagnostics,
                         find_Tc, solve_at_T, sweep)
from .simple_gap import (build_simple_gap_curve, solve_simple_gap, solve_tau,
                         solve_tau0, tau3)
from .thermo import (JUMP_RATIO_WIDE_SHELL, build_thermo_curve, cv_normal,
                     delta_cv, cv_ratio, extract_v, universal_constant)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: str, header: list[str], columns: list[np.ndarray]) -> None:
    rows = zip(*columns)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(float(v)) for v in row) + "\n")


def _write_kv(path: str, data: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, v in data.items():
            fh.write(f"{k} = {_fmt(v)}\n")


def _meta(cfg: RunConfig, extra: dict | None = None) -> dict:
    data = {"tool_version": __version__}
    data.update({f"config.{k}": v for k, v in sorted(cfg.resolved.items())})
    for k, v in sorted(cfg.defaults_applied.items()):
        data[f"defaulted.{k}"] = v
    p = cfg.params
    data["derived.tau1"] = solve_tau(p.u1, p)
    data["derived.tau2"] = solve_tau(p.u2, p)
    data["derived.tau0"] = solve_tau0(p)
    data["derived.tau3"] = tau3(p)
    opts = _opts(cfg)
    d20 = solve_simple_gap(0.0, p.u2, p)
    data["derived.zero_threshold"] = opts.resolved_zero_threshold(d20)
    data["derived.solver_tol"] = opts.resolved_tol(d20)
    if extra:
        data.update(extra)
    return data


def _opts(cfg: RunConfig) -> SolverOpts:
    return SolverOpts(tol=cfg.solver_tol, t_tol=cfg.t_tol)


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _say(args, text: str) -> None:
    if not args.quiet:
        print(text)


def _t_grid(args, cfg: RunConfig, upper: float) -> np.ndarray:
    t_min = args.t_min if args.t_min is not None else 0.0
    t_max = args.t_max if args.t_max is not None else upper
    t_points = args.t_points if args.t_points is not None else cfg.t_points
    return np.linspace(t_min, t_max, t_points)


def cmd_simple_gap(args, cfg: RunConfig) -> int:
    u = cfg.params.u1 if args.coupling == "u1" else cfg.params.u2
    curve = build_simple_gap_curve(u, cfg.params, args.t_points or cfg.t_points)
    path = args.csv or _out_path(args, "simple_gap.csv")
    _write_csv(path, ["T", "delta", "residual"], [curve.t, curve.delta, curve.residual])
    _write_kv(path + ".meta", _meta(cfg, {"coupling": u, "tau": curve.tau}))
    _say(args, f"wrote {path} (tau = {_fmt(curve.tau)})")
    return 0


def cmd_gap(args, cfg: RunConfig) -> int:
    grid = build_grid(cfg.params, cfg.energy_points)
    sl = solve_at_T(args.t, cfg.potential, cfg.params, _opts(cfg), grid=grid)
    path = _out_path(args, "gap.csv")
    _write_csv(path, ["x", "u"], [sl.x, sl.values])
    _write_kv(path + ".meta", _meta(cfg, {
        "T": sl.T, "iterations": sl.iterations, "final_residual": sl.final_residual}))
    _say(args, f"wrote {path} (iterations = {sl.iterations}, residual = {_fmt(sl.final_residual)})")
    return 0


def cmd_sweep(args, cfg: RunConfig) -> int:
    grid = build_grid(cfg.params, cfg.energy_points)
    tau2 = solve_tau(cfg.params.u2, cfg.params)
    ts = _t_grid(args, cfg, tau2)
    surface = sweep(ts, cfg.potential, cfg.params, _opts(cfg), grid=grid)
    n = grid.count
    t_col = np.repeat(ts, n)
    x_col = np.tile(grid.nodes, ts.size)
    u_col = np.concatenate([sl.values for sl in surface.slices])
    r_col = np.repeat([sl.final_residual for sl in surface.slices], n)
    i_col = np.repeat([float(sl.iterations) for sl in surface.slices], n)
    path = _out_path(args, "sweep.csv")
    _write_csv(path, ["T", "x", "u", "residual", "iterations"],
               [t_col, x_col, u_col, r_col, i_col])
    _write_kv(path + ".meta", _meta(cfg, {"Tc": surface.tc}))
    _say(args, f"wrote {path} (Tc = {_fmt(surface.tc)})")
    return 0


def cmd_tc(args, cfg: RunConfig) -> int:
    grid = build_grid(cfg.params, cfg.energy_points)
    tc = find_Tc(cfg.potential, cfg.params, _opts(cfg), grid=grid)
    _write_kv(_out_path(args, "tc.meta"), _meta(cfg, {"Tc": tc}))
    _say(args, _fmt(tc))
    return 0


def cmd_diagnose(args, cfg: RunConfig) -> int:
    grid = build_grid(cfg.params, cfg.energy_points)
    rep = contraction_diagnostics(cfg.potential, cfg.params, args.tau,
                                  _opts(cfg), grid=grid)
    path = _out_path(args, "diagnose.txt")
    _write_kv(path, _meta(cfg, {
        "tau": rep.tau, "a": rep.a, "b": rep.b, "gamma": rep.gamma,
        "alpha": rep.alpha, "gamma_feasible": rep.gamma_feasible,
        "alpha_feasible": rep.alpha_feasible, "tau0": rep.tau0,
        "tau3": rep.tau3, "Tc": rep.tc,
        "alpha_argmax_T": rep.alpha_argmax[0],
        "alpha_argmax_x": rep.alpha_argmax[1]}))
    _say(args, f"wrote {path} (alpha = {_fmt(rep.alpha)}, "
               f"feasible = {rep.alpha_feasible})")
    return 0


def cmd_thermo(args, cfg: RunConfig) -> int:
    grid = build_grid(cfg.params, cfg.energy_points)
    tau2 = solve_tau(cfg.params.u2, cfg.params)
    ts = _t_grid(args, cfg, tau2)
    surface = sweep(ts, cfg.potential, cfg.params, _opts(cfg), grid=grid)
    curve = build_thermo_curve(surface, cfg.potential, cfg.params, cfg.dos,
                               cfg.quad_tol)
    path = _out_path(args, "thermo.csv")
    _write_csv(path, ["T", "omega_n", "psi", "dpsi_dT", "cv_normal", "cv_super"],
               [curve.t, curve.omega_n, curve.psi, curve.dpsi_dT,
                curve.cv_normal, curve.cv_super])
    _write_kv(path + ".meta", _meta(cfg, {"Tc": surface.tc}))
    _say(args, f"wrote {path}")
    return 0


def cmd_ratio(args, cfg: RunConfig) -> int:
    grid = build_grid(cfg.params, cfg.energy_points)
    opts = _opts(cfg)
    tc = find_Tc(cfg.potential, cfg.params, opts, grid=grid)
    v = extract_v(cfg.potential, cfg.params, opts, grid=grid, tc=tc)
    dcv = delta_cv(v, cfg.params, tc)
    cvn = cv_normal(tc, cfg.params, cfg.dos, cfg.quad_tol)
    ratio = cv_ratio(v, cfg.params, cfg.dos, tc)
    uni = universal_constant()
    path = _out_path(args, "ratio.txt")
    _write_kv(path, _meta(cfg, {
        "Tc": tc, "delta_cv": dcv, "cv_normal_tc": cvn, "ratio": ratio,
        "universal_constant": uni, "ratio_minus_universal": ratio - uni}))
    _say(args, f"ratio = {_fmt(ratio)} (universal constant {_fmt(uni)}, "
               f"difference {_fmt(ratio - uni)})")
    return 0


def cmd_vfun(args, cfg: RunConfig) -> int:
    grid = build_grid(cfg.params, cfg.energy_points)
    opts = _opts(cfg)
    tc = find_Tc(cfg.potential, cfg.params, opts, grid=grid)
    v = extract_v(cfg.potential, cfg.params, opts, grid=grid, tc=tc)
    path = _out_path(args, "vfun.csv")
    _write_csv(path, ["x", "v", "fit_residual"], [v.x, v.values, v.fit_residual])
    _write_kv(path + ".meta", _meta(cfg, {"Tc": tc}))
    _say(args, f"wrote {path}")
    return 0


def cmd_hc(args, cfg: RunConfig) -> int:
    grid = build_grid(cfg.params, cfg.energy_points)
    opts = _opts(cfg)
    tc = find_Tc(cfg.potential, cfg.params, opts, grid=grid)
    v = extract_v(cfg.potential, cfg.params, opts, grid=grid, tc=tc)
    # user grid plus a dyadic refinement toward T_c for the linear-law fit
    base = _t_grid(args, cfg, tc)
    ladder = tc * (1.0 - 2.0 ** -np.arange(3, 11))
    ts = np.unique(np.concatenate([base, ladder]))
    ts = ts[(ts >= 0.0) & (ts <= tc)]
    surface = sweep(ts, cfg.potential, cfg.params, opts, grid=grid, tc=tc)
    curve = build_hc_curve(surface, v, cfg.potential, cfg.params, opts)
    law = linear_law_check(curve, v, cfg.params)
    path = _out_path(args, "hc.csv")
    _write_csv(path, ["T", "hc", "dhc_dT"], [curve.t, curve.hc, curve.dhc_dT])
    summary = {
        "Tc": tc, "hc0": curve.hc0, "slope_at_Tc": curve.slope_at_tc,
        "fitted_linear_coefficient": law.fitted_coefficient,
        "predicted_linear_coefficient": law.predicted_coefficient,
    }
    if cfg.potential.is_constant:
        summary["coeff_over_hc0"] = law.coeff_over_hc0
        summary["coeff_over_hc0_minus_1.74"] = law.coeff_over_hc0 - 1.74
    _write_kv(path + ".meta", _meta(cfg, summary))
    _say(args, f"wrote {path} (hc0 = {_fmt(curve.hc0)}, "
               f"slope at Tc = {_fmt(curve.slope_at_tc)})")
    return 0


def cmd_universal(args, cfg: RunConfig) -> int:
    val = universal_constant()
    _say(args, f"{_fmt(val)}  |value - 12/(7 zeta(3))| = "
               f"{_fmt(abs(val - JUMP_RATIO_WIDE_SHELL))}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bcsgap",
        description="Cutoff BCS-Bogoliubov gap equation solver and "
                    "superconducting thermodynamics")
    p.add_argument("--config", default=None, help="key=value configuration file")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--tol", type=float, default=None,
                   help="override the quadrature tolerance")
    p.add_argument("--quiet", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sg = sub.add_parser("simple-gap", help="constant-coupling envelope curve")
    sg.add_argument("--coupling", choices=["u1", "u2"], required=True)
    sg.add_argument("--t-points", type=int, default=None)
    sg.add_argument("--csv", default=None, help="explicit CSV path")
    sg.set_defaults(fn=cmd_simple_gap)

    g = sub.add_parser("gap", help="solve the gap equation at one temperature")
    g.add_argument("--t", type=float, required=True)
    g.set_defaults(fn=cmd_gap)

    for name, fn, helptext in [
            ("sweep", cmd_sweep, "solve over a temperature grid"),
            ("thermo", cmd_thermo, "thermodynamic curve over a temperature grid"),
            ("hc", cmd_hc, "critical-field curve over a temperature grid")]:
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--t-min", type=float, default=None)
        s.add_argument("--t-max", type=float, default=None)
        s.add_argument("--t-points", type=int, default=None)
        s.set_defaults(fn=fn)

    t = sub.add_parser("tc", help="transition temperature")
    t.set_defaults(fn=cmd_tc)

    d = sub.add_parser("diagnose", help="contraction diagnostics")
    d.add_argument("--tau", type=float, required=True)
    d.set_defaults(fn=cmd_diagnose)

    r = sub.add_parser("ratio", help="specific-heat jump ratio pipeline")
    r.set_defaults(fn=cmd_ratio)

    vf = sub.add_parser("vfun", help="near-transition limit function v(x)")
    vf.set_defaults(fn=cmd_vfun)

    u = sub.add_parser("universal", help="wide-shell universal jump ratio")
    u.set_defaults(fn=cmd_universal)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.tol is not None:
            cfg.quad_tol = args.tol
        return args.fn(args, cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
