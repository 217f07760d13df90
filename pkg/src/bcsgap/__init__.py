"""Cutoff BCS-Bogoliubov gap equation and superconducting thermodynamics."""

__version__ = "0.1.0"

from .errors import ConfigError, NumericalError
from .model import (ConstantPotential, DosModel, FlatShellDos, PhysicalParams,
                    PotentialSpec, SeparablePotential, SqrtBandDos,
                    TabulatedPotential, eval_dos, eval_kernel, validate_params)
from .quadrature import QuadResult, integrate, integrate_tail
from .simple_gap import (SimpleGapCurve, build_simple_gap_curve, delta_at_zero,
                         gap_rhs, solve_simple_gap, solve_tau, solve_tau0,
                         solve_z0, tau3)
from .gap_solver import (ContractionReport, EnergyGrid, GapSlice, GapSurface,
                         SolverOpts, apply_A, apply_dA_dT, build_grid,
                         contraction_diagnostics, du_dT_at_fixed_point,
                         find_Tc, solve_at_T, sweep)
from .thermo import (ThermoCurve, VFunction, build_thermo_curve, cv_normal,
                     cv_ratio, delta_cv, extract_v, g_weight, omega_normal,
                     psi, psi_derivative, psi_second_derivative_at_tc,
                     universal_constant, v_selfconsistency_residual)
from .critical_field import (HcCurve, LinearLawReport, build_hc_curve, hc,
                             hc_slope, hc_zero, linear_law_check, slope_at_tc)
from .config import RunConfig, load_config

__all__ = [
    "__version__",
    "ConfigError", "NumericalError",
    "PhysicalParams", "validate_params", "PotentialSpec", "ConstantPotential",
    "SeparablePotential", "TabulatedPotential", "eval_kernel",
    "DosModel", "FlatShellDos", "SqrtBandDos", "eval_dos",
    "QuadResult", "integrate", "integrate_tail",
    "SimpleGapCurve", "build_simple_gap_curve", "delta_at_zero", "gap_rhs",
    "solve_simple_gap", "solve_tau", "solve_tau0", "solve_z0", "tau3",
    "EnergyGrid", "GapSlice", "GapSurface", "ContractionReport", "SolverOpts",
    "apply_A", "apply_dA_dT", "build_grid", "contraction_diagnostics",
    "du_dT_at_fixed_point", "find_Tc", "solve_at_T", "sweep",
    "ThermoCurve", "VFunction", "build_thermo_curve", "cv_normal", "cv_ratio",
    "delta_cv", "extract_v", "g_weight", "omega_normal", "psi",
    "psi_derivative", "psi_second_derivative_at_tc", "universal_constant",
    "v_selfconsistency_residual",
    "HcCurve", "LinearLawReport", "build_hc_curve", "hc", "hc_slope",
    "hc_zero", "linear_law_check", "slope_at_tc",
    "RunConfig", "load_config",
]
