"""Pseudo-spectral simulator and verification harness for the scalar
conservation law u_t + d/dx( f(u) + delta*u_xx + nu*u_xxx ) = 0 on a
periodic domain, evolved as the deviation from a constant far-field
state with continuous checking of its energy identity, mass
conservation, interpolation inequalities and decay monitors."""

from .config import (
    ConfigError,
    InitialDataSpec,
    RunConfig,
    build_initial_data,
    config_digest,
    load_config,
)
from .diagnostics import (
    DiagnosticsRecord,
    InequalityReport,
    decay_report,
    energy_ledger_update,
    h2_energy_balance,
    interpolation_suite,
)
from .driver import BlowUpError, Checkpoint, CheckpointMismatchError, RunResult, restart, run
from .flux import FluxModel, GrowthReport, nonlinear_term, parse_flux_spec, validate_growth
from .kernels import BACKEND as KERNEL_BACKEND
from .oracle import LinearOracle, fd_residual, linear_solution, reference_run
from .spectral import Field, NormBundle, SpectralGrid, dealias, derivative, make_grid, norms, sup_norm_refined
from .stepping import build_symbol, phi_functions

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "Checkpoint",
    "CheckpointMismatchError",
    "ConfigError",
    "DiagnosticsRecord",
    "Field",
    "FluxModel",
    "GrowthReport",
    "InequalityReport",
    "InitialDataSpec",
    "KERNEL_BACKEND",
    "LinearOracle",
    "NormBundle",
    "RunConfig",
    "RunResult",
    "SpectralGrid",
    "build_initial_data",
    "build_symbol",
    "config_digest",
    "dealias",
    "decay_report",
    "derivative",
    "energy_ledger_update",
    "fd_residual",
    "h2_energy_balance",
    "interpolation_suite",
    "linear_solution",
    "load_config",
    "make_grid",
    "nonlinear_term",
    "norms",
    "parse_flux_spec",
    "phi_functions",
    "reference_run",
    "restart",
    "run",
    "sup_norm_refined",
    "validate_growth",
    "__version__",
]
