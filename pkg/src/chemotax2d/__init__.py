"""2D two-species chemotaxis simulator with sub-logistic damping.

Library surface: grid operators, the IMEX stepper, elliptic solvers,
energy-functional diagnostics, inequality verifiers, and the scenario runner
behind the `chemotax2d` command line tool.
"""

from .config import ConfigError, ScenarioConfig, load_config
from .diagnostics import (
    BlowupReport,
    DiagnosticsRecord,
    EnergyParams,
    certify_inequality,
    detect_blowup,
    empirical_gn_ratio,
    energy,
    gn_ensemble_max,
    l_log_l,
    make_energy_params,
    record,
    verify_interpolation_inequality,
    verify_phi_bound,
)
from .elliptic import HelmholtzProblem, SolverFailure, solve
from .grid import (
    Field,
    GridSpec,
    chemotactic_divergence,
    gradient_sq_integral,
    integrate,
    laplacian,
    weighted_gradient_sq_integral,
)
from .model import ModelParams, State, phi, source, source_field
from .runner import run_scenario, run_sweep, verify_command
from .stepper import PositivityError, RunResult, StepControls, compute_dt, run, step

__version__ = "0.1.0"

__all__ = [
    "BlowupReport",
    "ConfigError",
    "DiagnosticsRecord",
    "EnergyParams",
    "Field",
    "GridSpec",
    "HelmholtzProblem",
    "ModelParams",
    "PositivityError",
    "RunResult",
    "ScenarioConfig",
    "SolverFailure",
    "State",
    "StepControls",
    "certify_inequality",
    "chemotactic_divergence",
    "compute_dt",
    "detect_blowup",
    "empirical_gn_ratio",
    "energy",
    "gn_ensemble_max",
    "gradient_sq_integral",
    "integrate",
    "l_log_l",
    "laplacian",
    "load_config",
    "make_energy_params",
    "phi",
    "record",
    "run",
    "run_scenario",
    "run_sweep",
    "solve",
    "source",
    "source_field",
    "step",
    "verify_command",
    "verify_interpolation_inequality",
    "verify_phi_bound",
    "weighted_gradient_sq_integral",
]
