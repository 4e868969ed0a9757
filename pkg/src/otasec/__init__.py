"""Secure over-the-air computation toolkit.

Simulates channel-inversion aggregation of Gaussian source data over a
multiple-access fading channel in the presence of (possibly cooperating)
eavesdroppers, evaluates closed-form accuracy and security metrics together
with Monte Carlo oracles, optimizes correlated zero-forcing artificial-noise
precoders via linear programming, and reproduces the experiment sweeps as
deterministic presets.
"""

from .channel import (
    ScenarioConfig,
    SystemRealization,
    calibrate_noise,
    config_from_dict,
    config_to_dict,
    realization_from_dict,
    realization_to_dict,
    sample_realization,
)
from .encoding import (
    NoisePrecoder,
    PowerControl,
    build_precoder,
    eta_bounds_given_mu,
    eta_from_delta,
    eta_upper_bound,
    transmit,
)
from .errors import (
    ConfigurationError,
    ContractError,
    InfeasibleError,
    ShapeError,
    SingularMatrixError,
)
from .experiments import (
    ExperimentPreset,
    ResultTable,
    collect_trials,
    default_preset,
    read_table,
    run_preset,
    write_table,
)
from .linalg import cholesky, hermitian_solve, matmul
from .lp import LpProblem, LpSolution, solve_lp
from .metrics import (
    CrossCovarianceReport,
    OracleReport,
    SecurityReport,
    approximation_error,
    coop_security,
    effective_channel_security,
    evaluate,
    mc_oracle,
    noncoop_security,
    statistical_csi_check,
)
from .optimizer import (
    EavesdropperObjective,
    ZeroForcingDesign,
    assemble_precoder,
    compute_alpha_beta,
    optimize_design,
    optimize_proposed,
    optimize_shared_zf,
)
from .version import __version__

__all__ = [
    "__version__",
    "ScenarioConfig",
    "SystemRealization",
    "calibrate_noise",
    "sample_realization",
    "config_to_dict",
    "config_from_dict",
    "realization_to_dict",
    "realization_from_dict",
    "NoisePrecoder",
    "PowerControl",
    "build_precoder",
    "eta_upper_bound",
    "eta_bounds_given_mu",
    "eta_from_delta",
    "transmit",
    "SecurityReport",
    "OracleReport",
    "CrossCovarianceReport",
    "approximation_error",
    "coop_security",
    "noncoop_security",
    "effective_channel_security",
    "evaluate",
    "mc_oracle",
    "statistical_csi_check",
    "EavesdropperObjective",
    "ZeroForcingDesign",
    "compute_alpha_beta",
    "assemble_precoder",
    "optimize_design",
    "optimize_proposed",
    "optimize_shared_zf",
    "LpProblem",
    "LpSolution",
    "solve_lp",
    "matmul",
    "cholesky",
    "hermitian_solve",
    "ExperimentPreset",
    "ResultTable",
    "default_preset",
    "collect_trials",
    "run_preset",
    "write_table",
    "read_table",
    "ShapeError",
    "ContractError",
    "SingularMatrixError",
    "ConfigurationError",
    "InfeasibleError",
]
