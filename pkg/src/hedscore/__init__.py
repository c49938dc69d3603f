"""Early-detection scoring of posterior streams around a known regime onset."""
from hedscore._accel import BACKEND
from hedscore.core import (
    DecayParams,
    HedResult,
    PhaseReport,
    ProbabilityStream,
    RegimeTransitionLog,
    Transition,
    compute_baseline,
    first_crossing,
    half_life,
    hed_exact_piecewise,
    hed_matrix,
    hed_phase_decomposition,
    hed_score,
    hed_smooth,
    hed_smooth_grad,
    hed_upper_bound,
    lambda_from_budget,
)
from hedscore.frontier import FrontierCurve, FrontierPoint, abc, far, frontier_curve, pareto_dominates
from hedscore.significance import (
    BootstrapConfig,
    BootstrapResult,
    block_resample,
    bootstrap_compare,
    default_block_len,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BootstrapConfig",
    "BootstrapResult",
    "DecayParams",
    "FrontierCurve",
    "FrontierPoint",
    "HedResult",
    "PhaseReport",
    "ProbabilityStream",
    "RegimeTransitionLog",
    "Transition",
    "abc",
    "block_resample",
    "bootstrap_compare",
    "compute_baseline",
    "default_block_len",
    "far",
    "first_crossing",
    "frontier_curve",
    "half_life",
    "hed_exact_piecewise",
    "hed_matrix",
    "hed_phase_decomposition",
    "hed_score",
    "hed_smooth",
    "hed_smooth_grad",
    "hed_upper_bound",
    "lambda_from_budget",
    "pareto_dominates",
]
