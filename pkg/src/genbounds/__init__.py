"""Nonparametric bounds on population average treatment effects.

Tools for experiments whose sample was not randomly drawn from the target
population: worst-case and monotone-selection bounds, propensity-score
stratified variants, population redefinition, percentile-bootstrap intervals,
and a seeded Monte Carlo engine for evaluating all of them.
"""

from .analysis import BoundSpec, evaluate_bound
from .bounds import (
    StratumSummary,
    bound_width,
    mss_bounds,
    precision_gain,
    stratified_bounds,
    stratum_summaries,
    worst_case_bounds,
)
from .errors import (
    DegenerateArm,
    EmptyArmInStratum,
    EstimationError,
    GenboundsError,
    InputInconsistent,
    InsufficientEligible,
    MissingArm,
    NotPositiveDefinite,
    NotSimulated,
    OddSampleSize,
    RankDeficient,
    ReplicateFailure,
    SchemaError,
    SeparationWarning,
    SubpopulationTooSmall,
    ZeroVariance,
    ZeroWidthBaseline,
)
from .model import (
    BoundInterval,
    OutcomeRange,
    SateEstimate,
    StudyData,
    UnitRecord,
    Z975,
    estimate_sate,
    sate_point,
    true_pate,
)
from .population import redefine_by_pscore_range, redefine_by_sd
from .propensity import (
    PropensityModel,
    StratumAssignment,
    assign_strata,
    fit_propensity,
    reduce_strata,
)
from .resampling import BootstrapBounds, bootstrap_bounds
from .simulation import (
    ExperimentResult,
    SimConfig,
    SimulatedStudy,
    correlation_matrix,
    coverage_rate,
    run_cell,
    simulate_study,
)

__version__ = "0.1.0"

__all__ = [
    "BoundInterval",
    "BoundSpec",
    "BootstrapBounds",
    "DegenerateArm",
    "EmptyArmInStratum",
    "EstimationError",
    "ExperimentResult",
    "GenboundsError",
    "InputInconsistent",
    "InsufficientEligible",
    "MissingArm",
    "NotPositiveDefinite",
    "NotSimulated",
    "OddSampleSize",
    "OutcomeRange",
    "PropensityModel",
    "RankDeficient",
    "ReplicateFailure",
    "SateEstimate",
    "SchemaError",
    "SeparationWarning",
    "SimConfig",
    "SimulatedStudy",
    "StratumAssignment",
    "StratumSummary",
    "StudyData",
    "SubpopulationTooSmall",
    "UnitRecord",
    "Z975",
    "ZeroVariance",
    "ZeroWidthBaseline",
    "assign_strata",
    "bootstrap_bounds",
    "bound_width",
    "correlation_matrix",
    "coverage_rate",
    "estimate_sate",
    "evaluate_bound",
    "fit_propensity",
    "mss_bounds",
    "precision_gain",
    "redefine_by_pscore_range",
    "redefine_by_sd",
    "reduce_strata",
    "run_cell",
    "sate_point",
    "simulate_study",
    "stratified_bounds",
    "stratum_summaries",
    "true_pate",
    "worst_case_bounds",
]
