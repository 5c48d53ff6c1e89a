"""Exception hierarchy shared across the package."""


class GenboundsError(Exception):
    """Base class for all package errors."""


class SchemaError(GenboundsError):
    """Input file or configuration does not conform to the documented schema."""


class EstimationError(GenboundsError):
    """Base class for failures inside an estimation routine."""


class MissingArm(EstimationError):
    """A treatment arm contains no sampled units."""


class DegenerateArm(EstimationError):
    """A treatment arm has a single unit, so its variance is undefined."""


class NotSimulated(EstimationError):
    """Operation requires potential outcomes, which only simulated data carry."""


class RankDeficient(EstimationError):
    """Design matrix (or weighted normal equations) is singular."""


class InputInconsistent(EstimationError):
    """Inputs violate a documented precondition (e.g. effect exceeds range width)."""


class ZeroWidthBaseline(EstimationError):
    """Precision gain is undefined against a zero-width baseline interval."""


class EmptyArmInStratum(EstimationError):
    """A stratum lacks a treatment arm; reduce the stratum count first."""


class ZeroVariance(EstimationError):
    """A sample covariate is constant, so SD-based trimming is undefined."""


class SubpopulationTooSmall(EstimationError):
    """Redefinition left fewer non-sampled units than sampled units."""


class InsufficientEligible(EstimationError):
    """Fewer eligible units than the requested sample size, after one redraw."""


class OddSampleSize(EstimationError):
    """Half/half treatment assignment requires an even sample size."""


class NotPositiveDefinite(EstimationError):
    """Requested covariate correlation matrix is not positive definite."""


class ReplicateFailure(EstimationError):
    """A resampling replicate could not be completed within the retry budget."""


class SeparationWarning(UserWarning):
    """Fitted selection probabilities reached 0/1; fit was clamped and flagged."""
