"""Population redefinition: covariate-SD trimming and propensity-range trimming.

Both operators shrink the non-sampled side of the population (sampled units
are never dropped), which raises the selection probability n/N and therefore
tightens any bound whose width scales with 1 - n/N.
"""

import numpy as np

from .errors import InputInconsistent, SubpopulationTooSmall, ZeroVariance
from .model import StudyData
from .propensity import PropensityModel, fit_propensity


def _check_size(data: StudyData) -> StudyData:
    retained_nonsampled = data.n_population - data.n_sample
    if retained_nonsampled < data.n_sample:
        raise SubpopulationTooSmall(
            f"redefinition left {retained_nonsampled} non-sampled units, fewer "
            f"than the {data.n_sample} sampled units"
        )
    return data


def redefine_by_sd(data: StudyData, s: float) -> StudyData:
    """Keep non-sampled units within s sample-SDs of the sample mean on every covariate.

    The rule is a per-covariate conjunction: a non-sampled unit is retained iff
    |x_ij - mean_j| <= s * sd_j holds for all covariates j, with mean and SD
    computed over the sampled units (SD uses the n-1 denominator).  Sampled
    units are always retained and the outcome range is unchanged.
    """
    if s <= 0:
        raise InputInconsistent(f"s must be positive, got {s}")
    sample_x = data.x[data.z]
    mean = sample_x.mean(axis=0)
    sd = sample_x.std(axis=0, ddof=1)
    if (sd == 0).any():
        bad = int(np.flatnonzero(sd == 0)[0])
        raise ZeroVariance(f"sample covariate {bad + 1} is constant")
    within = np.all(np.abs(data.x - mean) <= s * sd, axis=1)
    keep = data.z | within
    return _check_size(data.subset(keep))


def redefine_by_pscore_range(
    data: StudyData, covariate_subset=None
) -> tuple[StudyData, PropensityModel]:
    """Trim non-sampled units whose score leaves the sample score range, then refit.

    Steps: (1) fit the selection propensity on the full data; (2) drop
    non-sampled units with scores outside [min, max] of the sampled units'
    scores; (3) refit the model once on the retained units.  Returns the
    retained data together with the refitted model.
    """
    model = fit_propensity(data, covariate_subset)
    sample_scores = model.scores[data.z]
    lo, hi = sample_scores.min(), sample_scores.max()
    keep = data.z | ((model.scores >= lo) & (model.scores <= hi))
    trimmed = _check_size(data.subset(keep))
    refitted = fit_propensity(trimmed, covariate_subset)
    return trimmed, refitted
