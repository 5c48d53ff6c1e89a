"""Percentile-bootstrap intervals for any bound framework.

Each replicate resamples the n sampled units with replacement (treatment
labels and outcomes travel together; non-sampled units are fixed), recomputes
the requested bound end to end, and the interval is reported as the 0.05
quantile of the lower bounds and the 0.95 quantile of the upper bounds.
Quantiles are order statistics with linear interpolation (type 7), so results
are exactly reproducible across implementations given the same seed.
"""

from dataclasses import dataclass

import numpy as np

from .analysis import BoundSpec, evaluate_bound
from .errors import EstimationError, ReplicateFailure
from .model import StudyData


@dataclass(frozen=True)
class BootstrapBounds:
    """0.05/0.95 quantiles of the bootstrapped bound endpoints."""

    lb_q05: float
    ub_q95: float
    replicates: int
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    failures: int

    def __post_init__(self):
        object.__setattr__(self, "lower_bounds", np.asarray(self.lower_bounds, float))
        object.__setattr__(self, "upper_bounds", np.asarray(self.upper_bounds, float))


def bootstrap_bounds(
    data: StudyData,
    spec: BoundSpec,
    reps: int,
    seed: int,
    max_retries: int = 100,
) -> BootstrapBounds:
    """Percentile bootstrap of the bound named by ``spec``.

    Replicate i draws from its own child RNG stream seeded by (seed, i), so
    output is deterministic regardless of execution order.  A replicate whose
    resample cannot be evaluated (e.g. it lacks a treatment arm) is redrawn
    from the same stream up to ``max_retries`` times, counting each redraw as
    a failure; exhausting the budget aborts.
    """
    if reps < 1:
        raise ReplicateFailure(f"reps must be >= 1, got {reps}")
    n = data.n_sample
    lows = np.empty(reps)
    highs = np.empty(reps)
    failures = 0
    for i in range(reps):
        rng = np.random.default_rng([seed, i])
        for _ in range(max_retries):
            indices = rng.integers(0, n, size=n)
            try:
                replicate = data.resample_sample(indices)
                interval = evaluate_bound(replicate, spec)
            except EstimationError:
                failures += 1
                continue
            lows[i] = interval.lo
            highs[i] = interval.hi
            break
        else:
            raise ReplicateFailure(
                f"replicate {i} failed {max_retries} consecutive resamples"
            )
    return BootstrapBounds(
        lb_q05=float(np.quantile(lows, 0.05)),
        ub_q95=float(np.quantile(highs, 0.95)),
        replicates=reps,
        lower_bounds=lows,
        upper_bounds=highs,
        failures=failures,
    )
