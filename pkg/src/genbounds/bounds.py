"""Worst-case, monotone-selection, and stratified bounds on the population effect.

With selection probability p = Pr(Z=1), sample effect ``sate`` and outcomes
known to lie in [y_lo, y_hi], the population effect is bracketed by

    lo = sate * p + (y_lo - y_hi) * (1 - p)
    hi = sate * p + (y_hi - y_lo) * (1 - p)

whose width is exactly 2 * (y_hi - y_lo) * (1 - p).  Assuming units select
into the study expecting at least the effect of those that stay out tightens
only the upper bound, to ``sate`` itself.  Stratified variants average the
per-stratum bounds with population-share weights.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyArmInStratum, InputInconsistent, ZeroWidthBaseline
from .model import BoundInterval, OutcomeRange, StudyData

_WEIGHT_TOL = 1e-9


def _validate(sate: float, p_sel: float, outcome_range: OutcomeRange) -> None:
    if not 0.0 < p_sel <= 1.0:
        raise InputInconsistent(f"p_sel must be in (0, 1], got {p_sel}")
    if abs(sate) > outcome_range.width:
        raise InputInconsistent(
            f"|sate|={abs(sate)} exceeds the declared range width "
            f"{outcome_range.width}; the range is likely mis-declared"
        )


def worst_case_bounds(
    sate: float, p_sel: float, outcome_range: OutcomeRange
) -> BoundInterval:
    """Bounds using only the outcome range for the non-sampled counterfactuals."""
    _validate(sate, p_sel, outcome_range)
    lo = sate * p_sel + (outcome_range.y_lo - outcome_range.y_hi) * (1.0 - p_sel)
    hi = sate * p_sel + (outcome_range.y_hi - outcome_range.y_lo) * (1.0 - p_sel)
    return BoundInterval(lo=lo, hi=hi, framework="worst_case")


def mss_bounds(sate: float, p_sel: float, outcome_range: OutcomeRange) -> BoundInterval:
    """Monotone-sample-selection bounds: worst-case lower bound, upper bound = sate."""
    wc = worst_case_bounds(sate, p_sel, outcome_range)
    return BoundInterval(lo=wc.lo, hi=sate, framework="mss")


def bound_width(interval: BoundInterval) -> float:
    """hi - lo; equals 2*(y_hi-y_lo)*(1-p_sel) exactly for worst-case bounds."""
    return interval.hi - interval.lo


def precision_gain(before: BoundInterval, after: BoundInterval) -> float:
    """Percent reduction in width from ``before`` to ``after`` (may be negative)."""
    wb = bound_width(before)
    if wb == 0.0:
        raise ZeroWidthBaseline("baseline interval has zero width")
    return 100.0 * (wb - bound_width(after)) / wb


@dataclass(frozen=True)
class StratumSummary:
    """Inputs for one stratum's bound: weight N_j/N, effect, p_j, range."""

    weight: float
    sate: float
    p_sel: float
    outcome_range: OutcomeRange

    def __post_init__(self):
        if not 0.0 < self.weight <= 1.0:
            raise InputInconsistent(f"stratum weight must be in (0, 1], got {self.weight}")
        if not 0.0 < self.p_sel <= 1.0:
            raise InputInconsistent(f"stratum p_sel must be in (0, 1], got {self.p_sel}")


def stratified_bounds(
    strata: list[StratumSummary], framework: str = "worst_case"
) -> BoundInterval:
    """Population-share-weighted average of per-stratum bounds.

    Each stratum's bound is computed with its own effect, selection
    probability, and range; the overall bound is the weight_j-average of the
    per-stratum endpoints.
    """
    if not strata:
        raise InputInconsistent("need at least one stratum")
    if framework == "worst_case":
        base = worst_case_bounds
    elif framework == "mss":
        base = mss_bounds
    else:
        raise InputInconsistent(f"framework must be worst_case or mss, got {framework!r}")
    total = sum(s.weight for s in strata)
    if abs(total - 1.0) > _WEIGHT_TOL:
        raise InputInconsistent(f"stratum weights sum to {total}, expected 1")
    lo = 0.0
    hi = 0.0
    for s in strata:
        b = base(s.sate, s.p_sel, s.outcome_range)
        lo += s.weight * b.lo
        hi += s.weight * b.hi
    return BoundInterval(lo=lo, hi=hi, framework=framework + "_stratified")


def stratum_summaries(
    data: StudyData,
    labels: np.ndarray,
    k: int,
    fallback_range: OutcomeRange | None = None,
    use_observed_ranges: bool = True,
) -> list[StratumSummary]:
    """Build per-stratum summaries from stratum labels in 1..k.

    Stratum ranges are the min/max of observed outcomes among sampled units in
    the stratum, widened to the fallback (the data's declared range by
    default) when a stratum has fewer than two observed outcomes, or always
    when ``use_observed_ranges`` is False.  Population-empty strata (possible
    only under massive score ties) are skipped.
    """
    labels = np.asarray(labels)
    fallback = fallback_range or data.outcome_range
    n_total = data.n_population
    out: list[StratumSummary] = []
    for j in range(1, k + 1):
        members = labels == j
        n_j = int(members.sum())
        if n_j == 0:
            continue
        sampled = members & data.z
        n_sampled = int(sampled.sum())
        if n_sampled == 0:
            raise EmptyArmInStratum(
                f"stratum {j} has no sampled units; reduce the stratum count first"
            )
        treated = data.y[members & (data.w == 1.0)]
        control = data.y[members & (data.w == 0.0)]
        if treated.size == 0 or control.size == 0:
            raise EmptyArmInStratum(
                f"stratum {j} lacks a treatment arm; reduce the stratum count first"
            )
        observed = data.y[sampled]
        if use_observed_ranges and observed.size >= 2 and observed.min() < observed.max():
            rng_j = OutcomeRange(float(observed.min()), float(observed.max()))
        else:
            rng_j = fallback
        out.append(
            StratumSummary(
                weight=n_j / n_total,
                sate=float(treated.mean() - control.mean()),
                p_sel=n_sampled / n_j,
                outcome_range=rng_j,
            )
        )
    return out
