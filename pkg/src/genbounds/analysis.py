"""End-to-end bound evaluation pipeline shared by the CLI and the bootstrap.

A :class:`BoundSpec` names one analysis: which bound framework, whether to
stratify on an estimated selection propensity, and whether to redefine the
population first.  :func:`evaluate_bound` runs the whole pipeline on a
:class:`~genbounds.model.StudyData` and returns a single interval.
"""

from dataclasses import dataclass

from .bounds import mss_bounds, stratified_bounds, stratum_summaries, worst_case_bounds
from .errors import InputInconsistent, SchemaError
from .model import BoundInterval, StudyData, sate_point
from .population import redefine_by_pscore_range, redefine_by_sd
from .propensity import assign_strata, fit_propensity, reduce_strata


@dataclass(frozen=True)
class BoundSpec:
    """One bound analysis: framework plus optional stratification/redefinition.

    framework   "worst_case" or "mss".
    strata      stratum count k, or None for unstratified bounds.
    covariates  0-based covariate columns for the propensity model (None = all).
    redefine    None, "sd:<s>" or "pscore-range".
    """

    framework: str = "worst_case"
    strata: int | None = None
    covariates: tuple[int, ...] | None = None
    redefine: str | None = None

    def __post_init__(self):
        if self.framework not in ("worst_case", "mss"):
            raise InputInconsistent(
                f"framework must be worst_case or mss, got {self.framework!r}"
            )
        if self.strata is not None and self.strata < 1:
            raise InputInconsistent("strata must be >= 1")
        if self.redefine is not None:
            parse_redefinition(self.redefine)


def parse_redefinition(text: str) -> tuple[str, float | None]:
    """Parse a redefinition spec: "sd:<s>" or "pscore-range"."""
    if text == "pscore-range":
        return "pscore-range", None
    if text.startswith("sd:"):
        try:
            s = float(text[3:])
        except ValueError:
            raise SchemaError(f"bad SD redefinition {text!r}: expected sd:<number>")
        if s <= 0:
            raise SchemaError(f"bad SD redefinition {text!r}: s must be positive")
        return "sd", s
    raise SchemaError(f"unknown redefinition {text!r}: expected sd:<s> or pscore-range")


def apply_redefinition(data: StudyData, spec: BoundSpec) -> StudyData:
    if spec.redefine is None:
        return data
    kind, s = parse_redefinition(spec.redefine)
    if kind == "sd":
        return redefine_by_sd(data, s)
    trimmed, _ = redefine_by_pscore_range(data, spec.covariates)
    return trimmed


def evaluate_bound(data: StudyData, spec: BoundSpec) -> BoundInterval:
    """Run redefinition, optional stratification, and the bound computation."""
    data = apply_redefinition(data, spec)
    sate = sate_point(data)
    if spec.strata is None:
        if spec.framework == "worst_case":
            return worst_case_bounds(sate, data.p_sel, data.outcome_range)
        return mss_bounds(sate, data.p_sel, data.outcome_range)
    model = fit_propensity(data, spec.covariates)
    assignment = assign_strata(model, data, spec.strata)
    assignment = reduce_strata(assignment, data, min_treated=1, min_control=1)
    summaries = stratum_summaries(data, assignment.labels, assignment.k)
    return stratified_bounds(summaries, spec.framework)
