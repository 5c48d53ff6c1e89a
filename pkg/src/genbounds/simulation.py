"""Monte Carlo engine: synthetic populations and the full experiment grid.

Two built-in study designs share one data-generating process.  A population
of N units carries four correlated standard-normal covariates; selection into
the n-unit experiment follows a logistic model in x1, x1^2 and x2; half the
sample is randomized to treatment.  Potential outcomes are quadratic in
(x1, x2), with a treatment boost of 1:

    y1 = g1*x1 + g2*x2 + g1*x1^2 + g2*x2^2 + 1
    y0 = g1*x1 + g2*x2

A fraction ``delta`` of the non-sampled units instead draws outcomes from the
same functional form in two unobserved heavy-tailed covariates (x5 ~ t9,
x6 ~ t3), which breaks any selection model built on x1..x4.  Outcomes are
clamped: sampled units always to [-2, 2]; non-sampled units to [-1, 1] under
study design 1 (making selection-monotonicity hold by construction) and to
[-2, 2] under design 2 (where it generally fails).

:func:`run_cell` runs ``reps`` independent replicates of one configuration
cell and aggregates effect estimates, bounds, coverage rates, precision gains
and Monte Carlo standard errors.  Replicate i draws every random quantity
from a child RNG stream keyed by (seed, i), so results are bit-identical for
a given config regardless of scheduling, and the realized sample is identical
across cells that differ only in ``delta``.
"""

from dataclasses import dataclass, fields

import numpy as np

from .bounds import (
    mss_bounds,
    stratified_bounds,
    stratum_summaries,
    worst_case_bounds,
)
from .errors import (
    EstimationError,
    InsufficientEligible,
    NotPositiveDefinite,
    OddSampleSize,
    ReplicateFailure,
    SchemaError,
)
from .model import Z975, OutcomeRange, StudyData, estimate_sate, true_pate
from .population import redefine_by_sd
from .propensity import assign_strata, expit, fit_propensity, reduce_strata

ALIGNMENT_BETA = {
    "positive": (0.4, 0.4, 1.0),
    "negative": (1.0, 0.5, 0.4),
}
DEFAULT_GAMMA = (0.1, 1.0)
POPULATIONS = ("P", "P3", "P2", "P1")
_SD_BY_POPULATION = {"P": None, "P3": 3.0, "P2": 2.0, "P1": 1.0}
COVARIATE_COMBOS = ((1, 2), (3, 4), (1, 3), (2, 4), (1, 2, 3, 4))
MAX_FAILED_FRACTION = 0.10


def correlation_matrix(rho: float) -> np.ndarray:
    """4x4 covariate correlation: corr(x1,x2)=0.5, corr(x1,x3)=corr(x2,x4)=rho,
    all other off-diagonals 0.05."""
    return np.array(
        [
            [1.0, 0.5, rho, 0.05],
            [0.5, 1.0, 0.05, rho],
            [rho, 0.05, 1.0, 0.05],
            [0.05, rho, 0.05, 1.0],
        ]
    )


def _cholesky(rho: float) -> np.ndarray:
    try:
        return np.linalg.cholesky(correlation_matrix(rho))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(
            f"correlation matrix is not positive definite for rho={rho}"
        ) from exc


@dataclass(frozen=True)
class SimConfig:
    """Full parameterization of one simulation cell.

    ``population`` selects the inference population: "P" (everyone) or
    "P3"/"P2"/"P1" (non-sampled units within 3/2/1 sample-SDs of the sample
    covariate means on every covariate).  ``range_policy`` decides the
    outcome range handed to the bound estimators: "sample" re-estimates
    [min, max] of the observed outcomes per replicate, "declared" uses
    ``declared_range`` verbatim.
    """

    study: int = 1
    N: int = 2000
    n: int = 100
    rho: float = 0.25
    delta: float = 0.0
    alignment: str = "positive"
    beta: tuple[float, float, float] | None = None
    gamma: tuple[float, float] = DEFAULT_GAMMA
    k: int = 5
    covariate_combo: tuple[int, ...] = (1, 2)
    population: str = "P"
    reps: int = 100
    seed: int = 0
    range_policy: str = "sample"
    declared_range: tuple[float, float] = (-2.0, 2.0)
    fit_squares: bool = False

    def __post_init__(self):
        if self.study not in (1, 2):
            raise SchemaError(f"study must be 1 or 2, got {self.study}")
        if not 2 <= self.n < self.N:
            raise SchemaError(f"need 2 <= n < N, got n={self.n}, N={self.N}")
        if not 0.0 <= self.delta <= 1.0:
            raise SchemaError(f"delta must be in [0, 1], got {self.delta}")
        if self.alignment not in ALIGNMENT_BETA:
            raise SchemaError(
                f"alignment must be positive or negative, got {self.alignment!r}"
            )
        if self.population not in POPULATIONS:
            raise SchemaError(
                f"population must be one of {POPULATIONS}, got {self.population!r}"
            )
        if self.k < 1:
            raise SchemaError(f"k must be >= 1, got {self.k}")
        if self.reps < 1:
            raise SchemaError(f"reps must be >= 1, got {self.reps}")
        if self.seed < 0:
            raise SchemaError(f"seed must be non-negative, got {self.seed}")
        if self.range_policy not in ("sample", "declared"):
            raise SchemaError(
                f"range_policy must be sample or declared, got {self.range_policy!r}"
            )
        combo = tuple(int(c) for c in self.covariate_combo)
        if not combo or any(c not in (1, 2, 3, 4) for c in combo):
            raise SchemaError(
                f"covariate_combo must be a non-empty subset of (1,2,3,4), got {combo}"
            )
        object.__setattr__(self, "covariate_combo", combo)
        if self.beta is not None:
            object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        object.__setattr__(
            self, "declared_range", tuple(float(v) for v in self.declared_range)
        )
        if not self.declared_range[0] < self.declared_range[1]:
            raise SchemaError("declared_range must satisfy lo < hi")
        _cholesky(self.rho)  # fail fast on a non-PD correlation matrix

    @property
    def resolved_beta(self) -> tuple[float, float, float]:
        return self.beta if self.beta is not None else ALIGNMENT_BETA[self.alignment]

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            out[f.name] = list(val) if isinstance(val, tuple) else val
        return out


@dataclass(frozen=True)
class SimulatedStudy:
    """One generated replicate: StudyData plus simulation-only per-unit fields."""

    data: StudyData
    ignorability_violated: np.ndarray
    x5: np.ndarray
    x6: np.ndarray
    n_eligible: int


def generate_covariates(config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """N draws of (x1..x4) from a mean-zero unit-variance MVN via Cholesky."""
    chol = _cholesky(config.rho)
    return rng.standard_normal((config.N, 4)) @ chol.T


def selection_probabilities(x: np.ndarray, config: SimConfig) -> np.ndarray:
    b1, b2, b3 = config.resolved_beta
    return expit(b1 * x[:, 0] + b2 * x[:, 0] ** 2 + b3 * x[:, 1])


def select_sample(
    x: np.ndarray, config: SimConfig, rng: np.random.Generator
) -> tuple[np.ndarray, int]:
    """Bernoulli eligibility from the logistic selection model, then a uniform
    subset of n eligible units becomes the sample.

    Returns (z, eligible_count).  If fewer than n units are eligible the
    eligibility draw is repeated once before the replicate is abandoned.
    """
    prob = selection_probabilities(x, config)
    eligible = rng.random(x.shape[0]) < prob
    if eligible.sum() < config.n:
        eligible = rng.random(x.shape[0]) < prob
    if eligible.sum() < config.n:
        raise InsufficientEligible(
            f"only {int(eligible.sum())} eligible units for a sample of {config.n}"
        )
    chosen = rng.choice(np.flatnonzero(eligible), size=config.n, replace=False)
    z = np.zeros(x.shape[0], dtype=bool)
    z[chosen] = True
    return z, int(eligible.sum())


def assign_treatment(z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Exactly half of the sampled units get w=1, uniformly at random."""
    sampled = np.flatnonzero(z)
    if sampled.size % 2:
        raise OddSampleSize(f"sample size {sampled.size} is odd")
    w = np.full(z.shape[0], np.nan)
    w[sampled] = 0.0
    treated = rng.choice(sampled, size=sampled.size // 2, replace=False)
    w[treated] = 1.0
    return w


def generate_outcomes(
    x: np.ndarray,
    z: np.ndarray,
    w: np.ndarray,
    config: SimConfig,
    rng: np.random.Generator,
):
    """Potential outcomes, observed outcomes, and the violation flags.

    Returns (y1, y0, y, violated, x5, x6).  A uniformly random delta-fraction
    of the non-sampled units is flagged and draws its outcomes from the
    heavy-tailed alternative model; all other units follow the base model.
    """
    g1, g2 = config.gamma
    base0 = g1 * x[:, 0] + g2 * x[:, 1]
    base1 = base0 + g1 * x[:, 0] ** 2 + g2 * x[:, 1] ** 2 + 1.0
    y1 = base1.copy()
    y0 = base0.copy()
    violated = np.zeros(x.shape[0], dtype=bool)
    x5 = np.zeros(x.shape[0])
    x6 = np.zeros(x.shape[0])
    nonsampled = np.flatnonzero(~z)
    n_flagged = int(round(config.delta * nonsampled.size))
    if n_flagged:
        flagged = rng.choice(nonsampled, size=n_flagged, replace=False)
        violated[flagged] = True
        x5 = rng.standard_t(9, size=x.shape[0])
        x6 = rng.standard_t(3, size=x.shape[0])
        alt0 = g1 * x5 + g2 * x6
        alt1 = alt0 + g1 * x5 ** 2 + g2 * x6 ** 2 + 1.0
        y1[flagged] = alt1[flagged]
        y0[flagged] = alt0[flagged]
    pop_clip = 1.0 if config.study == 1 else 2.0
    y1[z] = np.clip(y1[z], -2.0, 2.0)
    y0[z] = np.clip(y0[z], -2.0, 2.0)
    y1[~z] = np.clip(y1[~z], -pop_clip, pop_clip)
    y0[~z] = np.clip(y0[~z], -pop_clip, pop_clip)
    y = np.where(w == 1.0, y1, y0)
    y[~z] = np.nan
    return y1, y0, y, violated, x5, x6


def simulate_study(config: SimConfig, rng: np.random.Generator) -> SimulatedStudy:
    """Generate one replicate: covariates -> selection -> treatment -> outcomes.

    The RNG is consumed in that fixed order, so the realized sample (and hence
    the sample effect) is identical across configs that differ only in delta.
    """
    x = generate_covariates(config, rng)
    z, n_eligible = select_sample(x, config, rng)
    w = assign_treatment(z, rng)
    y1, y0, y, violated, x5, x6 = generate_outcomes(x, z, w, config, rng)
    if config.range_policy == "sample":
        observed = y[z]
        outcome_range = OutcomeRange(float(observed.min()), float(observed.max()))
    else:
        outcome_range = OutcomeRange(*config.declared_range)
    data = StudyData(
        ids=tuple(range(config.N)),
        z=z,
        w=w,
        y=y,
        x=x,
        outcome_range=outcome_range,
        y1=y1,
        y0=y0,
    )
    return SimulatedStudy(
        data=data,
        ignorability_violated=violated,
        x5=x5,
        x6=x6,
        n_eligible=n_eligible,
    )


def coverage_rate(intervals, truths) -> float:
    """Fraction of (lo, hi) intervals containing their paired truth."""
    intervals = list(intervals)
    truths = list(truths)
    if len(intervals) != len(truths) or not intervals:
        raise SchemaError("need one truth per interval")
    hits = sum(1 for (lo, hi), t in zip(intervals, truths) if lo <= t <= hi)
    return hits / len(intervals)


# ---------------------------------------------------------------------------
# Cell runner
# ---------------------------------------------------------------------------

_REPLICATE_FIELDS = (
    "true_pate",
    "sate",
    "sate_se",
    "sate_bias",
    "ci_cover",
    "wc_lo",
    "wc_hi",
    "wc_width",
    "wc_cover",
    "mss_lo",
    "mss_hi",
    "mss_width",
    "mss_cover",
    "gain_mss_vs_wc",
    "strat_k",
    "strat_wc_lo",
    "strat_wc_hi",
    "strat_wc_width",
    "strat_wc_cover",
    "strat_mss_lo",
    "strat_mss_hi",
    "strat_mss_width",
    "strat_mss_cover",
    "gain_strat_wc_vs_wc",
    "gain_strat_mss_vs_mss",
    "gain_strat_mss_vs_wc",
    "strat_sate",
    "strat_sate_bias",
    "strat_sate_se",
    "strat_ci_cover",
    "mss_holds_frac",
    "n_eligible",
)

# Quantities whose replicate mean is reported together with its MCSE.
_MEAN_FIELDS = (
    "true_pate",
    "sate",
    "sate_se",
    "sate_bias",
    "wc_lo",
    "wc_hi",
    "wc_width",
    "mss_lo",
    "mss_hi",
    "mss_width",
    "gain_mss_vs_wc",
    "strat_k",
    "strat_wc_lo",
    "strat_wc_hi",
    "strat_wc_width",
    "strat_mss_lo",
    "strat_mss_hi",
    "strat_mss_width",
    "gain_strat_wc_vs_wc",
    "gain_strat_mss_vs_mss",
    "gain_strat_mss_vs_wc",
    "strat_sate",
    "strat_sate_bias",
    "mss_holds_frac",
    "n_eligible",
)
_RATE_FIELDS = ("ci_cover", "wc_cover", "mss_cover", "strat_wc_cover", "strat_mss_cover")


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregated metrics for one simulation cell, plus per-replicate arrays."""

    config: SimConfig
    metrics: dict
    replicates: dict


def _stratification_data(data: StudyData, config: SimConfig):
    """Data and covariate indices for the propensity fit of this cell."""
    combo0 = tuple(c - 1 for c in config.covariate_combo)
    if not config.fit_squares:
        return data, combo0
    x_aug = np.column_stack([data.x] + [data.x[:, c] ** 2 for c in combo0])
    aug = StudyData(
        ids=data.ids,
        z=data.z,
        w=data.w,
        y=data.y,
        x=x_aug,
        outcome_range=data.outcome_range,
        y1=data.y1,
        y0=data.y0,
    )
    indices = combo0 + tuple(data.x.shape[1] + i for i in range(len(combo0)))
    return aug, indices


def _replicate_metrics(config: SimConfig, rep: int) -> dict:
    rng = np.random.default_rng([config.seed, rep])
    sim = simulate_study(config, rng)
    data = sim.data
    s = _SD_BY_POPULATION[config.population]
    if s is not None:
        data = redefine_by_sd(data, s)
    truth = true_pate(data)
    est = estimate_sate(data)
    p_sel = data.p_sel
    wc = worst_case_bounds(est.estimate, p_sel, data.outcome_range)
    mss = mss_bounds(est.estimate, p_sel, data.outcome_range)

    fit_data, fit_cols = _stratification_data(data, config)
    model = fit_propensity(fit_data, fit_cols)
    assignment = assign_strata(model, data, config.k)
    assignment = reduce_strata(assignment, data, min_treated=1, min_control=1)
    summaries = stratum_summaries(data, assignment.labels, assignment.k)
    swc = stratified_bounds(summaries, "worst_case")
    smss = stratified_bounds(summaries, "mss")

    strat_sate = sum(s_j.weight * s_j.sate for s_j in summaries)
    strat_se = _stratified_se(data, assignment.labels, assignment.k)
    if np.isnan(strat_se):
        strat_ci_cover = np.nan
    else:
        half = Z975 * strat_se
        strat_ci_cover = float(strat_sate - half <= truth <= strat_sate + half)

    sampled_effect = float((data.y1[data.z] - data.y0[data.z]).mean())
    pop_effects = data.y1[~data.z] - data.y0[~data.z]
    mss_holds = float((pop_effects <= sampled_effect).mean()) if pop_effects.size else np.nan

    return {
        "true_pate": truth,
        "sate": est.estimate,
        "sate_se": est.se,
        "sate_bias": est.estimate - truth,
        "ci_cover": float(est.ci_lo <= truth <= est.ci_hi),
        "wc_lo": wc.lo,
        "wc_hi": wc.hi,
        "wc_width": wc.width,
        "wc_cover": float(wc.contains(truth)),
        "mss_lo": mss.lo,
        "mss_hi": mss.hi,
        "mss_width": mss.width,
        "mss_cover": float(mss.contains(truth)),
        "gain_mss_vs_wc": 100.0 * (wc.width - mss.width) / wc.width,
        "strat_k": float(assignment.k),
        "strat_wc_lo": swc.lo,
        "strat_wc_hi": swc.hi,
        "strat_wc_width": swc.width,
        "strat_wc_cover": float(swc.contains(truth)),
        "strat_mss_lo": smss.lo,
        "strat_mss_hi": smss.hi,
        "strat_mss_width": smss.width,
        "strat_mss_cover": float(smss.contains(truth)),
        "gain_strat_wc_vs_wc": 100.0 * (wc.width - swc.width) / wc.width,
        "gain_strat_mss_vs_mss": 100.0 * (mss.width - smss.width) / mss.width,
        "gain_strat_mss_vs_wc": 100.0 * (wc.width - smss.width) / wc.width,
        "strat_sate": strat_sate,
        "strat_sate_bias": strat_sate - truth,
        "strat_sate_se": strat_se,
        "strat_ci_cover": strat_ci_cover,
        "mss_holds_frac": mss_holds,
        "n_eligible": float(sim.n_eligible),
    }


def _stratified_se(data: StudyData, labels: np.ndarray, k: int) -> float:
    """SE of the weighted stratified effect; NaN when any arm has < 2 units."""
    total = data.n_population
    var = 0.0
    for j in range(1, k + 1):
        members = labels == j
        n_j = int(members.sum())
        if n_j == 0:
            continue
        treated = data.y[members & (data.w == 1.0)]
        control = data.y[members & (data.w == 0.0)]
        if treated.size < 2 or control.size < 2:
            return float("nan")
        weight = n_j / total
        var += weight ** 2 * (
            treated.var(ddof=1) / treated.size + control.var(ddof=1) / control.size
        )
    return float(np.sqrt(var))


def run_cell(config: SimConfig) -> ExperimentResult:
    """Run one cell of the experiment grid: ``reps`` seeded replicates.

    Per-replicate failures (e.g. a subpopulation smaller than the sample) are
    recorded and skipped; the cell aborts if more than 10% of replicates fail.
    Aggregation uses only sums and counters, so it is independent of the order
    in which replicates are evaluated.
    """
    rows: list[dict] = []
    failures: list[str] = []
    for rep in range(config.reps):
        try:
            rows.append(_replicate_metrics(config, rep))
        except EstimationError as exc:
            failures.append(f"replicate {rep}: {exc}")
    if len(failures) > MAX_FAILED_FRACTION * config.reps:
        raise ReplicateFailure(
            f"{len(failures)} of {config.reps} replicates failed; first: {failures[0]}"
        )
    reps_ok = len(rows)
    replicates = {
        name: np.array([r[name] for r in rows]) for name in _REPLICATE_FIELDS
    }
    metrics: dict = {
        "reps_ok": float(reps_ok),
        "reps_failed": float(len(failures)),
    }
    for name in _MEAN_FIELDS:
        values = replicates[name]
        metrics[f"{name}_mean"] = float(np.nanmean(values))
        if reps_ok > 1:
            mcse = float(np.nanstd(values, ddof=1) / np.sqrt(reps_ok))
        else:
            mcse = float("nan")
        metrics[f"{name}_mcse"] = mcse
    for name in _RATE_FIELDS:
        metrics[name] = float(np.nanmean(replicates[name]))
    metrics["strat_se_defined_frac"] = float(
        np.mean(~np.isnan(replicates["strat_sate_se"]))
    )
    return ExperimentResult(config=config, metrics=metrics, replicates=replicates)


METRIC_COLUMNS = (
    ["reps_ok", "reps_failed"]
    + [f"{name}_{suffix}" for name in _MEAN_FIELDS for suffix in ("mean", "mcse")]
    + list(_RATE_FIELDS)
    + ["strat_se_defined_frac"]
)
