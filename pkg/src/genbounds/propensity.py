"""Selection-propensity estimation and propensity-score stratification.

The selection propensity s(x) = Pr(Z=1 | x) is fit by logistic regression via
iteratively reweighted least squares (Newton's method on the Bernoulli
log-likelihood).  Units are then partitioned into k strata at the j/k
quantiles of the population score distribution.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputInconsistent, RankDeficient, SeparationWarning
from .model import StudyData

IRLS_TOL = 1e-8
IRLS_MAX_ITER = 100
_SCORE_FLOOR = 1e-10  # scores outside [floor, 1-floor] signal separation


def expit(a: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    out = np.empty_like(a, dtype=float)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    ea = np.exp(a[~pos])
    out[~pos] = ea / (1.0 + ea)
    return out


@dataclass(frozen=True)
class PropensityModel:
    """Fitted coefficients (intercept first) and per-unit scores in (0, 1)."""

    coefficients: np.ndarray
    scores: np.ndarray
    converged: bool
    iterations: int
    covariate_indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, float))
        object.__setattr__(self, "scores", np.asarray(self.scores, float))


@dataclass(frozen=True)
class StratumAssignment:
    """k strata cut at ascending score edges; per-unit labels in 1..k."""

    k: int
    edges: np.ndarray
    labels: np.ndarray
    scores: np.ndarray

    def population_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k + 1)[1:]

    def sample_counts(self, data: StudyData) -> np.ndarray:
        return np.bincount(self.labels[data.z], minlength=self.k + 1)[1:]


def design_matrix(data: StudyData, covariate_subset=None) -> np.ndarray:
    """Intercept plus the selected covariate columns (0-based indices)."""
    if covariate_subset is None:
        covariate_subset = tuple(range(data.n_covariates))
    cols = [np.ones(data.n_population)]
    for idx in covariate_subset:
        cols.append(data.x[:, idx])
    return np.column_stack(cols)


def fit_propensity(data: StudyData, covariate_subset=None) -> PropensityModel:
    """Fit Pr(Z=1 | x) by IRLS on the pooled (sampled + non-sampled) units.

    Convergence when the max absolute coefficient change drops below 1e-8,
    capped at 100 iterations.  Raises RankDeficient when the design or the
    weighted normal equations are singular.  If any fitted score leaves
    [1e-10, 1 - 1e-10] during fitting, a SeparationWarning is emitted and the
    clamped fit is returned flagged as non-converged.
    """
    if covariate_subset is None:
        covariate_subset = tuple(range(data.n_covariates))
    covariate_subset = tuple(int(i) for i in covariate_subset)
    X = design_matrix(data, covariate_subset)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise RankDeficient("design matrix does not have full column rank")
    z = data.z.astype(float)
    beta = np.zeros(X.shape[1])
    converged = False
    iterations = 0
    for iterations in range(1, IRLS_MAX_ITER + 1):
        mu = expit(X @ beta)
        if (mu < _SCORE_FLOOR).any() or (mu > 1.0 - _SCORE_FLOOR).any():
            warnings.warn(
                "fitted scores reached 0/1 (separation); clamping and flagging "
                "the model as non-converged",
                SeparationWarning,
                stacklevel=2,
            )
            mu = np.clip(mu, _SCORE_FLOOR, 1.0 - _SCORE_FLOOR)
            return PropensityModel(
                coefficients=beta,
                scores=mu,
                converged=False,
                iterations=iterations,
                covariate_indices=covariate_subset,
            )
        weights = mu * (1.0 - mu)
        hessian = X.T @ (weights[:, None] * X)
        gradient = X.T @ (z - mu)
        try:
            step = np.linalg.solve(hessian, gradient)
        except np.linalg.LinAlgError as exc:
            raise RankDeficient("weighted normal equations are singular") from exc
        beta = beta + step
        if np.max(np.abs(step)) < IRLS_TOL:
            converged = True
            break
    scores = np.clip(expit(X @ beta), _SCORE_FLOOR, 1.0 - _SCORE_FLOOR)
    return PropensityModel(
        coefficients=beta,
        scores=scores,
        converged=converged,
        iterations=iterations,
        covariate_indices=covariate_subset,
    )


def assign_strata(model: PropensityModel, data: StudyData, k: int) -> StratumAssignment:
    """Cut the population score distribution at the j/k quantiles (j=1..k-1).

    Units with score exactly equal to an edge go to the lower stratum, so the
    intervals are closed on the right.  Strata are indexed 1..k in ascending
    score order.
    """
    if k < 1:
        raise InputInconsistent(f"stratum count must be >= 1, got {k}")
    scores = model.scores
    if scores.shape[0] != data.n_population:
        raise InputInconsistent("model scores are not aligned with the data")
    if k == 1:
        edges = np.empty(0)
    else:
        edges = np.quantile(scores, [j / k for j in range(1, k)])
    labels = np.searchsorted(edges, scores, side="left") + 1
    return StratumAssignment(k=k, edges=edges, labels=labels, scores=scores)


def reduce_strata(
    assignment: StratumAssignment,
    data: StudyData,
    min_treated: int = 0,
    min_control: int = 0,
) -> StratumAssignment:
    """Decrement k until every stratum has sampled units (and requested arms).

    By default a stratum only needs one sampled unit.  Callers that go on to
    compute per-stratum effects should require ``min_treated`` and
    ``min_control`` of 1 (or 2 when a per-stratum SE is needed).  k=1 always
    terminates the loop.
    """
    current = assignment
    while True:
        ok = True
        for j in range(1, current.k + 1):
            members = current.labels == j
            if (members & data.z).sum() < 1:
                ok = False
                break
            if min_treated and (members & (data.w == 1.0)).sum() < min_treated:
                ok = False
                break
            if min_control and (members & (data.w == 0.0)).sum() < min_control:
                ok = False
                break
        if ok or current.k == 1:
            return current
        k_next = current.k - 1
        if k_next == 1:
            edges = np.empty(0)
        else:
            edges = np.quantile(current.scores, [j / k_next for j in range(1, k_next)])
        labels = np.searchsorted(edges, current.scores, side="left") + 1
        current = StratumAssignment(
            k=k_next, edges=edges, labels=labels, scores=current.scores
        )
