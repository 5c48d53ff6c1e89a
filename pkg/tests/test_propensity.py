import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from genbounds import (
    OutcomeRange,
    RankDeficient,
    SeparationWarning,
    StudyData,
    assign_strata,
    fit_propensity,
    reduce_strata,
)
from oracles import brute_force_logit_mle


def study_from_arrays(z, x, rng=None):
    """Wrap selection labels + covariates into StudyData with dummy outcomes."""
    z = np.asarray(z, dtype=bool)
    n = int(z.sum())
    w = np.full(z.shape[0], np.nan)
    y = np.full(z.shape[0], np.nan)
    sampled = np.flatnonzero(z)
    w[sampled] = 0.0
    w[sampled[: max(1, n // 2)]] = 1.0
    y[sampled] = np.linspace(-1, 1, n)
    return StudyData(
        ids=tuple(range(z.shape[0])),
        z=z,
        w=w,
        y=y,
        x=np.atleast_2d(np.asarray(x, float)),
        outcome_range=OutcomeRange(-2, 2),
    )


def test_intercept_only_recovers_log_odds():
    z = np.zeros(2000, dtype=bool)
    z[:100] = True
    data = study_from_arrays(z, np.random.default_rng(0).normal(size=(2000, 1)))
    model = fit_propensity(data, covariate_subset=())
    assert model.converged
    assert model.coefficients[0] == pytest.approx(np.log(0.05 / 0.95), abs=1e-8)
    assert np.allclose(model.scores, 0.05, atol=1e-10)


def test_constant_covariate_is_rank_deficient():
    z = np.zeros(50, dtype=bool)
    z[:10] = True
    with pytest.raises(RankDeficient):
        fit_propensity(study_from_arrays(z, np.full((50, 1), 3.0)))


def test_matches_brute_force_oracle_on_20_units():
    rng = np.random.default_rng(42)
    x = rng.normal(size=(20, 1))
    logits = -0.3 + 1.1 * x[:, 0]
    z = rng.random(20) < 1 / (1 + np.exp(-logits))
    if z.sum() < 2 or z.sum() > 18:  # keep the fixture non-degenerate
        raise AssertionError("fixture drifted; adjust the seed")
    data = study_from_arrays(z, x)
    model = fit_propensity(data)
    design = np.column_stack([np.ones(20), x[:, 0]])
    oracle = brute_force_logit_mle(design, z.astype(float))
    assert np.max(np.abs(model.coefficients - oracle)) < 1e-6


def test_score_sum_identity():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(400, 2))
    z = rng.random(400) < 1 / (1 + np.exp(-(0.2 + 0.8 * x[:, 0] - 0.5 * x[:, 1])))
    data = study_from_arrays(z, x)
    model = fit_propensity(data)
    assert model.converged
    assert model.scores.sum() == pytest.approx(z.sum(), abs=1e-6)
    assert np.all((model.scores > 0) & (model.scores < 1))


def test_order_invariance():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(120, 2))
    z = rng.random(120) < 1 / (1 + np.exp(-x[:, 0]))
    data = study_from_arrays(z, x)
    model = fit_propensity(data)
    perm = rng.permutation(120)
    permuted = study_from_arrays(z[perm], x[perm])
    model_p = fit_propensity(permuted)
    assert np.allclose(model.coefficients, model_p.coefficients, atol=1e-9)


def test_monotone_in_coefficient_sign():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(300, 1))
    z = rng.random(300) < 1 / (1 + np.exp(-1.5 * x[:, 0]))
    data = study_from_arrays(z, x)
    model = fit_propensity(data)
    assert model.coefficients[1] > 0
    order = np.argsort(x[:, 0])
    assert np.all(np.diff(model.scores[order]) >= 0)


def test_separation_clamps_and_flags():
    x = np.linspace(-2, 2, 40).reshape(-1, 1)
    z = x[:, 0] > 0
    data = study_from_arrays(z, x)
    with pytest.warns(SeparationWarning):
        model = fit_propensity(data)
    assert not model.converged
    assert np.all((model.scores >= 1e-10) & (model.scores <= 1 - 1e-10))


@given(seed=st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_score_sum_identity_property(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(150, 2))
    z = rng.random(150) < 1 / (1 + np.exp(-(0.3 * x[:, 0] + 0.6 * x[:, 1])))
    assume(2 <= z.sum() <= 148)
    data = study_from_arrays(z, x)
    model = fit_propensity(data)
    assume(model.converged)
    assert model.scores.sum() == pytest.approx(z.sum(), abs=1e-6)


# -- stratification ----------------------------------------------------------


def model_with_scores(scores, data):
    from genbounds import PropensityModel

    return PropensityModel(
        coefficients=np.zeros(1),
        scores=np.asarray(scores, float),
        converged=True,
        iterations=1,
        covariate_indices=(),
    )


def test_single_stratum():
    z = np.array([True, True, False, False])
    data = study_from_arrays(z, np.zeros((4, 1)))
    model = model_with_scores([0.1, 0.2, 0.3, 0.4], data)
    assignment = assign_strata(model, data, 1)
    assert assignment.k == 1
    assert assignment.edges.size == 0
    assert np.all(assignment.labels == 1)


def test_equally_spaced_scores_split_in_pairs():
    scores = np.arange(1, 11) / 10.0
    z = np.zeros(10, dtype=bool)
    z[[0, 9]] = True
    data = study_from_arrays(z, np.zeros((10, 1)))
    assignment = assign_strata(model_with_scores(scores, data), data, 5)
    assert list(assignment.population_counts()) == [2, 2, 2, 2, 2]
    assert list(assignment.labels) == [1, 1, 2, 2, 3, 3, 4, 4, 5, 5]


def test_tie_goes_to_lower_stratum():
    scores = np.array([0.2, 0.4, 0.4, 0.8])
    z = np.array([True, True, False, False])
    data = study_from_arrays(z, np.zeros((4, 1)))
    assignment = assign_strata(model_with_scores(scores, data), data, 2)
    edge = np.quantile(scores, 0.5)
    assert assignment.edges[0] == pytest.approx(edge)
    # both 0.4 scores sit exactly on the edge -> stratum 1
    assert list(assignment.labels) == [1, 1, 1, 2]


@given(seed=st.integers(0, 10_000), k=st.integers(2, 8))
@settings(max_examples=40, deadline=None)
def test_quantile_strata_are_balanced(seed, k):
    rng = np.random.default_rng(seed)
    n_units = 40 * k
    scores = rng.random(n_units)
    assume(np.unique(scores).size == n_units)
    z = np.zeros(n_units, dtype=bool)
    z[:4] = True
    data = study_from_arrays(z, np.zeros((n_units, 1)))
    assignment = assign_strata(model_with_scores(scores, data), data, k)
    counts = assignment.population_counts()
    assert counts.sum() == n_units
    assert counts.max() - counts.min() <= 1


def test_reduce_strata_no_op_when_all_covered():
    scores = np.arange(1, 11) / 10.0
    z = np.array([True] * 10)
    w = np.array([1.0, 0.0] * 5)
    data = StudyData(
        ids=tuple(range(10)),
        z=z,
        w=w,
        y=np.linspace(-1, 1, 10),
        x=np.zeros((10, 1)),
        outcome_range=OutcomeRange(-2, 2),
    )
    assignment = assign_strata(model_with_scores(scores, data), data, 5)
    reduced = reduce_strata(assignment, data)
    assert reduced is assignment


def test_reduce_strata_terminates_with_clustered_sample():
    # all sampled units sit in the top quintile of scores
    scores = np.linspace(0.01, 0.99, 50)
    z = np.zeros(50, dtype=bool)
    z[-4:] = True
    data = study_from_arrays(z, np.zeros((50, 1)))
    assignment = assign_strata(model_with_scores(scores, data), data, 5)
    reduced = reduce_strata(assignment, data)
    assert reduced.k < 5
    for j in range(1, reduced.k + 1):
        assert ((reduced.labels == j) & data.z).sum() >= 1


def test_reduce_strata_two_adjacent_sampled_scores():
    scores = np.linspace(0.0, 1.0, 10)
    z = np.zeros(10, dtype=bool)
    z[4:6] = True
    data = study_from_arrays(z, np.zeros((10, 1)))
    assignment = assign_strata(model_with_scores(scores, data), data, 5)
    reduced = reduce_strata(assignment, data)
    assert reduced.k <= 2
    for j in range(1, reduced.k + 1):
        assert ((reduced.labels == j) & data.z).sum() >= 1


def test_reduce_strata_arm_requirements():
    scores = np.linspace(0.0, 1.0, 12)
    z = np.ones(12, dtype=bool)
    w = np.array([1.0, 0.0] * 6)
    # make the top third all-treated so min_control forces a reduction
    w[8:] = 1.0
    w[:2] = 0.0
    data = StudyData(
        ids=tuple(range(12)),
        z=z,
        w=w,
        y=np.linspace(-1, 1, 12),
        x=np.zeros((12, 1)),
        outcome_range=OutcomeRange(-2, 2),
    )
    assignment = assign_strata(model_with_scores(scores, data), data, 3)
    reduced = reduce_strata(assignment, data, min_treated=1, min_control=1)
    for j in range(1, reduced.k + 1):
        members = reduced.labels == j
        assert (members & (data.w == 1.0)).sum() >= 1
        assert (members & (data.w == 0.0)).sum() >= 1
