"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``.  Simulation-backed
criteria share cached cells (100 replicates, seed 0), so the whole module
runs in well under two minutes.
"""

import time

import numpy as np
import pytest

from genbounds import (
    BoundSpec,
    OutcomeRange,
    SimConfig,
    StratumSummary,
    bootstrap_bounds,
    fit_propensity,
    mss_bounds,
    run_cell,
    stratified_bounds,
    worst_case_bounds,
)
from helpers import make_study
from oracles import bootstrap_oracle, brute_force_logit_mle
from test_propensity import study_from_arrays

SEED = 0
REPS = 100
DELTAS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)

_cells: dict = {}


def cell(**kwargs):
    key = tuple(sorted(kwargs.items()))
    if key not in _cells:
        _cells[key] = run_cell(SimConfig(reps=REPS, seed=SEED, **kwargs)).metrics
    return _cells[key]


def report(criterion, ok, detail):
    print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def random_triples(n=1000, seed=2024):
    rng = np.random.default_rng(seed)
    lo = rng.uniform(-10, 5, size=n)
    hi = lo + rng.uniform(0.05, 10, size=n)
    width = hi - lo
    sate = rng.uniform(-1, 1, size=n) * width
    p = rng.uniform(0.001, 1.0, size=n)
    return [(sate[i], p[i], OutcomeRange(lo[i], hi[i])) for i in range(n)]


def test_criterion_1_width_identity():
    start = time.perf_counter()
    worst = 0.0
    for sate, p, rng_ in random_triples():
        wc = worst_case_bounds(sate, p, rng_)
        worst = max(worst, abs(wc.width - 2.0 * rng_.width * (1.0 - p)))
    elapsed = time.perf_counter() - start
    report(
        1,
        worst < 1e-12 and elapsed < 1.0,
        f"max |width - 2(y_hi-y_lo)(1-p)| = {worst:.2e} over 1000 triples "
        f"in {elapsed:.2f}s",
    )


def test_criterion_2_mss_structure():
    exact = True
    for sate, p, rng_ in random_triples():
        wc = worst_case_bounds(sate, p, rng_)
        m = mss_bounds(sate, p, rng_)
        if m.lo != wc.lo or m.hi != sate:
            exact = False
            break
    report(2, exact, "mss.lo == worst_case.lo and mss.hi == sate, exact, 1000 triples")


def test_criterion_3_stratified_collapse():
    rng = np.random.default_rng(7)
    worst_single = 0.0
    for _ in range(200):
        lo = rng.uniform(-4, 0)
        r = OutcomeRange(lo, lo + rng.uniform(0.5, 5))
        sate = rng.uniform(-1, 1) * r.width
        p = rng.uniform(0.01, 1.0)
        whole = worst_case_bounds(sate, p, r)
        strat = stratified_bounds(
            [StratumSummary(weight=1.0, sate=sate, p_sel=p, outcome_range=r)]
        )
        worst_single = max(worst_single, abs(strat.lo - whole.lo), abs(strat.hi - whole.hi))

    worst_uniform = 0.0
    for _ in range(200):
        k = rng.integers(2, 7)
        r = OutcomeRange(-2.0, 2.0)
        sizes = rng.integers(50, 400, size=k)
        sampled = rng.integers(1, 40, size=k)
        total, n = sizes.sum(), sampled.sum()
        strata = [
            StratumSummary(
                weight=sizes[j] / total,
                sate=rng.uniform(-1, 1),
                p_sel=sampled[j] / sizes[j],
                outcome_range=r,
            )
            for j in range(k)
        ]
        b = stratified_bounds(strata)
        worst_uniform = max(
            worst_uniform, abs(b.width - 2.0 * r.width * (1.0 - n / total))
        )
    ok = worst_single < 1e-12 and worst_uniform < 1e-12
    report(
        3,
        ok,
        f"k=1 collapse max err {worst_single:.2e}; uniform-range width identity "
        f"max err {worst_uniform:.2e}",
    )


def test_criterion_4_logit_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(42)
    x = rng.normal(size=(20, 1))
    z = rng.random(20) < 1 / (1 + np.exp(-(-0.3 + 1.1 * x[:, 0])))
    data = study_from_arrays(z, x)
    model = fit_propensity(data)
    oracle = brute_force_logit_mle(np.column_stack([np.ones(20), x[:, 0]]), z.astype(float))
    err = float(np.max(np.abs(model.coefficients - oracle)))
    elapsed = time.perf_counter() - start
    report(4, err < 1e-6 and elapsed < 1.0,
           f"IRLS vs grid-refinement oracle: max |diff| = {err:.2e} in {elapsed:.2f}s")


def test_criterion_5_bootstrap_oracle():
    rng = np.random.default_rng(99)
    w = [1, 0] * 5
    y = list(np.round(rng.normal(size=10), 3))
    data = make_study(w, y, pop_x=rng.normal(size=(30, 1)), y_range=(-4, 4))
    boot = bootstrap_bounds(data, BoundSpec(framework="worst_case"), reps=200, seed=SEED)
    lb, ub = bootstrap_oracle(
        sample_w=data.w[data.z],
        sample_y=data.y[data.z],
        n_population=data.n_population,
        y_lo=-4.0,
        y_hi=4.0,
        framework="worst_case",
        reps=200,
        seed=SEED,
    )
    ok = boot.lb_q05 == lb and boot.ub_q95 == ub
    report(5, ok, f"seeded 200-rep bootstrap equals oracle exactly: "
                  f"[{boot.lb_q05:.6f}, {boot.ub_q95:.6f}]")


def test_criterion_6_study1_bound_positions_and_mss_gain():
    m = cell(study=1, delta=0.0)
    lo, hi = m["wc_lo_mean"], m["wc_hi_mean"]
    gain = m["gain_mss_vs_wc_mean"]
    lo_ok = abs(lo - (-3.0)) <= 0.3
    hi_ok = abs(hi - 3.0) <= 0.3
    gain_ok = 30.0 <= gain <= 50.0
    report(
        6,
        lo_ok and hi_ok and gain_ok,
        f"mean worst-case bounds [{lo:.3f}, {hi:.3f}] vs [-3.0, 3.0] +-0.3 "
        f"(lo {'ok' if lo_ok else 'out'}, hi {'ok' if hi_ok else 'out'}); "
        f"MSS {gain:.1f}% narrower vs 40 +-10 ({'ok' if gain_ok else 'out'})",
    )


def test_criterion_7_redefinition_gains():
    base = cell(study=1, delta=0.0)
    p3 = cell(study=1, delta=0.0, population="P3")
    p1 = cell(study=1, delta=0.0, population="P1")
    wc_change = 100.0 * abs(p3["wc_width_mean"] / base["wc_width_mean"] - 1.0)
    mss_change = 100.0 * abs(p3["mss_width_mean"] / base["mss_width_mean"] - 1.0)
    p1_gain = 100.0 * (1.0 - p1["mss_width_mean"] / base["wc_width_mean"])
    ok = wc_change < 1.0 and mss_change < 1.0 and 40.0 <= p1_gain <= 60.0
    report(
        7,
        ok,
        f"P3 width changes: wc {wc_change:.2f}%, mss {mss_change:.2f}% (<1%); "
        f"P1 MSS vs P worst-case gain {p1_gain:.1f}% vs 50 +-10",
    )


def test_criterion_8_stratification_gain():
    m1 = cell(study=1, delta=0.0)
    m2 = cell(study=2, delta=0.0)
    wc_gains = (m1["gain_strat_wc_vs_wc_mean"], m2["gain_strat_wc_vs_wc_mean"])
    mss_gains = (m1["gain_strat_mss_vs_mss_mean"], m2["gain_strat_mss_vs_mss_mean"])
    wc_ok = any(7.0 <= g <= 17.0 for g in wc_gains)
    mss_ok = any(g < 10.0 for g in mss_gains)
    report(
        8,
        wc_ok and mss_ok,
        f"stratified worst-case gain study1/2 = {wc_gains[0]:.1f}%/{wc_gains[1]:.1f}% "
        f"vs 12 +-5; MSS-vs-MSS gain {mss_gains[0]:.1f}%/{mss_gains[1]:.1f}% vs <10%",
    )


def test_criterion_9_coverage_contrast():
    s1 = {d: cell(study=1, delta=d) for d in DELTAS}
    s2 = {d: cell(study=2, delta=d) for d in DELTAS}
    wc1 = [s1[d]["wc_cover"] for d in DELTAS]
    mss1 = [s1[d]["mss_cover"] for d in DELTAS]
    mss2 = [s2[d]["mss_cover"] for d in DELTAS]
    ci1 = [s1[d]["ci_cover"] for d in DELTAS]
    clause_a = all(c >= 0.95 for c in wc1) and all(c >= 0.95 for c in mss1)
    clause_b = all(c < 0.35 for c in mss2)
    tail = ci1[2:]  # coverages at delta = 0.4, 0.6, 0.8, 1.0
    clause_c = all(tail[i + 1] < tail[i] for i in range(len(tail) - 1))
    report(
        9,
        clause_a and clause_b and clause_c,
        f"study1 wc cover min {min(wc1):.2f}, mss cover min {min(mss1):.2f} (>=0.95: "
        f"{'ok' if clause_a else 'out'}); study2 mss cover max {max(mss2):.2f} (<0.35: "
        f"{'ok' if clause_b else 'out'}); study1 CI coverage beyond delta 0.4 "
        f"{tail} strictly decreasing: {'ok' if clause_c else 'out'}",
    )


def test_criterion_10_bias_trend():
    details = []
    ok = True
    for study in (1, 2):
        bias = [abs(cell(study=study, delta=d)["sate_bias_mean"]) for d in DELTAS]
        inversions = sum(1 for i in range(len(bias) - 1) if bias[i + 1] < bias[i])
        details.append(
            f"study{study} |bias| {['%.3f' % b for b in bias]} inversions={inversions}"
        )
        ok = ok and inversions <= 1
    report(10, ok, "; ".join(details))


def test_criterion_11_mcse_diagnostic():
    keys = (
        "sate_mcse",
        "wc_lo_mcse",
        "wc_hi_mcse",
        "mss_lo_mcse",
        "mss_hi_mcse",
        "strat_wc_lo_mcse",
        "strat_wc_hi_mcse",
        "strat_mss_lo_mcse",
        "strat_mss_hi_mcse",
    )
    worst = 0.0
    for study in (1, 2):
        for d in (0.0, 1.0):
            m = cell(study=study, delta=d)
            worst = max(worst, max(m[k] for k in keys))
    report(11, worst < 0.05, f"max MCSE of mean bounds and SATE = {worst:.4f} (< 0.05)")


def test_criterion_12_fixed_arithmetic_reference():
    wc = worst_case_bounds(1.438, 92 / 1713, OutcomeRange(-2.0, 3.0))
    ok = abs(wc.lo - (-4.6542)) <= 1e-4 and abs(wc.hi - 4.8087) <= 1e-4
    report(
        12,
        ok,
        f"worst_case_bounds(1.438, 92/1713, [-2,3]) = [{wc.lo:.4f}, {wc.hi:.4f}] "
        f"vs [-4.6542, 4.8087] +-1e-4",
    )
