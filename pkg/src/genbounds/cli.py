"""Command-line interface: ``genbounds bounds|simulate|bootstrap``.

Exit codes: 0 success, 1 input/validation error, 2 computation failure.
"""

import argparse
import sys

from .analysis import BoundSpec, apply_redefinition, evaluate_bound
from .bounds import mss_bounds, stratified_bounds, stratum_summaries, worst_case_bounds
from .errors import DegenerateArm, EstimationError, GenboundsError, SchemaError
from .io import (
    FORMAT_VERSION,
    config_hash,
    load_config_grid,
    read_study_csv,
    write_table,
)
from .model import OutcomeRange, estimate_sate, sate_point
from .propensity import assign_strata, fit_propensity, reduce_strata
from .resampling import bootstrap_bounds
from .simulation import METRIC_COLUMNS, run_cell


def _parse_y_range(text: str) -> OutcomeRange:
    parts = text.split(",")
    if len(parts) != 2:
        raise SchemaError(f"--y-range expects LO,HI, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise SchemaError(f"--y-range expects two numbers, got {text!r}")
    return OutcomeRange(lo, hi)


def _parse_covariates(text: str | None) -> tuple[int, ...] | None:
    """1-based x-column list ("1,2") to 0-based indices."""
    if text is None:
        return None
    try:
        cols = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise SchemaError(f"--covariates expects integers, got {text!r}")
    if any(c < 1 for c in cols):
        raise SchemaError("--covariates indices are 1-based")
    return tuple(c - 1 for c in cols)


def _emit(args, columns, rows, metadata):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            write_table(handle, columns, rows, metadata)
    else:
        write_table(sys.stdout, columns, rows, metadata)


def _population_row(label, data, strata, covariates):
    sate = sate_point(data)
    try:
        est = estimate_sate(data)
        se, ci_lo, ci_hi = est.se, est.ci_lo, est.ci_hi
    except DegenerateArm:
        se = ci_lo = ci_hi = ""
    wc = worst_case_bounds(sate, data.p_sel, data.outcome_range)
    mss = mss_bounds(sate, data.p_sel, data.outcome_range)
    row = [
        label,
        data.n_population,
        data.n_sample,
        data.p_sel,
        sate,
        se,
        ci_lo,
        ci_hi,
        wc.lo,
        wc.hi,
        wc.width,
        mss.lo,
        mss.hi,
        mss.width,
    ]
    if strata is not None:
        model = fit_propensity(data, covariates)
        assignment = assign_strata(model, data, strata)
        assignment = reduce_strata(assignment, data, min_treated=1, min_control=1)
        summaries = stratum_summaries(data, assignment.labels, assignment.k)
        swc = stratified_bounds(summaries, "worst_case")
        smss = stratified_bounds(summaries, "mss")
        row += [assignment.k, swc.lo, swc.hi, swc.width, smss.lo, smss.hi, smss.width]
    return row


def cmd_bounds(args) -> int:
    outcome_range = _parse_y_range(args.y_range)
    covariates = _parse_covariates(args.covariates)
    data = read_study_csv(args.csv, outcome_range)
    columns = [
        "population",
        "N",
        "n",
        "p_sel",
        "sate",
        "sate_se",
        "ci_lo",
        "ci_hi",
        "wc_lo",
        "wc_hi",
        "wc_width",
        "mss_lo",
        "mss_hi",
        "mss_width",
    ]
    if args.strata is not None:
        columns += [
            "strat_k",
            "strat_wc_lo",
            "strat_wc_hi",
            "strat_wc_width",
            "strat_mss_lo",
            "strat_mss_hi",
            "strat_mss_width",
        ]
    rows = [_population_row("P", data, args.strata, covariates)]
    for redef in args.redefine or []:
        spec = BoundSpec(redefine=redef, covariates=covariates)
        trimmed = apply_redefinition(data, spec)
        rows.append(_population_row(redef, trimmed, args.strata, covariates))
    meta = {
        "version": FORMAT_VERSION,
        "command": "bounds",
        "y_range": args.y_range,
        "se_method": "unpooled-normal",
        "config": config_hash(
            {
                "y_range": args.y_range,
                "strata": args.strata,
                "covariates": args.covariates,
                "redefine": args.redefine or [],
            }
        ),
    }
    _emit(args, columns, rows, meta)
    return 0


def cmd_simulate(args) -> int:
    configs = load_config_grid(args.config)
    if args.seed is not None:
        configs = [
            type(cfg)(**{**cfg.to_dict(), "seed": args.seed}) for cfg in configs
        ]
    config_cols = [
        "study",
        "N",
        "n",
        "rho",
        "delta",
        "alignment",
        "beta",
        "gamma",
        "k",
        "covariate_combo",
        "population",
        "reps",
        "seed",
        "range_policy",
        "declared_range",
        "fit_squares",
    ]
    columns = config_cols + METRIC_COLUMNS
    rows = []
    for cfg in configs:
        result = run_cell(cfg)
        d = cfg.to_dict()
        row = []
        for name in config_cols:
            value = d[name]
            if isinstance(value, list):
                value = ";".join(str(v) for v in value)
            elif value is None:
                value = ""
            row.append(value)
        row += [result.metrics[m] for m in METRIC_COLUMNS]
        rows.append(row)
    meta = {
        "version": FORMAT_VERSION,
        "command": "simulate",
        "cells": len(configs),
        "seed": args.seed if args.seed is not None else "per-config",
        "se_method": "unpooled-normal",
        "config": config_hash([c.to_dict() for c in configs]),
    }
    _emit(args, columns, rows, meta)
    return 0


def cmd_bootstrap(args) -> int:
    outcome_range = _parse_y_range(args.y_range)
    covariates = _parse_covariates(args.covariates)
    data = read_study_csv(args.csv, outcome_range)
    spec = BoundSpec(
        framework=args.framework,
        strata=args.strata,
        covariates=covariates,
        redefine=args.redefine,
    )
    point = evaluate_bound(data, spec)
    boot = bootstrap_bounds(data, spec, reps=args.reps, seed=args.seed)
    columns = [
        "framework",
        "point_lo",
        "point_hi",
        "lb_q05",
        "ub_q95",
        "replicates",
        "failures",
    ]
    rows = [
        [
            point.framework,
            point.lo,
            point.hi,
            boot.lb_q05,
            boot.ub_q95,
            boot.replicates,
            boot.failures,
        ]
    ]
    meta = {
        "version": FORMAT_VERSION,
        "command": "bootstrap",
        "seed": args.seed,
        "config": config_hash(
            {
                "y_range": args.y_range,
                "framework": args.framework,
                "strata": args.strata,
                "covariates": args.covariates,
                "redefine": args.redefine,
                "reps": args.reps,
                "seed": args.seed,
            }
        ),
    }
    _emit(args, columns, rows, meta)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genbounds",
        description="Nonparametric bounds on population treatment effects.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", help="point bounds from a unit-level CSV")
    p_bounds.add_argument("csv")
    p_bounds.add_argument("--y-range", required=True, help="declared outcome range LO,HI")
    p_bounds.add_argument("--strata", type=int, default=None)
    p_bounds.add_argument("--covariates", default=None, help="1-based x columns, e.g. 1,2")
    p_bounds.add_argument(
        "--redefine",
        action="append",
        help="population redefinition: sd:<s> or pscore-range (repeatable)",
    )
    p_bounds.add_argument("--seed", type=int, default=0)
    p_bounds.add_argument("--out", default=None)
    p_bounds.set_defaults(func=cmd_bounds)

    p_sim = sub.add_parser("simulate", help="run a simulation grid from a JSON config")
    p_sim.add_argument("config")
    p_sim.add_argument("--seed", type=int, default=None, help="override every cell's seed")
    p_sim.add_argument("--out", default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_boot = sub.add_parser("bootstrap", help="percentile-bootstrap a bound")
    p_boot.add_argument("csv")
    p_boot.add_argument("--y-range", required=True)
    p_boot.add_argument(
        "--framework", choices=("worst_case", "mss"), default="worst_case"
    )
    p_boot.add_argument("--strata", type=int, default=None)
    p_boot.add_argument("--covariates", default=None)
    p_boot.add_argument("--redefine", default=None)
    p_boot.add_argument("--reps", type=int, default=1000)
    p_boot.add_argument("--seed", type=int, default=0)
    p_boot.add_argument("--out", default=None)
    p_boot.set_defaults(func=cmd_bootstrap)
    return parser


def _merge_y_range(argv: list[str]) -> list[str]:
    """Join ["--y-range", "-1,1"] into ["--y-range=-1,1"] so argparse does not
    mistake a negative lower endpoint for an option."""
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "--y-range" and i + 1 < len(argv):
            out.append(f"--y-range={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_merge_y_range(list(argv)))
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EstimationError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 2
    except GenboundsError as exc:  # pragma: no cover - defensive catch-all
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
