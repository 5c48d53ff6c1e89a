"""Core data model: study data, sample-level estimand, bound containers.

A study consists of N units, n of which were selected into an experiment
(z = 1).  Sampled units carry a treatment flag w and an observed outcome y;
non-sampled units carry neither.  All estimators in this package consume the
immutable :class:`StudyData` container defined here.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateArm,
    InputInconsistent,
    MissingArm,
    NotSimulated,
)

# Two-sided 97.5% normal critical value used for all confidence intervals.
Z975 = 1.959964

FRAMEWORKS = ("worst_case", "mss", "worst_case_stratified", "mss_stratified")


@dataclass(frozen=True)
class OutcomeRange:
    """Known closed range [y_lo, y_hi] containing every outcome."""

    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (np.isfinite(self.y_lo) and np.isfinite(self.y_hi)):
            raise InputInconsistent("outcome range endpoints must be finite")
        if not self.y_lo < self.y_hi:
            raise InputInconsistent(
                f"outcome range must satisfy y_lo < y_hi, got [{self.y_lo}, {self.y_hi}]"
            )

    @property
    def width(self) -> float:
        return self.y_hi - self.y_lo


@dataclass(frozen=True)
class UnitRecord:
    """One unit: selection flag z, optional treatment w / outcome y, covariates x."""

    id: object
    z: int
    w: int | None
    y: float | None
    x: tuple[float, ...]

    def __post_init__(self):
        if self.z not in (0, 1):
            raise InputInconsistent(f"unit {self.id}: z must be 0 or 1, got {self.z}")
        if self.z == 1:
            if self.w not in (0, 1) or self.y is None:
                raise InputInconsistent(
                    f"unit {self.id}: sampled units need w in {{0,1}} and an outcome"
                )
        elif self.w is not None or self.y is not None:
            raise InputInconsistent(
                f"unit {self.id}: non-sampled units cannot carry w or y"
            )


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class StudyData:
    """Immutable array-backed population with a declared outcome range.

    ``w`` and ``y`` are float arrays with NaN for non-sampled units.  ``y1``
    and ``y0`` hold both potential outcomes and are present only on simulated
    data (see :mod:`genbounds.simulation`).
    """

    ids: tuple
    z: np.ndarray
    w: np.ndarray
    y: np.ndarray
    x: np.ndarray
    outcome_range: OutcomeRange
    y1: np.ndarray | None = field(default=None)
    y0: np.ndarray | None = field(default=None)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=bool)
        w = np.asarray(self.w, dtype=float)
        y = np.asarray(self.y, dtype=float)
        x = np.asarray(self.x, dtype=float)
        n_units = z.shape[0]
        if x.ndim != 2 or x.shape[0] != n_units:
            raise InputInconsistent("x must be a (N, p) matrix aligned with z")
        if w.shape != z.shape or y.shape != z.shape or len(self.ids) != n_units:
            raise InputInconsistent("ids, z, w, y must all have length N")
        if np.isnan(w[z]).any() or np.isnan(y[z]).any():
            raise InputInconsistent("sampled units must carry w and y")
        if not (np.isnan(w[~z]).all() and np.isnan(y[~z]).all()):
            raise InputInconsistent("non-sampled units cannot carry w or y")
        if not np.isin(w[z], (0.0, 1.0)).all():
            raise InputInconsistent("w must be 0 or 1 for sampled units")
        if z.sum() < 2:
            raise InputInconsistent("need at least two sampled units")
        if not (w[z] == 1.0).any():
            raise MissingArm("no treated units in the sample")
        if not (w[z] == 0.0).any():
            raise MissingArm("no control units in the sample")
        lo, hi = self.outcome_range.y_lo, self.outcome_range.y_hi
        obs = y[z]
        if (obs < lo).any() or (obs > hi).any():
            raise InputInconsistent(
                "observed outcomes fall outside the declared outcome range"
            )
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "z", _frozen(z))
        object.__setattr__(self, "w", _frozen(w))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "x", _frozen(x))
        for name in ("y1", "y0"):
            val = getattr(self, name)
            if val is not None:
                val = np.asarray(val, dtype=float)
                if val.shape != z.shape:
                    raise InputInconsistent(f"{name} must have length N")
                object.__setattr__(self, name, _frozen(val))

    # -- sizes ------------------------------------------------------------

    @property
    def n_population(self) -> int:
        return self.z.shape[0]

    @property
    def n_sample(self) -> int:
        return int(self.z.sum())

    @property
    def p_sel(self) -> float:
        """Empirical selection probability n/N."""
        return self.n_sample / self.n_population

    @property
    def n_covariates(self) -> int:
        return self.x.shape[1]

    # -- views ------------------------------------------------------------

    @property
    def treated_y(self) -> np.ndarray:
        return self.y[self.w == 1.0]

    @property
    def control_y(self) -> np.ndarray:
        return self.y[self.w == 0.0]

    @property
    def units(self) -> list[UnitRecord]:
        """Materialize the record view (construction/IO convenience)."""
        out = []
        for i in range(self.n_population):
            sampled = bool(self.z[i])
            out.append(
                UnitRecord(
                    id=self.ids[i],
                    z=int(self.z[i]),
                    w=int(self.w[i]) if sampled else None,
                    y=float(self.y[i]) if sampled else None,
                    x=tuple(float(v) for v in self.x[i]),
                )
            )
        return out

    @classmethod
    def from_units(cls, units, outcome_range: OutcomeRange) -> "StudyData":
        if not units:
            raise InputInconsistent("need at least one unit")
        p = len(units[0].x)
        if any(len(u.x) != p for u in units):
            raise InputInconsistent("all covariate vectors must have equal length")
        ids = tuple(u.id for u in units)
        z = np.array([u.z for u in units], dtype=bool)
        w = np.array([np.nan if u.w is None else float(u.w) for u in units])
        y = np.array([np.nan if u.y is None else float(u.y) for u in units])
        x = np.array([u.x for u in units], dtype=float)
        return cls(ids=ids, z=z, w=w, y=y, x=x, outcome_range=outcome_range)

    # -- derivation of new datasets ----------------------------------------

    def subset(self, keep: np.ndarray) -> "StudyData":
        """New StudyData retaining units where ``keep`` is True (range unchanged)."""
        keep = np.asarray(keep, dtype=bool)
        return StudyData(
            ids=tuple(i for i, k in zip(self.ids, keep) if k),
            z=self.z[keep],
            w=self.w[keep],
            y=self.y[keep],
            x=self.x[keep],
            outcome_range=self.outcome_range,
            y1=None if self.y1 is None else self.y1[keep],
            y0=None if self.y0 is None else self.y0[keep],
        )

    def resample_sample(self, indices: np.ndarray) -> "StudyData":
        """Replace the sampled units by the given multiset of sample positions.

        ``indices`` index into the sampled units in population order.  w and y
        travel with the resampled units; non-sampled units are untouched.
        """
        sample_pos = np.flatnonzero(self.z)
        chosen = sample_pos[np.asarray(indices, dtype=int)]
        other = np.flatnonzero(~self.z)
        order = np.concatenate([chosen, other])
        return StudyData(
            ids=tuple(self.ids[i] for i in order),
            z=self.z[order],
            w=self.w[order],
            y=self.y[order],
            x=self.x[order],
            outcome_range=self.outcome_range,
            y1=None if self.y1 is None else self.y1[order],
            y0=None if self.y0 is None else self.y0[order],
        )


@dataclass(frozen=True)
class SateEstimate:
    """Difference-in-means estimate with unpooled normal-approximation CI."""

    estimate: float
    se: float
    ci_lo: float
    ci_hi: float


@dataclass(frozen=True)
class BoundInterval:
    """A lower/upper pair for the population effect under one framework."""

    lo: float
    hi: float
    framework: str

    def __post_init__(self):
        if self.framework not in FRAMEWORKS:
            raise InputInconsistent(f"unknown framework {self.framework!r}")
        if self.lo > self.hi:
            raise InputInconsistent(f"bounds out of order: [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


def sate_point(data: StudyData) -> float:
    """Sample effect as a bare difference of arm means.

    Unlike :func:`estimate_sate` this never needs a variance, so it accepts
    single-unit arms.
    """
    treated, control = data.treated_y, data.control_y
    if treated.size == 0 or control.size == 0:
        raise MissingArm("both treatment arms must be non-empty")
    return float(treated.mean() - control.mean())


def estimate_sate(data: StudyData) -> SateEstimate:
    """Estimate the sample average treatment effect with SE and 95% CI.

    estimate = mean(y | w=1) - mean(y | w=0)
    se       = sqrt(s1^2/n1 + s0^2/n0)   (unbiased arm variances)
    ci       = estimate +/- 1.959964 * se
    """
    treated, control = data.treated_y, data.control_y
    if treated.size == 0 or control.size == 0:
        raise MissingArm("both treatment arms must be non-empty")
    if treated.size < 2 or control.size < 2:
        raise DegenerateArm("each arm needs at least two units for a finite SE")
    est = float(treated.mean() - control.mean())
    se = float(
        np.sqrt(treated.var(ddof=1) / treated.size + control.var(ddof=1) / control.size)
    )
    return SateEstimate(
        estimate=est, se=se, ci_lo=est - Z975 * se, ci_hi=est + Z975 * se
    )


def true_pate(data: StudyData) -> float:
    """Finite-population mean of y1 - y0 over all units (simulated data only)."""
    if data.y1 is None or data.y0 is None:
        raise NotSimulated("true_pate needs potential outcomes on every unit")
    return float((data.y1 - data.y0).mean())
