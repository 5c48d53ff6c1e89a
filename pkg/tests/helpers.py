"""Small builders shared across test modules."""

import numpy as np

from genbounds import OutcomeRange, StudyData


def make_study(sample_w, sample_y, pop_x=None, sample_x=None,
               y_range=(-10.0, 10.0), y1=None, y0=None):
    """StudyData with the given sampled arms and optional non-sampled units.

    ``pop_x`` adds non-sampled units with those covariate rows.  Covariates
    default to zeros of width 1 (or the width of ``pop_x``).
    """
    sample_w = np.asarray(sample_w, float)
    sample_y = np.asarray(sample_y, float)
    n = sample_y.size
    if pop_x is None:
        pop_x = np.empty((0, 1))
    pop_x = np.atleast_2d(np.asarray(pop_x, float))
    if pop_x.size == 0:
        pop_x = pop_x.reshape(0, 1 if sample_x is None else np.atleast_2d(sample_x).shape[1])
    p = pop_x.shape[1]
    if sample_x is None:
        sample_x = np.zeros((n, p))
    sample_x = np.atleast_2d(np.asarray(sample_x, float))
    m = pop_x.shape[0]
    z = np.concatenate([np.ones(n, bool), np.zeros(m, bool)])
    w = np.concatenate([sample_w, np.full(m, np.nan)])
    y = np.concatenate([sample_y, np.full(m, np.nan)])
    x = np.vstack([sample_x, pop_x])
    return StudyData(
        ids=tuple(range(n + m)),
        z=z,
        w=w,
        y=y,
        x=x,
        outcome_range=OutcomeRange(*y_range),
        y1=y1,
        y0=y0,
    )
