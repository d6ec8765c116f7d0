# -*- coding: utf-8 -*-

"""Some utility functions"""

from __future__ import division

import numpy as np

from convreg.exceptions import InsufficientData


def cached_property(f):
    """Lazy loading decorator for object properties"""
    attr_name = '_' + f.__name__

    @property
    def wrapper(self):
        if not hasattr(self, attr_name):
            setattr(self, attr_name, f(self))
        return getattr(self, attr_name)
    return wrapper


def weighted_inner(a, b, grid_spacing=1.0):
    """Return the grid-weighted inner product sum(a[i] * b[i]) * h."""
    return float(np.dot(a, b)) * grid_spacing


def weighted_norm(v, grid_spacing=1.0):
    """Return the grid-weighted euclidean norm of v."""
    return float(np.sqrt(np.dot(v, v) * grid_spacing))


def random_stream(seed, *streams):
    """Return a numpy Generator seeded from the seed and stream numbers.

    Distinct streams of the same seed are statistically independent, so
    parallel tasks can each derive their own generator from their index.

    """
    entropy = [int(seed)] + [int(s) for s in streams]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def loglog_fit(x, y, floor=None):
    """Least-squares fit of log(y) = intercept + slope * log(x).

    Only the points where both coordinates are positive are used, unless
    a floor is given, in which case y is clipped below at that floor first.

    Returns a (slope, intercept, residual) tuple, the residual being the
    root mean square of the log-space residuals.

    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if floor is not None:
        y = np.maximum(y, floor)
    usable = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    if usable.sum() < 3:
        raise InsufficientData(
            'at least 3 positive points are needed, got %d' % usable.sum())
    logx, logy = np.log(x[usable]), np.log(y[usable])
    if np.ptp(logx) == 0:
        raise InsufficientData('abscissae are all equal')
    slope, intercept = np.polyfit(logx, logy, 1)
    residual = np.sqrt(np.mean((logy - (intercept + slope * logx)) ** 2))
    return float(slope), float(intercept), float(residual)
