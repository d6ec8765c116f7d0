# -*- coding: utf-8 -*-

"""Deterministic test signals used as J-minimizing solutions."""

from __future__ import division

import numpy as np

from convreg.exceptions import ConfigError
from convreg.linops import Signal


def step(dim):
    """0 on the first half of the grid, 1 on the second one."""
    values = np.zeros(dim)
    values[dim // 2:] = 1.0
    return values


def bump(dim):
    """1 on the middle half of the grid, 0 elsewhere."""
    values = np.zeros(dim)
    quarter = dim // 4
    values[quarter:dim - quarter] = 1.0
    return values


def ramp(dim):
    """Linear ramp from 0 at the first sample to 1 at the last one."""
    if dim == 1:
        return np.zeros(1)
    return np.linspace(0.0, 1.0, dim)


def decay(dim):
    """Positive samples halving every 4 grid points, from 1 down."""
    return 0.5 ** (np.arange(dim) / 4.0)


PHANTOMS = {
    'step': step,
    'bump': bump,
    'ramp': ramp,
    'decay': decay,
}


def make_phantom(name, dim, grid_spacing=1.0):
    if name not in PHANTOMS:
        raise ConfigError(
            'unknown phantom %r (expected one of %s)' % (
                name, ', '.join(sorted(PHANTOMS))),
            path='phantom.name')
    if dim < 1:
        raise ConfigError('phantom dimension must be >= 1', path='phantom.dim')
    return Signal(PHANTOMS[name](int(dim)), grid_spacing)
