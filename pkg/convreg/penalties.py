# -*- coding: utf-8 -*-

"""
Convex penalty functionals J, their canonical subgradients, proximal maps
and the Bregman distances they induce.

Three penalties are available:

 * quadratic: J(u) = 1/2 ||u||^2
 * smoothed_tv: J(u) = sum(sqrt((grad u)_i^2 + beta)) * h, beta > 0, with
   forward differences and a zero difference at the last sample
 * l1: J(u) = ||u||_1 = sum(|u_i|) * h

Subgradients are taken with respect to the grid-weighted inner product, so
that J(v) >= J(u) + <p, v - u> with <a, b> = sum(a_i * b_i) * h.

"""

from __future__ import division

from collections import namedtuple

import numpy as np

from convreg.exceptions import RejectedInput
from convreg.exceptions import UnsupportedOperation
from convreg.linops import Signal
from convreg.utils import random_stream
from convreg.utils import weighted_inner

ANALYTIC_GRADIENT = 'analytic_gradient'
PROX_OPTIMALITY = 'prox_optimality'
USER_SUPPLIED = 'user_supplied'

SUBGRADIENT_TOLERANCE = 1e-8

Subgradient = namedtuple('Subgradient', ['values', 'source'])


class Penalty(object):

    """Convex, non-negative penalty acting on grid vectors.

    `value`, `gradient` and `prox` act on plain arrays; `gradient` returns
    the canonical element of the subdifferential.

    """

    kind = None
    has_prox = False
    differentiable = False

    def value(self, u, h):
        raise NotImplementedError

    def gradient(self, u, h):
        raise NotImplementedError

    def prox(self, z, step):
        raise UnsupportedOperation(
            'the %s penalty has no proximal map' % self.kind)

    def to_spec(self):
        return {'kind': self.kind}

    def __repr__(self):
        return '%s()' % self.__class__.__name__

    def __eq__(self, other):
        return type(self) is type(other) and self.to_spec() == other.to_spec()

    def __ne__(self, other):
        return not self == other

    __hash__ = None


class QuadraticPenalty(Penalty):

    kind = 'quadratic'
    has_prox = True
    differentiable = True

    def value(self, u, h):
        return 0.5 * weighted_inner(u, u, h)

    def gradient(self, u, h):
        return np.array(u, dtype=float)

    def prox(self, z, step):
        return z / (1.0 + step)


class L1Penalty(Penalty):

    kind = 'l1'
    has_prox = True
    differentiable = False

    def value(self, u, h):
        return float(np.sum(np.abs(u))) * h

    def gradient(self, u, h):
        # np.sign selects 0 at the kinks, the minimal norm subgradient
        return np.sign(u)

    def prox(self, z, step):
        return np.sign(z) * np.maximum(np.abs(z) - step, 0.0)


class SmoothedTVPenalty(Penalty):

    """Smoothed total variation sum(sqrt(|grad u|^2 + beta)) * h."""

    kind = 'smoothed_tv'
    differentiable = True

    def __init__(self, beta):
        if not (np.isfinite(beta) and beta > 0):
            raise RejectedInput('smoothed_tv requires beta > 0')
        self.beta = float(beta)

    def __repr__(self):
        return 'SmoothedTVPenalty(beta=%r)' % self.beta

    def _differences(self, u, h):
        return np.diff(u) / h

    def value(self, u, h):
        d = self._differences(u, h)
        # the replicated boundary contributes sqrt(0 + beta)
        return (float(np.sum(np.sqrt(d * d + self.beta)))
                + np.sqrt(self.beta)) * h

    def gradient(self, u, h):
        d = self._differences(u, h)
        w = d / np.sqrt(d * d + self.beta)
        padded = np.concatenate(([0.0], w, [0.0]))
        return -np.diff(padded) / h

    def to_spec(self):
        return {'kind': self.kind, 'beta': self.beta}


def penalty_from_spec(spec):
    """Build a Penalty from its configuration dict."""
    kind = spec.get('kind')
    if kind == 'quadratic':
        return QuadraticPenalty()
    if kind == 'l1':
        return L1Penalty()
    if kind == 'smoothed_tv':
        return SmoothedTVPenalty(spec.get('beta', 0.01))
    raise RejectedInput('unknown penalty kind %r' % kind)


def eval_penalty(J, phi):
    """Return J(phi) >= 0."""
    return J.value(phi.values, phi.grid_spacing)


def subgradient(J, phi):
    """Return the canonical element of the subdifferential of J at phi."""
    return Subgradient(
        phi.like(J.gradient(phi.values, phi.grid_spacing)), ANALYTIC_GRADIENT)


def prox(J, z, step):
    """Return argmin_u 1/2 ||u - z||^2 + step * J(u)."""
    if not step > 0:
        raise RejectedInput('prox step must be positive')
    return z.like(J.prox(z.values, step))


def bregman(J, u, u_star, p):
    """Bregman distance D_J(u, u*) = J(u) - J(u*) - <p, u - u*>.

    p must be a subgradient of J at u_star.

    """
    return eval_penalty(J, u) - eval_penalty(J, u_star) - p.values.inner(u - u_star)


def bregman_symmetric(J, u, u_star, p_u, p_star):
    """Symmetric Bregman distance <p_u - p_star, u - u*>."""
    return (p_u.values - p_star.values).inner(u - u_star)


def subgradient_defect(J, u, p, samples=50, seed=0, scale=1.0):
    """Smallest value of J(v) - J(u) - <p, v - u> over sampled points v.

    The points are drawn around u with gaussian perturbations of the given
    scale. A result >= -1e-8 witnesses p as a subgradient of J at u.

    """
    rng = random_stream(seed)
    base = eval_penalty(J, u)
    worst = np.inf
    for _ in range(samples):
        v = u.like(u.values + scale * rng.standard_normal(len(u)))
        gap = eval_penalty(J, v) - base - p.values.inner(v - u)
        worst = min(worst, gap)
    return float(worst)


def is_subgradient(J, u, p, samples=50, seed=0, scale=1.0):
    return subgradient_defect(J, u, p, samples, seed, scale) >= -SUBGRADIENT_TOLERANCE


def user_subgradient(values, grid_spacing=1.0):
    """Wrap user provided values as a Subgradient."""
    if not isinstance(values, Signal):
        values = Signal(values, grid_spacing)
    return Subgradient(values, USER_SUPPLIED)
