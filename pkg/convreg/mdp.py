# -*- coding: utf-8 -*-

"""
Morozov's discrepancy principle.

The regularization parameter is chosen a posteriori so that the residual
of the regularized solution falls in the window

    tau_lower * delta <= ||T phi_alpha - f_delta|| <= tau_upper * delta

with fixed radii 1 < tau_lower <= tau_upper. The residual being
non-decreasing in alpha, the window is bracketed by a geometric expansion
from alpha0, then reached by bisection on log(alpha). Every probe is warm
started from the previous solution.

The module also evaluates the known bounds on the selected parameter.

"""

from __future__ import division

import logging
from collections import namedtuple

import numpy as np

from convreg.exceptions import InvalidIndexFunction
from convreg.exceptions import InvalidRadii
from convreg.exceptions import NoAdmissibleAlpha
from convreg.exceptions import ProbeFailure
from convreg.exceptions import RejectedInput
from convreg.solver import DEFAULT_MAX_ITER
from convreg.solver import DEFAULT_TOL
from convreg.solver import VariationalProblem
from convreg.solver import minimize_tikhonov
from convreg.vsc import eval_index

log = logging.getLogger(__name__)

CONSEQUENCE_TOLERANCE = 1e-10
ALPHA_MAX_VARIANTS = ('printed', 'corrected')

MdpResult = namedtuple('MdpResult', [
    'alpha', 'solution', 'bracket', 'evaluations', 'probes', 'monotone', 'in_window'])

AlphaBounds = namedtuple('AlphaBounds', [
    'hm_lower',
    'new_lower',
    'alpha_max',
    'index_lower_at_delta',
    'alpha_max_printed',
    'alpha_max_corrected',
    'alpha_max_variant',
])

ConsequenceCheck = namedtuple('ConsequenceCheck', ['upper_ok', 'lower_ok', 'lhs_values'])


class SearchSettings(namedtuple('SearchSettings', [
        'alpha0', 'expansion', 'bracket_tol', 'max_probes'])):

    """Discrepancy principle search parameters (alpha0=None means delta**2)."""

    __slots__ = ()

    def __new__(cls, alpha0=None, expansion=10.0, bracket_tol=1e-3, max_probes=60):
        if alpha0 is not None and not alpha0 > 0:
            raise RejectedInput('alpha0 must be positive')
        if not expansion > 1:
            raise RejectedInput('expansion must be > 1')
        if not bracket_tol > 0:
            raise RejectedInput('bracket_tol must be positive')
        if max_probes < 2:
            raise RejectedInput('max_probes must be >= 2')
        return super(SearchSettings, cls).__new__(
            cls, alpha0, float(expansion), float(bracket_tol), int(max_probes))


class DiscrepancyRadii(object):

    """The discrepancy window radii and the noise level delta."""

    def __init__(self, tau_lower, tau_upper, delta):
        if not (1 < tau_lower <= tau_upper < np.inf):
            raise InvalidRadii(
                'radii must satisfy 1 < tau_lower <= tau_upper < inf, got '
                '(%r, %r)' % (tau_lower, tau_upper))
        if not (np.isfinite(delta) and delta > 0):
            raise InvalidRadii('delta must be positive, got %r' % delta)
        self.tau_lower = float(tau_lower)
        self.tau_upper = float(tau_upper)
        self.delta = float(delta)

    def __repr__(self):
        return 'DiscrepancyRadii(%r, %r, delta=%r)' % (
            self.tau_lower, self.tau_upper, self.delta)

    @property
    def window(self):
        return self.tau_lower * self.delta, self.tau_upper * self.delta

    def contains(self, residual):
        low, high = self.window
        return low <= residual <= high

    def distance(self, residual):
        """Distance from the residual to the window (0 inside)."""
        low, high = self.window
        return max(low - residual, residual - high, 0.0)


class _Search(object):

    """State of one discrepancy principle search."""

    def __init__(self, problem, radii, search, tol, max_iter):
        self.problem = problem
        self.radii = radii
        self.search = search
        self.tol = tol
        self.max_iter = max_iter
        self.probes = []
        self.last = None

    def probe(self, alpha):
        if len(self.probes) >= self.search.max_probes:
            raise NoAdmissibleAlpha(
                'no admissible alpha within %d probes' % self.search.max_probes,
                *self.extreme_residuals())
        x0 = self.last.phi if self.last is not None else None
        solution = minimize_tikhonov(
            self.problem.with_alpha(alpha), self.tol, self.max_iter, x0=x0)
        if not solution.converged:
            raise ProbeFailure(
                'solver did not converge at probe alpha=%.6e (defect %.3e)' % (
                    alpha, solution.optimality_defect),
                alpha=alpha, solution=solution)
        log.info('probe alpha=%.6e residual=%.6e window=[%.6e, %.6e]',
                 alpha, solution.residual_norm, *self.radii.window)
        self.probes.append((alpha, solution))
        self.last = solution
        return solution

    def extreme_residuals(self):
        if not self.probes:
            return None, None
        ordered = sorted(self.probes, key=lambda probe: probe[0])
        return ordered[0][1].residual_norm, ordered[-1][1].residual_norm

    def audit_monotonicity(self):
        """Check that the residual does not decrease along increasing alpha."""
        ordered = sorted(self.probes, key=lambda probe: probe[0])
        monotone = True
        for (a1, s1), (a2, s2) in zip(ordered, ordered[1:]):
            tolerance = 10 * self.tol * (1.0 + s1.residual_norm)
            if s2.residual_norm < s1.residual_norm - tolerance:
                monotone = False
                log.warning(
                    'residual decreases from %.6e (alpha=%.6e) to %.6e '
                    '(alpha=%.6e)', s1.residual_norm, a1, s2.residual_norm, a2)
        return monotone

    def result(self, solution, bracket):
        return MdpResult(
            alpha=solution.alpha,
            solution=solution,
            bracket=bracket,
            evaluations=len(self.probes),
            probes=tuple((alpha, s.residual_norm) for alpha, s in self.probes),
            monotone=self.audit_monotonicity(),
            in_window=self.radii.contains(solution.residual_norm))


def select_alpha_mdp(op, data, penalty, radii, search=None,
                     tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Select alpha with tau_lower * delta <= residual <= tau_upper * delta.

    Raises NoAdmissibleAlpha when delta >= ||data|| or when the window
    cannot be bracketed within the probe budget, and ProbeFailure when the
    solver does not converge at a probe.

    """
    search = search or SearchSettings()
    delta = radii.delta
    if delta >= data.norm():
        raise NoAdmissibleAlpha(
            'noise level %.6e is not below the data norm %.6e' % (delta, data.norm()))

    problem = VariationalProblem(op, data, penalty, search.alpha0 or delta ** 2)
    state = _Search(problem, radii, search, tol, max_iter)

    # geometric expansion until the window is bracketed
    alpha = problem.alpha
    low = high = None
    while True:
        solution = state.probe(alpha)
        if radii.contains(solution.residual_norm):
            return state.result(solution, (alpha, alpha))
        if solution.residual_norm < radii.window[0]:
            low = alpha
            if high is not None:
                break
            alpha *= search.expansion
        else:
            high = alpha
            if low is not None:
                break
            alpha /= search.expansion

    # bisection on log(alpha)
    while high / low - 1.0 > search.bracket_tol:
        alpha = np.sqrt(low * high)
        solution = state.probe(alpha)
        if radii.contains(solution.residual_norm):
            return state.result(solution, (low, high))
        if solution.residual_norm < radii.window[0]:
            low = alpha
        else:
            high = alpha

    # the window is narrower than the bracket resolution: the closest probe
    # is kept and reported with in_window=False
    alpha, solution = min(
        state.probes, key=lambda probe: radii.distance(probe[1].residual_norm))
    slack = search.bracket_tol * radii.window[1]
    if radii.distance(solution.residual_norm) > slack:
        raise NoAdmissibleAlpha(
            'bracket [%.6e, %.6e] collapsed without reaching the window' % (low, high),
            *state.extreme_residuals())
    return state.result(solution, (low, high))


def mdp_consequence_check(result, op, phi_true, radii):
    """Check ||T phi - T phi_true|| <= (tau_upper + 1) delta and
    (tau_lower - 1) delta <= ||T phi - T phi_true||.

    """
    discrepancy = (op.apply(result.solution.phi) - op.apply(phi_true)).norm()
    lower_lhs = (radii.tau_lower - 1.0) * radii.delta
    upper_ok = discrepancy <= (radii.tau_upper + 1.0) * radii.delta + CONSEQUENCE_TOLERANCE
    lower_ok = lower_lhs <= discrepancy + CONSEQUENCE_TOLERANCE
    return ConsequenceCheck(upper_ok, lower_ok, (discrepancy, lower_lhs))


def compute_alpha_bounds(radii, sigma, psi, J_true, alpha_max_variant='printed'):
    """Lower and upper bounds on the discrepancy principle parameter.

     * hm_lower = 1/4 (tau^2 - 1)/(tau^2 + 1) delta^2 / Psi((tau - 1) delta)
     * new_lower = sigma/4 (tau - 1) delta^2 / Psi(delta)
     * alpha_max = (8/sigma (tau - 1) Psi(delta) + J_true)^-1, or with
       (tau - 1)^-1 in place of (tau - 1) for the corrected variant
     * index_lower_at_delta = sigma/4 J_true delta^2

    where tau is tau_lower.

    """
    if not 0 < sigma <= 1:
        raise RejectedInput('sigma must be in (0, 1]')
    if J_true < 0:
        raise RejectedInput('J_true must be non-negative')
    if alpha_max_variant not in ALPHA_MAX_VARIANTS:
        raise RejectedInput('unknown alpha_max variant %r' % alpha_max_variant)
    tau, delta = radii.tau_lower, radii.delta
    psi_delta = eval_index(psi, delta)
    psi_shifted = eval_index(psi, (tau - 1.0) * delta)
    if psi_delta <= 0 or psi_shifted <= 0:
        raise InvalidIndexFunction('index function vanishes at a positive argument')

    printed = 1.0 / (8.0 / sigma * (tau - 1.0) * psi_delta + J_true)
    corrected = 1.0 / (8.0 / sigma / (tau - 1.0) * psi_delta + J_true)
    return AlphaBounds(
        hm_lower=0.25 * (tau ** 2 - 1.0) / (tau ** 2 + 1.0) * delta ** 2 / psi_shifted,
        new_lower=sigma / 4.0 * (tau - 1.0) * delta ** 2 / psi_delta,
        alpha_max=printed if alpha_max_variant == 'printed' else corrected,
        index_lower_at_delta=sigma / 4.0 * J_true * delta ** 2,
        alpha_max_printed=printed,
        alpha_max_corrected=corrected,
        alpha_max_variant=alpha_max_variant,
    )
