# -*- coding: utf-8 -*-

"""
Index functions, variational source condition (VSC) coefficients, and the
numerical verification of the rate inequalities obeyed by the discrepancy
principle.

Every inequality is evaluated as a Check(holds, lhs, rhs, slack) with
slack = rhs - lhs, and holds is True when slack >= -1e-8.

"""

from __future__ import division

import logging
from collections import OrderedDict
from collections import namedtuple

import numpy as np

from convreg.exceptions import IncompleteRecord
from convreg.exceptions import InsufficientData
from convreg.exceptions import InvalidIndexFunction
from convreg.exceptions import InvalidRadii
from convreg.utils import loglog_fit

log = logging.getLogger(__name__)

CHECK_TOLERANCE = 1e-8
VSC_CONDITION_TOLERANCE = 1e-10
KAPPA_MIN = 1e-3
# relative level of Bregman distances indistinguishable from rounding
ROUNDING_LEVEL = 1e-12

# the flags gating a sweep verdict, in report and CSV order
CHECKLIST_FLAGS = (
    'vsc_condition',
    'vsc_inequality',
    'jdiff_psi',
    'jdiff_delta2',
    'bregman_forward',
    'bregman_reverse',
    'bregman_symmetric',
    'reverse_vs_index',
)

PSI_FIT_TARGETS = ('bregman_fwd', 'bregman_rev', 'bregman_sym', 'vsc_lhs')

VscConstants = namedtuple('VscConstants', ['sigma_tilde', 'C'])
VscConditionCheck = namedtuple('VscConditionCheck', ['holds', 'lhs', 'rhs'])
PsiFit = namedtuple('PsiFit', ['psi', 'residual', 'clamped', 'raw_kappa'])
Check = namedtuple('Check', ['holds', 'lhs', 'rhs', 'slack'])


class IndexFunction(object):

    """Concave power index function Psi(t) = c * t ** kappa.

    :param c: positive scale
    :param kappa: exponent in (0, 1], making Psi concave and increasing

    """

    kind = 'power'

    def __init__(self, c, kappa):
        if not (np.isfinite(c) and c > 0):
            raise InvalidIndexFunction('index function scale must be positive')
        if not (0 < kappa <= 1):
            raise InvalidIndexFunction('index function exponent must be in (0, 1]')
        self.c = float(c)
        self.kappa = float(kappa)

    def __call__(self, t):
        return eval_index(self, t)

    def __repr__(self):
        return 'IndexFunction(c=%r, kappa=%r)' % (self.c, self.kappa)

    def __eq__(self, other):
        return (isinstance(other, IndexFunction)
                and (self.c, self.kappa) == (other.c, other.kappa))

    def __ne__(self, other):
        return not self == other

    __hash__ = None

    def scaled(self, factor):
        return IndexFunction(self.c * factor, self.kappa)

    def to_dict(self):
        return {'kind': self.kind, 'c': self.c, 'kappa': self.kappa}

    @classmethod
    def from_dict(cls, data):
        return cls(data['c'], data['kappa'])


def eval_index(psi, t):
    """Return Psi(t) = c * t ** kappa, for t >= 0."""
    if t < 0:
        raise InvalidIndexFunction('index functions are defined on [0, inf)')
    if t == 0:
        return 0.0
    return psi.c * t ** psi.kappa


def vsc_constants(radii):
    """sigma~ = (tau_lower - 1) / tau_upper and C = tau_upper / (tau_lower - 1)."""
    tau_lower, tau_upper = radii.tau_lower, radii.tau_upper
    if not (1 < tau_lower <= tau_upper < np.inf):
        raise InvalidRadii('radii must satisfy 1 < tau_lower <= tau_upper < inf')
    return VscConstants(
        sigma_tilde=(tau_lower - 1.0) / tau_upper,
        C=tau_upper / (tau_lower - 1.0))


def fit_index_power(points, envelope=False, floor=0.0):
    """Fit Psi(delta) = c * delta ** kappa on (delta, value) points.

    kappa is the least-squares slope in log-log scale, clamped to (0, 1] so
    that Psi stays concave; when clamped, c is refitted for the clamped
    exponent. With envelope, c is raised so that Psi dominates every point.
    Values at or below floor are rounding noise and are left out.

    """
    usable = [(d, v) for d, v in points if d > 0 and v > max(floor, 0.0)]
    if len(usable) < 3:
        raise InsufficientData(
            'at least 3 points above %g are needed to fit an index function, '
            'got %d' % (floor, len(usable)))
    deltas = np.array([d for d, _ in usable])
    values = np.array([v for _, v in usable])
    raw_kappa, intercept, _ = loglog_fit(deltas, values)

    kappa, clamped = raw_kappa, False
    if raw_kappa > 1:
        log.warning('fitted exponent %.4f clamped to 1 (concavity)', raw_kappa)
        kappa, clamped = 1.0, True
    elif raw_kappa < KAPPA_MIN:
        log.warning('fitted exponent %.4f clamped to %g (monotonicity)',
                    raw_kappa, KAPPA_MIN)
        kappa, clamped = KAPPA_MIN, True

    offsets = np.log(values) - kappa * np.log(deltas)
    if envelope:
        log_c = offsets.max()
    elif clamped:
        log_c = offsets.mean()
    else:
        log_c = intercept
    residual = float(np.sqrt(np.mean((offsets - log_c) ** 2)))
    return PsiFit(IndexFunction(np.exp(log_c), kappa), residual, clamped, raw_kappa)


def check_vsc_condition(p_true, phi_true, phi_reg, constants, psi, delta):
    """Evaluate <p, phi_true - phi_reg> <= C * Psi(delta)."""
    lhs = p_true.values.inner(phi_true - phi_reg)
    rhs = constants.C * eval_index(psi, delta)
    return VscConditionCheck(lhs <= rhs + VSC_CONDITION_TOLERANCE, lhs, rhs)


def make_check(lhs, rhs):
    slack = float(rhs - lhs)
    return Check(slack >= -CHECK_TOLERANCE, float(lhs), float(rhs), slack)


class TheoremChecklist(object):

    """The checks of one sweep record.

    `entries` holds the CHECKLIST_FLAGS checks; `diagnostics` holds the
    auxiliary inequalities, reported but not part of the verdict.

    """

    def __init__(self, entries, diagnostics=None):
        self.entries = OrderedDict(entries)
        self.diagnostics = OrderedDict(diagnostics or ())

    def __getitem__(self, name):
        if name in self.entries:
            return self.entries[name]
        return self.diagnostics[name]

    def flags(self):
        return OrderedDict((name, check.holds) for name, check in self.entries.items())

    def all_hold(self):
        return all(check.holds for check in self.entries.values())

    def to_dict(self):
        def dump(checks):
            return OrderedDict(
                (name, OrderedDict(zip(Check._fields, check)))
                for name, check in checks.items())
        return OrderedDict([
            ('checks', dump(self.entries)),
            ('diagnostics', dump(self.diagnostics)),
        ])

    @classmethod
    def from_dict(cls, data):
        def load(checks):
            return [(name, Check(**values)) for name, values in checks.items()]
        return cls(load(data['checks']), load(data.get('diagnostics', {})))


def check_theorems(record, constants, psi, radii, bounds=None):
    """Evaluate every rate inequality on a sweep record.

    The record must carry delta, alpha, phi_true, phi_reg, both subgradients
    p_true and p_reg, the penalty values, the Bregman distances, the
    residual and the image space discrepancy ||T phi_reg - T phi_true||.
    When the AlphaBounds of the record are given, the regularization
    parameter bounds are checked as diagnostics as well.

    """
    if getattr(record, 'p_true', None) is None or getattr(record, 'p_reg', None) is None:
        raise IncompleteRecord('the record has no subgradients')
    if getattr(record, 'phi_reg', None) is None or getattr(record, 'phi_true', None) is None:
        raise IncompleteRecord('the record has no solutions')

    sigma, C = constants.sigma_tilde, constants.C
    tau_lower, tau_upper = radii.tau_lower, radii.tau_upper
    delta, alpha = record.delta, record.alpha
    psi_delta = eval_index(psi, delta)
    psi_discrepancy = eval_index(psi, record.discrepancy_norm)
    jdiff = record.J_reg - record.J_true
    vsc_lhs = record.p_true.values.inner(record.phi_true - record.phi_reg)

    forward_constant = (2.0 / sigma) / (tau_lower - 1.0) + (tau_upper + 1.0)
    reverse_constant = ((tau_upper + 1.0)
                        + (4.0 / sigma) * tau_upper * (tau_upper + 1.0) / (tau_lower - 1.0))

    entries = [
        ('vsc_condition', make_check(vsc_lhs, C * psi_delta)),
        ('vsc_inequality', make_check(
            sigma * record.bregman_fwd, jdiff + psi_discrepancy)),
        ('jdiff_psi', make_check(
            jdiff, (2.0 / sigma) / (tau_lower - 1.0) * psi_delta)),
        ('jdiff_delta2', make_check(
            jdiff, (1.0 + tau_upper) ** 2 * delta ** 2 / alpha)),
        ('bregman_forward', make_check(
            record.bregman_fwd, forward_constant * psi_delta)),
        ('bregman_reverse', make_check(
            record.bregman_rev, reverse_constant * psi_delta)),
        ('bregman_symmetric', make_check(
            record.bregman_sym, (forward_constant + reverse_constant) * psi_delta)),
        ('reverse_vs_index', make_check(record.bregman_rev, psi_delta)),
    ]

    residual_sq = record.residual_norm ** 2
    diagnostics = [
        ('vsc_assumption', make_check(
            0.5 * sigma * record.bregman_fwd, jdiff + psi_discrepancy)),
        ('derivative_to_index', make_check(0.5 * sigma * vsc_lhs, psi_discrepancy)),
        ('jdiff_to_index', make_check(-0.5 * sigma * jdiff, psi_discrepancy)),
        ('index_lower_bound0', make_check(
            sigma / (4.0 * alpha) * residual_sq - sigma / 4.0 * delta ** 2 / alpha,
            psi_discrepancy)),
        ('stabilization', make_check(record.total_error, record.bregman_fwd)),
        ('mdp_upper', make_check(record.discrepancy_norm, (tau_upper + 1.0) * delta)),
        ('mdp_lower', make_check((tau_lower - 1.0) * delta, record.discrepancy_norm)),
    ]
    if bounds is not None:
        diagnostics.extend([
            ('alpha_new_lower', make_check(bounds.new_lower, alpha)),
            ('alpha_hm_lower', make_check(bounds.hm_lower, alpha)),
            ('alpha_below_max', make_check(alpha, bounds.alpha_max)),
            ('index_lower_at_delta', make_check(bounds.index_lower_at_delta, psi_delta)),
        ])
    return TheoremChecklist(entries, diagnostics)
