# -*- coding: utf-8 -*-

"""
Noise sweep experiments.

A sweep builds a phantom phi_true, its exact data f_true = T phi_true, and
for each noise level of a geometric grid:

 1) injects noise of norm exactly noise_fill * delta
 2) selects alpha by the discrepancy principle and solves the problem
 3) computes Bregman distances, penalty values and errors

Once every noise level is processed, an index function Psi is fitted on
the collected distances, and a second pass evaluates the parameter bounds
and the rate inequalities of every record with that Psi.

Each noise level derives its own random stream from (seed, index), so the
records do not depend on the number of workers.

"""

from __future__ import division

import logging
from collections import OrderedDict
from collections import namedtuple
from multiprocessing import Pool

import numpy as np

from convreg.exceptions import ConfigError
from convreg.exceptions import ConvregError
from convreg.exceptions import InsufficientData
from convreg.exceptions import RejectedInput
from convreg.exceptions import SweepFailure
from convreg.linops import Signal
from convreg.linops import operator_from_spec
from convreg.mdp import AlphaBounds
from convreg.mdp import DiscrepancyRadii
from convreg.mdp import SearchSettings
from convreg.mdp import compute_alpha_bounds
from convreg.mdp import select_alpha_mdp
from convreg.penalties import PROX_OPTIMALITY
from convreg.penalties import Subgradient
from convreg.penalties import bregman
from convreg.penalties import bregman_symmetric
from convreg.penalties import eval_penalty
from convreg.penalties import penalty_from_spec
from convreg.penalties import subgradient
from convreg.phantoms import make_phantom
from convreg.utils import loglog_fit
from convreg.utils import random_stream
from convreg.utils import weighted_norm
from convreg.vsc import CHECKLIST_FLAGS
from convreg.vsc import IndexFunction
from convreg.vsc import PsiFit
from convreg.vsc import ROUNDING_LEVEL
from convreg.vsc import TheoremChecklist
from convreg.vsc import check_theorems
from convreg.vsc import fit_index_power
from convreg.vsc import vsc_constants

log = logging.getLogger(__name__)

OK = 'ok'
FAILED = 'failed'

JDIFF_FLOOR = 1e-16
RATE_QUANTITIES = (
    'bregman_fwd', 'bregman_rev', 'bregman_sym', 'jdiff', 'total_error',
    'discrepancy_norm')

DEFAULT_SOLVER = OrderedDict([('tol', 1e-8), ('max_iter', 20000)])
DEFAULT_SEARCH = OrderedDict([
    ('alpha0', None), ('expansion', 10.0), ('bracket_tol', 1e-3), ('max_probes', 60)])
DEFAULT_PSI_FIT = OrderedDict([
    ('target', 'bregman_fwd'), ('envelope', False), ('scale', 1.0)])

Instance = namedtuple('Instance', ['phi_true', 'f_true', 'J_true'])


def _merged(defaults, values):
    merged = OrderedDict(defaults)
    merged.update(values or {})
    return merged


class SweepConfig(object):

    """Everything needed to run a noise sweep.

    operator, penalty and phantom are configuration dicts (see
    `operator_from_spec`, `penalty_from_spec` and `make_phantom`); the noise
    levels are delta_max * factor ** i for i in range(count).

    """

    def __init__(self, operator, penalty, phantom, tau_lower, tau_upper,
                 delta_max, factor, count, seed=0, solver=None, search=None,
                 noise_fill=1.0, workers=1, psi_fit=None, psi=None,
                 alpha_max_variant='printed', reg_subgradient='canonical'):
        self.operator = OrderedDict(operator)
        self.penalty = OrderedDict(penalty)
        self.phantom = _merged([('grid_spacing', 1.0)], phantom)
        self.tau_lower = tau_lower
        self.tau_upper = tau_upper
        self.delta_max = delta_max
        self.factor = factor
        self.count = count
        self.seed = seed
        self.solver = _merged(DEFAULT_SOLVER, solver)
        self.search = _merged(DEFAULT_SEARCH, search)
        self.noise_fill = noise_fill
        self.workers = workers
        self.psi_fit = _merged(DEFAULT_PSI_FIT, psi_fit)
        self.psi = OrderedDict(psi) if psi else None
        self.alpha_max_variant = alpha_max_variant
        self.reg_subgradient = reg_subgradient

    @classmethod
    def from_dict(cls, document):
        """Build the sweep configuration from a run configuration document."""
        sweep = document.get('sweep')
        if not sweep:
            raise ConfigError('a sweep section is required', path='sweep')
        for section in ('operator', 'penalty', 'phantom', 'radii'):
            if section not in document:
                raise ConfigError('section is required for a sweep', path=section)
        radii = document['radii']
        return cls(
            operator=document['operator'],
            penalty=document['penalty'],
            phantom=document['phantom'],
            tau_lower=radii['tau_lower'],
            tau_upper=radii['tau_upper'],
            delta_max=sweep['delta_max'],
            factor=sweep['factor'],
            count=sweep['count'],
            seed=sweep.get('seed', 0),
            solver=document.get('solver'),
            search=document.get('search'),
            noise_fill=sweep.get('noise_fill', 1.0),
            workers=sweep.get('workers', 1),
            psi_fit=sweep.get('psi_fit'),
            psi=document.get('psi'),
            alpha_max_variant=document.get('bounds', {}).get('alpha_max_variant', 'printed'),
            reg_subgradient=sweep.get('reg_subgradient', 'canonical'),
        )

    def to_dict(self):
        """Configuration echo, in the run configuration layout."""
        document = OrderedDict([
            ('operator', self.operator),
            ('penalty', self.penalty),
            ('phantom', self.phantom),
            ('radii', OrderedDict([
                ('tau_lower', self.tau_lower), ('tau_upper', self.tau_upper)])),
            ('solver', self.solver),
            ('search', self.search),
            ('bounds', OrderedDict([('alpha_max_variant', self.alpha_max_variant)])),
            ('sweep', OrderedDict([
                ('delta_max', self.delta_max),
                ('factor', self.factor),
                ('count', self.count),
                ('seed', self.seed),
                ('noise_fill', self.noise_fill),
                ('workers', self.workers),
                ('psi_fit', self.psi_fit),
                ('reg_subgradient', self.reg_subgradient),
            ])),
        ])
        if self.psi is not None:
            document['psi'] = self.psi
        return document

    @property
    def grid_spacing(self):
        return self.phantom['grid_spacing']

    def deltas(self):
        return [self.delta_max * self.factor ** i for i in range(self.count)]

    def build_operator(self):
        try:
            return operator_from_spec(
                self.operator, self.phantom['dim'], self.grid_spacing)
        except (RejectedInput, KeyError) as exc:
            raise ConfigError(str(exc), path='operator')

    def build_penalty(self):
        try:
            return penalty_from_spec(self.penalty)
        except RejectedInput as exc:
            raise ConfigError(str(exc), path='penalty')

    def radii(self, delta):
        return DiscrepancyRadii(self.tau_lower, self.tau_upper, delta)

    def search_settings(self):
        try:
            return SearchSettings(**self.search)
        except RejectedInput as exc:
            raise ConfigError(str(exc), path='search')

    def check(self, f_true=None):
        """Reject inconsistent settings before anything is solved."""
        if self.count < 3:
            raise ConfigError('at least 3 noise levels are needed', path='sweep.count')
        if not 0 < self.factor < 1:
            raise ConfigError('factor must be in (0, 1)', path='sweep.factor')
        if not self.delta_max > 0:
            raise ConfigError('delta_max must be positive', path='sweep.delta_max')
        if not 0 < self.noise_fill <= 1:
            raise ConfigError('noise_fill must be in (0, 1]', path='sweep.noise_fill')
        if not 1 < self.tau_lower <= self.tau_upper:
            raise ConfigError(
                'radii must satisfy 1 < tau_lower <= tau_upper', path='radii')
        if f_true is not None and self.delta_max >= f_true.norm():
            raise ConfigError(
                'delta_max %.6e must be below ||f_true|| = %.6e' % (
                    self.delta_max, f_true.norm()),
                path='sweep.delta_max')


class SweepRecord(object):

    """Diagnostics of one noise level of a sweep."""

    FIELDS = (
        'index', 'delta', 'status', 'reason', 'alpha', 'residual_norm',
        'discrepancy_norm', 'J_reg', 'J_true', 'bregman_fwd', 'bregman_rev',
        'bregman_sym', 'total_error', 'iterations', 'optimality_defect',
        'evaluations', 'bracket', 'monotone', 'in_window', 'phi_reg',
        'phi_true', 'p_reg', 'p_true', 'bounds', 'checklist',
    )

    def __init__(self, **fields):
        unknown = set(fields) - set(self.FIELDS)
        if unknown:
            raise TypeError('unknown record fields: %s' % ', '.join(sorted(unknown)))
        for name in self.FIELDS:
            setattr(self, name, fields.get(name))
        if self.status is None:
            self.status = OK

    def __repr__(self):
        return 'SweepRecord(delta=%r, status=%r, alpha=%r)' % (
            self.delta, self.status, self.alpha)

    @property
    def succeeded(self):
        return self.status == OK

    @property
    def jdiff(self):
        if self.J_reg is None or self.J_true is None:
            return None
        return self.J_reg - self.J_true

    def to_dict(self):
        data = OrderedDict()
        for name in self.FIELDS:
            value = getattr(self, name)
            if isinstance(value, Signal):
                value = value.to_list()
            elif isinstance(value, Subgradient):
                value = OrderedDict([
                    ('values', value.values.to_list()), ('source', value.source)])
            elif isinstance(value, AlphaBounds):
                value = OrderedDict(value._asdict())
            elif isinstance(value, TheoremChecklist):
                value = value.to_dict()
            elif isinstance(value, tuple):
                value = list(value)
            data[name] = value
            if name == 'total_error':
                data['jdiff'] = self.jdiff
        if self.phi_true is not None:
            data['grid_spacing'] = self.phi_true.grid_spacing
        return data

    @classmethod
    def from_dict(cls, data):
        h = data.get('grid_spacing', 1.0)
        fields = dict(
            (name, data.get(name)) for name in cls.FIELDS if name in data)
        for name in ('phi_reg', 'phi_true'):
            if fields.get(name) is not None:
                fields[name] = Signal(fields[name], h)
        for name in ('p_reg', 'p_true'):
            if fields.get(name) is not None:
                fields[name] = Subgradient(
                    Signal(fields[name]['values'], h), fields[name]['source'])
        if fields.get('bounds') is not None:
            fields['bounds'] = AlphaBounds(**fields['bounds'])
        if fields.get('checklist') is not None:
            fields['checklist'] = TheoremChecklist.from_dict(fields['checklist'])
        if fields.get('bracket') is not None:
            fields['bracket'] = tuple(fields['bracket'])
        return cls(**fields)


class SweepReport(object):

    """Records of a sweep, sorted by descending delta, with the fitted
    index function and the convergence rates.

    """

    def __init__(self, config, records, fitted_psi=None, rate_summary=None):
        self.config = config
        self.records = sorted(records, key=lambda record: -record.delta)
        self.fitted_psi = fitted_psi
        self.rate_summary = rate_summary

    @property
    def psi(self):
        if self.fitted_psi is None:
            return None
        return IndexFunction.from_dict(self.fitted_psi)

    @property
    def successful_records(self):
        return [record for record in self.records if record.succeeded]

    def tallies(self):
        checklist = OrderedDict(
            (flag, OrderedDict([('passed', 0), ('failed', 0)]))
            for flag in CHECKLIST_FLAGS)
        diagnostics = OrderedDict()
        for record in self.successful_records:
            if record.checklist is None:
                continue
            for name, check in record.checklist.entries.items():
                checklist[name]['passed' if check.holds else 'failed'] += 1
            for name, check in record.checklist.diagnostics.items():
                counts = diagnostics.setdefault(
                    name, OrderedDict([('passed', 0), ('failed', 0)]))
                counts['passed' if check.holds else 'failed'] += 1
        return OrderedDict([
            ('records', OrderedDict([
                ('succeeded', len(self.successful_records)),
                ('failed', len(self.records) - len(self.successful_records)),
            ])),
            ('checklist', checklist),
            ('diagnostics', diagnostics),
        ])

    def all_flags_hold(self):
        """True when every successful record was checked and passed."""
        records = self.successful_records
        return bool(records) and all(
            record.checklist is not None and record.checklist.all_hold()
            for record in records)

    def to_dict(self):
        config = self.config.to_dict() if isinstance(self.config, SweepConfig) else self.config
        return OrderedDict([
            ('config', config),
            ('records', [record.to_dict() for record in self.records]),
            ('fitted_psi', self.fitted_psi),
            ('rate_summary', self.rate_summary),
            ('tallies', self.tallies()),
        ])

    @classmethod
    def from_dict(cls, data):
        report = cls(
            data['config'],
            [SweepRecord.from_dict(record) for record in data['records']],
            data.get('fitted_psi'),
            data.get('rate_summary'))
        return report


def make_instance(config):
    """Return the (phi_true, f_true, J_true) triple of a sweep.

    phi_true is the phantom, so T phi_true = f_true holds by construction.

    """
    phantom = config.phantom
    phi_true = make_phantom(phantom['name'], phantom['dim'], phantom['grid_spacing'])
    f_true = config.build_operator().apply(phi_true)
    return Instance(phi_true, f_true, eval_penalty(config.build_penalty(), phi_true))


def add_noise_exact(f_true, delta, seed, stream=0, fill=1.0):
    """Return f_true plus seeded noise of norm exactly fill * delta."""
    if not delta > 0:
        raise RejectedInput('delta must be positive')
    if not 0 < fill <= 1:
        raise RejectedInput('fill must be in (0, 1]')
    h = f_true.grid_spacing
    attempt = 0
    while True:
        direction = random_stream(seed, stream, attempt).standard_normal(len(f_true))
        norm = weighted_norm(direction, h)
        if norm > 0:
            break
        attempt += 1
    return f_true.like(f_true.values + (fill * delta / norm) * direction)


def _regularized_subgradient(config, op, penalty, phi, data, alpha):
    if config.reg_subgradient == 'optimality':
        values = op.adjoint(data.values - op.forward(phi.values)) / alpha
        return Subgradient(phi.like(values), PROX_OPTIMALITY)
    return subgradient(penalty, phi)


def run_point(task):
    """Process the noise level of the given index; never raises on
    computation failures, which are recorded in the returned record.

    """
    config, index = task
    delta = config.deltas()[index]
    op = config.build_operator()
    penalty = config.build_penalty()
    phi_true, f_true, J_true = make_instance(config)
    f_delta = add_noise_exact(f_true, delta, config.seed, index, config.noise_fill)
    radii = config.radii(delta)
    try:
        result = select_alpha_mdp(
            op, f_delta, penalty, radii, config.search_settings(),
            tol=config.solver['tol'], max_iter=config.solver['max_iter'])
    except ConvregError as exc:
        log.warning('noise level %d (delta=%.6e) failed: %s', index, delta, exc)
        return SweepRecord(
            index=index, delta=delta, status=FAILED,
            reason='%s: %s' % (exc.__class__.__name__, exc),
            J_true=J_true, phi_true=phi_true)

    solution = result.solution
    phi = solution.phi
    p_true = subgradient(penalty, phi_true)
    p_reg = _regularized_subgradient(config, op, penalty, phi, f_delta, result.alpha)
    log.info('noise level %d: delta=%.6e alpha=%.6e residual=%.6e',
             index, delta, result.alpha, solution.residual_norm)
    return SweepRecord(
        index=index,
        delta=delta,
        alpha=result.alpha,
        residual_norm=solution.residual_norm,
        discrepancy_norm=(op.apply(phi) - f_true).norm(),
        J_reg=solution.penalty_value,
        J_true=J_true,
        bregman_fwd=bregman(penalty, phi, phi_true, p_true),
        bregman_rev=bregman(penalty, phi_true, phi, p_reg),
        bregman_sym=bregman_symmetric(penalty, phi, phi_true, p_reg, p_true),
        total_error=(phi - phi_true).norm(),
        iterations=solution.iterations,
        optimality_defect=solution.optimality_defect,
        evaluations=result.evaluations,
        bracket=result.bracket,
        monotone=result.monotone,
        in_window=result.in_window,
        phi_reg=phi,
        phi_true=phi_true,
        p_reg=p_reg,
        p_true=p_true,
    )


def _psi_fit_points(records, target, constants):
    if target == 'vsc_lhs':
        return [
            (r.delta, r.p_true.values.inner(r.phi_true - r.phi_reg) / constants.C)
            for r in records]
    return [(r.delta, getattr(r, target)) for r in records]


def fit_psi(config, records):
    """Index function of the sweep, as a report dict (None if not fittable)."""
    settings = config.psi_fit
    if config.psi is not None:
        psi = IndexFunction(config.psi['c'], config.psi['kappa'])
        fit = PsiFit(psi, 0.0, False, psi.kappa)
        target = 'fixed'
    else:
        constants = vsc_constants(config.radii(config.delta_max))
        points = _psi_fit_points(records, settings['target'], constants)
        J_true = max(record.J_true for record in records)
        floor = ROUNDING_LEVEL * max(1.0, J_true)
        try:
            fit = fit_index_power(points, envelope=settings['envelope'], floor=floor)
        except InsufficientData as exc:
            log.warning('no index function could be fitted: %s', exc)
            return None
        target = settings['target']
    psi = fit.psi.scaled(settings['scale'])
    log.info('index function: %r (target %s)', psi, target)
    fitted = psi.to_dict()
    fitted.update([
        ('residual', fit.residual),
        ('clamped', fit.clamped),
        ('raw_kappa', fit.raw_kappa),
        ('target', target),
        ('envelope', settings['envelope']),
        ('scale', settings['scale']),
    ])
    return fitted


def evaluate_records(records, config, psi):
    """Second pass: parameter bounds and checklist of every record."""
    constants = vsc_constants(config.radii(config.delta_max))
    for record in records:
        radii = config.radii(record.delta)
        record.bounds = compute_alpha_bounds(
            radii, constants.sigma_tilde, psi, record.J_true,
            config.alpha_max_variant)
        record.checklist = check_theorems(record, constants, psi, radii, record.bounds)


def run_sweep(config):
    """Run the sweep and return its SweepReport.

    Raises ConfigError on invalid settings (before any solve) and
    SweepFailure when every noise level failed.

    """
    config.check()
    instance = make_instance(config)
    config.check(instance.f_true)
    config.search_settings()

    tasks = [(config, index) for index in range(config.count)]
    if config.workers > 1:
        pool = Pool(config.workers)
        try:
            records = pool.map(run_point, tasks)
        finally:
            pool.close()
            pool.join()
    else:
        records = [run_point(task) for task in tasks]

    succeeded = [record for record in records if record.succeeded]
    if not succeeded:
        raise SweepFailure('every noise level of the sweep failed')

    fitted_psi = fit_psi(config, succeeded)
    if fitted_psi is not None:
        evaluate_records(succeeded, config, IndexFunction.from_dict(fitted_psi))

    report = SweepReport(config, records, fitted_psi)
    try:
        report.rate_summary = fit_rates(report)
    except InsufficientData as exc:
        log.warning('convergence rates not fitted: %s', exc)
    return report


def fit_rates(report):
    """Log-log slopes of the error quantities against delta.

    The J-difference may be negative; it is clipped below at 1e-16 before
    taking the log. The slope of the image space discrepancy
    ||T phi_reg - T phi_true|| is expected to be close to 1.

    """
    records = [record for record in report.records if record.succeeded]
    deltas = np.array([record.delta for record in records], dtype=float)
    if len(records) < 3:
        raise InsufficientData(
            'at least 3 successful records are needed, got %d' % len(records))
    if np.ptp(np.log(deltas)) == 0:
        raise InsufficientData('all noise levels are equal')

    summary = OrderedDict()
    for name in RATE_QUANTITIES:
        values = [getattr(record, name) for record in records]
        if any(value is None for value in values):
            summary[name] = None
            continue
        floor = JDIFF_FLOOR if name == 'jdiff' else None
        try:
            slope, intercept, residual = loglog_fit(deltas, values, floor=floor)
        except InsufficientData as exc:
            log.warning('no rate for %s: %s', name, exc)
            summary[name] = None
            continue
        summary[name] = OrderedDict([
            ('slope', slope), ('intercept', intercept), ('residual', residual)])
    return summary
