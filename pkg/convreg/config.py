# -*- coding: utf-8 -*-

"""
Run configuration documents.

A run is described by a single UTF-8 JSON document whose sections are
validated against a declarative schema before anything is computed:
unknown keys, missing required keys, wrong types and invalid choices are
all rejected with the dotted path of the offending entry.

    {
        "operator": {"kind": "identity"},
        "penalty": {"kind": "quadratic"},
        "data": {"values": [1.0, 0.0]},
        "noise": {"delta": 0.1},
        "radii": {"tau_lower": 1.5, "tau_upper": 2.0}
    }

"""

from __future__ import division

import io
import json
import numbers
from collections import OrderedDict

from convreg.exceptions import ConfigError
from convreg.exceptions import RejectedInput
from convreg.harness import SweepConfig
from convreg.harness import add_noise_exact
from convreg.linops import Signal
from convreg.linops import operator_from_spec
from convreg.mdp import ALPHA_MAX_VARIANTS
from convreg.mdp import DiscrepancyRadii
from convreg.mdp import SearchSettings
from convreg.penalties import eval_penalty
from convreg.penalties import penalty_from_spec
from convreg.phantoms import PHANTOMS
from convreg.phantoms import make_phantom
from convreg.solver import DEFAULT_MAX_ITER
from convreg.solver import DEFAULT_TOL
from convreg.vsc import IndexFunction
from convreg.vsc import PSI_FIT_TARGETS

REAL = 'real'
INTEGER = 'integer'
STRING = 'string'
BOOLEAN = 'boolean'
REALS = 'list of reals'
MATRIX = 'list of lists of reals'


class Field(object):

    """A typed entry of a configuration section."""

    def __init__(self, kind, required=False, choices=None, nullable=False):
        self.kind = kind
        self.required = required
        self.choices = choices
        self.nullable = nullable


def _is_real(value):
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def _is_reals(value):
    return isinstance(value, list) and all(_is_real(item) for item in value)


TYPE_CHECKS = {
    REAL: _is_real,
    INTEGER: lambda value: isinstance(value, int) and not isinstance(value, bool),
    STRING: lambda value: isinstance(value, str),
    BOOLEAN: lambda value: isinstance(value, bool),
    REALS: _is_reals,
    MATRIX: lambda value: isinstance(value, list) and all(_is_reals(row) for row in value),
}

RUN_SCHEMA = OrderedDict([
    ('operator', OrderedDict([
        ('kind', Field(STRING, True, ('dense', 'identity', 'convolution'))),
        ('matrix', Field(MATRIX)),
        ('kernel', Field(REALS)),
    ])),
    ('penalty', OrderedDict([
        ('kind', Field(STRING, True, ('quadratic', 'l1', 'smoothed_tv'))),
        ('beta', Field(REAL)),
    ])),
    ('phantom', OrderedDict([
        ('name', Field(STRING, True, tuple(sorted(PHANTOMS)))),
        ('dim', Field(INTEGER, True)),
        ('grid_spacing', Field(REAL)),
    ])),
    ('data', OrderedDict([
        ('values', Field(REALS, True)),
        ('grid_spacing', Field(REAL)),
    ])),
    ('noise', OrderedDict([
        ('delta', Field(REAL, True)),
        ('seed', Field(INTEGER)),
        ('fill', Field(REAL)),
    ])),
    ('radii', OrderedDict([
        ('tau_lower', Field(REAL, True)),
        ('tau_upper', Field(REAL, True)),
    ])),
    ('solver', OrderedDict([
        ('tol', Field(REAL)),
        ('max_iter', Field(INTEGER)),
    ])),
    ('search', OrderedDict([
        ('alpha0', Field(REAL, nullable=True)),
        ('expansion', Field(REAL)),
        ('bracket_tol', Field(REAL)),
        ('max_probes', Field(INTEGER)),
    ])),
    ('psi', OrderedDict([
        ('kind', Field(STRING, choices=('power',))),
        ('c', Field(REAL, True)),
        ('kappa', Field(REAL, True)),
    ])),
    ('bounds', OrderedDict([
        ('alpha_max_variant', Field(STRING, choices=ALPHA_MAX_VARIANTS)),
    ])),
    ('sweep', OrderedDict([
        ('delta_max', Field(REAL, True)),
        ('factor', Field(REAL, True)),
        ('count', Field(INTEGER, True)),
        ('seed', Field(INTEGER)),
        ('noise_fill', Field(REAL)),
        ('workers', Field(INTEGER)),
        ('psi_fit', OrderedDict([
            ('target', Field(STRING, choices=PSI_FIT_TARGETS)),
            ('envelope', Field(BOOLEAN)),
            ('scale', Field(REAL)),
        ])),
        ('reg_subgradient', Field(STRING, choices=('canonical', 'optimality'))),
    ])),
])

MDP_OUTPUT_SCHEMA = OrderedDict([
    ('alpha', Field(REAL, True)),
    ('residual_norm', Field(REAL, True)),
    ('window', Field(REALS, True)),
    ('bracket', Field(REALS, True)),
    ('evaluations', Field(INTEGER, True)),
    ('probes', Field(MATRIX, True)),
    ('monotone', Field(BOOLEAN, True)),
    ('in_window', Field(BOOLEAN, True)),
    ('phi', Field(REALS, True)),
    ('objective', Field(REAL, True)),
    ('optimality_defect', Field(REAL, True)),
    ('iterations', Field(INTEGER, True)),
    ('converged', Field(BOOLEAN, True)),
    ('bounds', OrderedDict([
        ('hm_lower', Field(REAL, True)),
        ('new_lower', Field(REAL, True)),
        ('alpha_max', Field(REAL, True)),
        ('index_lower_at_delta', Field(REAL, True)),
        ('alpha_max_printed', Field(REAL, True)),
        ('alpha_max_corrected', Field(REAL, True)),
        ('alpha_max_variant', Field(STRING, True, ALPHA_MAX_VARIANTS)),
    ])),
    ('consequences', OrderedDict([
        ('upper_ok', Field(BOOLEAN, True)),
        ('lower_ok', Field(BOOLEAN, True)),
        ('discrepancy', Field(REAL, True)),
    ])),
])


def _join(path, key):
    return '%s.%s' % (path, key) if path else key


def validate_document(document, schema=RUN_SCHEMA, path=''):
    """Raise a ConfigError naming the first entry of document that does
    not conform to the schema. Nested dicts in the schema are optional
    sub-sections.

    """
    if not isinstance(document, dict):
        raise ConfigError('expected an object', path=path or None)
    for key in document:
        if key not in schema:
            raise ConfigError('unknown key', path=_join(path, key))
    for key, rule in schema.items():
        here = _join(path, key)
        if isinstance(rule, dict):
            if key in document and document[key] is not None:
                validate_document(document[key], rule, here)
            continue
        if key not in document:
            if rule.required:
                raise ConfigError('missing required key', path=here)
            continue
        value = document[key]
        if value is None:
            if rule.nullable:
                continue
            raise ConfigError('must not be null', path=here)
        if not TYPE_CHECKS[rule.kind](value):
            raise ConfigError('expected a %s, got %r' % (rule.kind, value), path=here)
        if rule.choices is not None and value not in rule.choices:
            raise ConfigError(
                '%r is not one of %s' % (value, ', '.join(rule.choices)), path=here)
    return document


def read_document(path):
    """Load a JSON document, mapping unreadable files to ConfigError."""
    try:
        with io.open(path, encoding='utf-8') as handle:
            return json.load(handle, object_pairs_hook=OrderedDict)
    except (IOError, OSError) as exc:
        raise ConfigError('cannot read configuration %s: %s' % (path, exc))
    except ValueError as exc:
        raise ConfigError('%s is not valid JSON: %s' % (path, exc))


class RunConfig(object):

    """A validated run configuration document and its object builders."""

    def __init__(self, document, source=None):
        self.document = validate_document(document)
        self.source = source

    @classmethod
    def load(cls, path):
        return cls(read_document(path), path)

    def section(self, name):
        return self.document.get(name) or OrderedDict()

    def require(self, name):
        if name not in self.document:
            raise ConfigError('section is required', path=name)
        return self.document[name]

    @property
    def grid_spacing(self):
        for name in ('data', 'phantom'):
            if 'grid_spacing' in self.section(name):
                return self.section(name)['grid_spacing']
        return 1.0

    @property
    def dim(self):
        """Input dimension of the operator: the phantom one, else the data
        length (identity and convolution operators are square).

        """
        if 'phantom' in self.document:
            return self.document['phantom']['dim']
        if 'data' in self.document:
            return len(self.document['data']['values'])
        return None

    def build_operator(self):
        spec = self.require('operator')
        dim = self.dim
        if spec['kind'] == 'dense' and 'phantom' not in self.document:
            # data length is the row count; VariationalProblem checks it
            dim = None
        try:
            return operator_from_spec(spec, dim, self.grid_spacing)
        except (RejectedInput, KeyError) as exc:
            raise ConfigError(str(exc), path='operator')

    def build_penalty(self):
        try:
            return penalty_from_spec(self.require('penalty'))
        except RejectedInput as exc:
            raise ConfigError(str(exc), path='penalty')

    def build_phantom(self):
        phantom = self.require('phantom')
        return make_phantom(
            phantom['name'], phantom['dim'], phantom.get('grid_spacing', 1.0))

    def build_data(self):
        """The data f of the run.

        Explicit data values are used as is. Otherwise the exact data of the
        phantom is computed, and noise of norm noise.fill * noise.delta is
        added when a noise section is present.

        """
        if 'data' in self.document:
            try:
                return Signal(self.document['data']['values'], self.grid_spacing)
            except RejectedInput as exc:
                raise ConfigError(str(exc), path='data.values')
        if 'phantom' not in self.document:
            raise ConfigError('either a data or a phantom section is required', path='data')
        f_true = self.build_operator().apply(self.build_phantom())
        if 'noise' not in self.document:
            return f_true
        noise = self.document['noise']
        try:
            return add_noise_exact(
                f_true, noise['delta'], noise.get('seed', 0), fill=noise.get('fill', 1.0))
        except RejectedInput as exc:
            raise ConfigError(str(exc), path='noise')

    def true_penalty_value(self):
        """J(phi_true) when a phantom is configured, else None."""
        if 'phantom' not in self.document:
            return None
        return eval_penalty(self.build_penalty(), self.build_phantom())

    def radii(self):
        radii = self.require('radii')
        delta = self.require('noise')['delta']
        try:
            return DiscrepancyRadii(radii['tau_lower'], radii['tau_upper'], delta)
        except RejectedInput as exc:
            raise ConfigError(str(exc), path='radii')

    def solver_settings(self):
        solver = self.section('solver')
        tol = solver.get('tol', DEFAULT_TOL)
        max_iter = solver.get('max_iter', DEFAULT_MAX_ITER)
        if not tol > 0:
            raise ConfigError('tol must be positive', path='solver.tol')
        if max_iter < 1:
            raise ConfigError('max_iter must be >= 1', path='solver.max_iter')
        return tol, max_iter

    def search_settings(self):
        try:
            return SearchSettings(**self.section('search'))
        except RejectedInput as exc:
            raise ConfigError(str(exc), path='search')

    def index_function(self):
        """The fixed index function of the psi section, or None."""
        if 'psi' not in self.document:
            return None
        psi = self.document['psi']
        try:
            return IndexFunction(psi['c'], psi['kappa'])
        except RejectedInput as exc:
            raise ConfigError(str(exc), path='psi')

    @property
    def alpha_max_variant(self):
        return self.section('bounds').get('alpha_max_variant', 'printed')

    def sweep_config(self):
        config = SweepConfig.from_dict(self.document)
        config.check()
        return config
