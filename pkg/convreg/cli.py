# -*- coding: utf-8 -*-

"""
Command line interface.

    convreg solve --config run.json --alpha 0.5 --out solution.json
    convreg mdp --config run.json --out mdp.json
    convreg sweep --config sweep.json --out-dir results/
    convreg verify --report results/report.json

Exit codes: 0 success, 1 configuration error, 2 computation failure,
3 no admissible alpha, 4 verification flags failed.

"""

from __future__ import print_function

import argparse
import logging
import sys
from collections import OrderedDict

from convreg.config import MDP_OUTPUT_SCHEMA
from convreg.config import RunConfig
from convreg.config import validate_document
from convreg.exceptions import ConfigError
from convreg.exceptions import ConvregError
from convreg.exceptions import NoAdmissibleAlpha
from convreg.exceptions import RejectedInput
from convreg.exceptions import SweepFailure
from convreg.export import read_report
from convreg.export import write_json
from convreg.export import write_sweep_outputs
from convreg.harness import SweepConfig
from convreg.harness import run_sweep
from convreg.mdp import compute_alpha_bounds
from convreg.mdp import mdp_consequence_check
from convreg.mdp import select_alpha_mdp
from convreg.solver import VariationalProblem
from convreg.solver import minimize_tikhonov
from convreg.vsc import CHECKLIST_FLAGS
from convreg.vsc import check_theorems
from convreg.vsc import vsc_constants

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_COMPUTATION = 2
EXIT_NO_ALPHA = 3
EXIT_FLAGS = 4


def _fail(message, code):
    print('error: %s' % message, file=sys.stderr)
    return code


def cmd_solve(config_path, alpha, out_path):
    """Minimize the Tikhonov functional for a fixed alpha."""
    if not alpha > 0:
        return _fail('alpha must be positive', EXIT_CONFIG)
    try:
        config = RunConfig.load(config_path)
        tol, max_iter = config.solver_settings()
        problem = VariationalProblem(
            config.build_operator(), config.build_data(), config.build_penalty(), alpha)
    except (ConfigError, RejectedInput) as exc:
        return _fail(exc, EXIT_CONFIG)

    solution = minimize_tikhonov(problem, tol, max_iter)
    write_json(OrderedDict([
        ('phi', solution.phi.to_list()),
        ('objective', solution.objective_value),
        ('residual_norm', solution.residual_norm),
        ('optimality_defect', solution.optimality_defect),
        ('alpha', solution.alpha),
        ('iterations', solution.iterations),
        ('converged', solution.converged),
    ]), out_path)
    if not solution.converged:
        return _fail(
            'solver did not converge within %d iterations (defect %.3e)' % (
                max_iter, solution.optimality_defect),
            EXIT_COMPUTATION)
    return EXIT_OK


def _bounds_document(config, radii):
    psi = config.index_function()
    J_true = config.true_penalty_value()
    if psi is None or J_true is None:
        return None
    sigma = vsc_constants(radii).sigma_tilde
    bounds = compute_alpha_bounds(radii, sigma, psi, J_true, config.alpha_max_variant)
    return OrderedDict(bounds._asdict())


def cmd_mdp(config_path, out_path):
    """Select alpha by the discrepancy principle."""
    try:
        config = RunConfig.load(config_path)
        tol, max_iter = config.solver_settings()
        op = config.build_operator()
        data = config.build_data()
        penalty = config.build_penalty()
        radii = config.radii()
        search = config.search_settings()
    except (ConfigError, RejectedInput) as exc:
        return _fail(exc, EXIT_CONFIG)

    try:
        result = select_alpha_mdp(op, data, penalty, radii, search, tol, max_iter)
        bounds = _bounds_document(config, radii)
    except NoAdmissibleAlpha as exc:
        return _fail(exc, EXIT_NO_ALPHA)
    except ConvregError as exc:
        return _fail(exc, EXIT_COMPUTATION)

    solution = result.solution
    document = OrderedDict([
        ('alpha', result.alpha),
        ('residual_norm', solution.residual_norm),
        ('window', list(radii.window)),
        ('bracket', list(result.bracket)),
        ('evaluations', result.evaluations),
        ('probes', [list(probe) for probe in result.probes]),
        ('monotone', result.monotone),
        ('in_window', result.in_window),
        ('phi', solution.phi.to_list()),
        ('objective', solution.objective_value),
        ('optimality_defect', solution.optimality_defect),
        ('iterations', solution.iterations),
        ('converged', solution.converged),
        ('bounds', bounds),
    ])
    if 'phantom' in config.document and 'data' not in config.document:
        consequences = mdp_consequence_check(result, op, config.build_phantom(), radii)
        document['consequences'] = OrderedDict([
            ('upper_ok', consequences.upper_ok),
            ('lower_ok', consequences.lower_ok),
            ('discrepancy', consequences.lhs_values[0]),
        ])
    validate_document(document, MDP_OUTPUT_SCHEMA)
    write_json(document, out_path)
    return EXIT_OK


def print_tallies(tallies, stream=None):
    stream = stream or sys.stdout
    records = tallies['records']
    print('records: %d succeeded, %d failed' % (records['succeeded'], records['failed']),
          file=stream)
    width = max(len(name) for name in list(tallies['checklist']) + list(tallies['diagnostics']))
    print('%-*s %7s %7s' % (width, 'check', 'passed', 'failed'), file=stream)
    for name, counts in tallies['checklist'].items():
        print('%-*s %7d %7d' % (width, name, counts['passed'], counts['failed']), file=stream)
    for name, counts in tallies['diagnostics'].items():
        print('%-*s %7d %7d  (diagnostic)' % (
            width, name, counts['passed'], counts['failed']), file=stream)


def cmd_sweep(config_path, out_dir):
    """Run a noise sweep, write report.json and records.csv."""
    try:
        config = RunConfig.load(config_path).sweep_config()
        report = run_sweep(config)
    except (ConfigError, RejectedInput) as exc:
        return _fail(exc, EXIT_CONFIG)
    except (SweepFailure, ConvregError) as exc:
        return _fail(exc, EXIT_COMPUTATION)

    write_sweep_outputs(report, out_dir)
    print_tallies(report.tallies())
    if not report.all_flags_hold():
        return EXIT_FLAGS
    return EXIT_OK


def cmd_verify(report_path):
    """Re-run the checklist on the records of a stored report."""
    try:
        report = read_report(report_path)
        config = SweepConfig.from_dict(report.config)
    except (IOError, OSError, ValueError, KeyError, ConfigError) as exc:
        return _fail('cannot load report %s: %s' % (report_path, exc), EXIT_CONFIG)
    psi = report.psi
    if psi is None:
        return _fail('the report has no fitted index function', EXIT_COMPUTATION)

    constants = vsc_constants(config.radii(config.delta_max))
    consistent = True
    for record in report.successful_records:
        stored = record.checklist
        try:
            record.checklist = check_theorems(
                record, constants, psi, config.radii(record.delta), record.bounds)
        except ConvregError as exc:
            return _fail('record delta=%r: %s' % (record.delta, exc), EXIT_COMPUTATION)
        if stored is not None and stored.flags() != record.checklist.flags():
            consistent = False
            log.warning('recomputed flags differ from the stored ones at delta=%r',
                        record.delta)
    print_tallies(report.tallies())
    if not (consistent and report.all_flags_hold()):
        return EXIT_FLAGS
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog='convreg',
        description='Convex variational regularization with the discrepancy principle.')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='Log progress (-v) or debug information (-vv).')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    solve = commands.add_parser('solve', help='Solve for a fixed alpha.')
    solve.add_argument('--config', required=True, help='Run configuration JSON file.')
    solve.add_argument('--alpha', required=True, type=float,
                       help='Regularization parameter.')
    solve.add_argument('--out', required=True, help='Output solution JSON file.')

    mdp = commands.add_parser('mdp', help='Select alpha by the discrepancy principle.')
    mdp.add_argument('--config', required=True, help='Run configuration JSON file.')
    mdp.add_argument('--out', required=True, help='Output JSON file.')

    sweep = commands.add_parser('sweep', help='Run a noise sweep.')
    sweep.add_argument('--config', required=True, help='Run configuration JSON file.')
    sweep.add_argument('--out-dir', required=True,
                       help='Directory receiving report.json and records.csv.')

    verify = commands.add_parser('verify', help='Check a stored sweep report again.')
    verify.add_argument('--report', required=True, help='report.json of a sweep.')
    return parser


def configure_logging(verbosity):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level, stream=sys.stderr,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    if args.command == 'solve':
        return cmd_solve(args.config, args.alpha, args.out)
    if args.command == 'mdp':
        return cmd_mdp(args.config, args.out)
    if args.command == 'sweep':
        return cmd_sweep(args.config, args.out_dir)
    return cmd_verify(args.report)
