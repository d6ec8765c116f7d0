# -*- coding: utf-8 -*-

import io
import json
import os
import shutil
import tempfile
import unittest

from unittest import mock

from convreg.cli import EXIT_COMPUTATION
from convreg.cli import EXIT_CONFIG
from convreg.cli import EXIT_FLAGS
from convreg.cli import EXIT_NO_ALPHA
from convreg.cli import EXIT_OK
from convreg.cli import main
from convreg.config import MDP_OUTPUT_SCHEMA
from convreg.config import validate_document
from convreg.exceptions import SweepFailure
from convreg.export import read_records_csv
from convreg.vsc import CHECKLIST_FLAGS

IDENTITY_RUN = {
    'operator': {'kind': 'identity'},
    'penalty': {'kind': 'quadratic'},
    'data': {'values': [1.0, 0.0]},
    'noise': {'delta': 0.1},
    'radii': {'tau_lower': 1.5, 'tau_upper': 2.0},
}

IDENTITY_SWEEP = {
    'operator': {'kind': 'identity'},
    'penalty': {'kind': 'quadratic'},
    'phantom': {'name': 'step', 'dim': 32},
    'radii': {'tau_lower': 1.5, 'tau_upper': 2.0},
    'solver': {'tol': 1e-10},
    'sweep': {'delta_max': 0.2, 'factor': 0.5, 'count': 5, 'seed': 0},
}


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()
        self.stdout = io.StringIO()
        self.stderr = io.StringIO()
        patchers = [mock.patch('sys.stdout', self.stdout),
                    mock.patch('sys.stderr', self.stderr)]
        for patcher in patchers:
            patcher.start()
            self.addCleanup(patcher.stop)

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def path(self, name):
        return os.path.join(self.tmpdir, name)

    def write_config(self, document, name='run.json'):
        with io.open(self.path(name), 'w', encoding='utf-8') as handle:
            handle.write(json.dumps(document))
        return self.path(name)

    def read_json(self, name):
        with io.open(self.path(name), encoding='utf-8') as handle:
            return json.load(handle)


class SolveCommandTest(CliTestCase):

    def test_identity_closed_form(self):
        config = self.write_config(IDENTITY_RUN)
        code = main(['solve', '--config', config, '--alpha', '1', '--out', self.path('out.json')])
        self.assertEqual(code, EXIT_OK)
        output = self.read_json('out.json')
        self.assertAlmostEqual(output['phi'][0], 0.5)
        self.assertAlmostEqual(output['phi'][1], 0.0)
        for key in ('objective', 'residual_norm', 'optimality_defect'):
            self.assertIn(key, output)

    def test_alpha_must_be_positive(self):
        config = self.write_config(IDENTITY_RUN)
        code = main(['solve', '--config', config, '--alpha', '0', '--out', self.path('out.json')])
        self.assertEqual(code, EXIT_CONFIG)
        self.assertIn('alpha must be positive', self.stderr.getvalue())
        self.assertFalse(os.path.exists(self.path('out.json')))

    def test_missing_config(self):
        code = main(['solve', '--config', self.path('missing.json'), '--alpha', '1',
                     '--out', self.path('out.json')])
        self.assertEqual(code, EXIT_CONFIG)

    def test_bad_config_names_path(self):
        config = self.write_config(dict(IDENTITY_RUN, solver={'tol': 'small'}))
        code = main(['solve', '--config', config, '--alpha', '1', '--out', self.path('out.json')])
        self.assertEqual(code, EXIT_CONFIG)
        self.assertIn('solver.tol', self.stderr.getvalue())

    def test_non_square_dense_operator(self):
        # (A^T A + I) phi = A^T f gives phi = (5/8, 1/8)
        config = self.write_config(dict(
            IDENTITY_RUN,
            operator={'kind': 'dense', 'matrix': [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]},
            data={'values': [1.0, 0.0, 1.0]}))
        code = main(['solve', '--config', config, '--alpha', '1', '--out', self.path('out.json')])
        self.assertEqual(code, EXIT_OK)
        phi = self.read_json('out.json')['phi']
        self.assertEqual(len(phi), 2)
        self.assertAlmostEqual(phi[0], 0.625, places=6)
        self.assertAlmostEqual(phi[1], 0.125, places=6)

    def test_data_length_must_match_operator_rows(self):
        config = self.write_config(dict(
            IDENTITY_RUN,
            operator={'kind': 'dense', 'matrix': [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]}))
        code = main(['solve', '--config', config, '--alpha', '1', '--out', self.path('out.json')])
        self.assertEqual(code, EXIT_CONFIG)
        self.assertIn('output dimension is 3', self.stderr.getvalue())

    def test_convergence_failure(self):
        config = self.write_config(dict(
            IDENTITY_RUN,
            operator={'kind': 'dense', 'matrix': [[2.0, 1.0], [1.0, 3.0]]},
            data={'values': [1.0, 2.0]},
            solver={'tol': 1e-15, 'max_iter': 1}))
        code = main(['solve', '--config', config, '--alpha', '0.01', '--out', self.path('out.json')])
        self.assertEqual(code, EXIT_COMPUTATION)
        self.assertFalse(self.read_json('out.json')['converged'])


class MdpCommandTest(CliTestCase):

    def test_identity_window(self):
        config = self.write_config(IDENTITY_RUN)
        code = main(['mdp', '--config', config, '--out', self.path('mdp.json')])
        self.assertEqual(code, EXIT_OK)
        output = self.read_json('mdp.json')
        self.assertTrue(3.0 / 17.0 - 1e-8 <= output['alpha'] <= 0.25 + 1e-8)
        self.assertIsNone(output['bounds'])
        validate_document(output, MDP_OUTPUT_SCHEMA)

    def test_bounds_and_consequences(self):
        config = self.write_config({
            'operator': {'kind': 'identity'},
            'penalty': {'kind': 'quadratic'},
            'phantom': {'name': 'step', 'dim': 16},
            'noise': {'delta': 0.1, 'seed': 2},
            'radii': {'tau_lower': 1.5, 'tau_upper': 2.0},
            'psi': {'c': 1.0, 'kappa': 1.0},
            'bounds': {'alpha_max_variant': 'corrected'},
        })
        code = main(['mdp', '--config', config, '--out', self.path('mdp.json')])
        self.assertEqual(code, EXIT_OK)
        output = self.read_json('mdp.json')
        validate_document(output, MDP_OUTPUT_SCHEMA)
        self.assertEqual(output['bounds']['alpha_max_variant'], 'corrected')
        self.assertTrue(output['consequences']['upper_ok'])
        self.assertTrue(output['consequences']['lower_ok'])

    def test_non_square_dense_operator(self):
        config = self.write_config(dict(
            IDENTITY_RUN,
            operator={'kind': 'dense', 'matrix': [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]},
            data={'values': [1.0, 0.0, 1.0]}))
        code = main(['mdp', '--config', config, '--out', self.path('mdp.json')])
        self.assertEqual(code, EXIT_OK)
        output = self.read_json('mdp.json')
        validate_document(output, MDP_OUTPUT_SCHEMA)
        self.assertEqual(len(output['phi']), 2)
        self.assertTrue(0.15 - 1e-6 <= output['residual_norm'] <= 0.2 + 1e-6)

    def test_noise_above_data_norm(self):
        config = self.write_config(dict(IDENTITY_RUN, noise={'delta': 1.5}))
        code = main(['mdp', '--config', config, '--out', self.path('mdp.json')])
        self.assertEqual(code, EXIT_NO_ALPHA)

    def test_radii_required(self):
        document = dict(IDENTITY_RUN)
        del document['radii']
        code = main(['mdp', '--config', self.write_config(document), '--out', self.path('mdp.json')])
        self.assertEqual(code, EXIT_CONFIG)


class SweepCommandTest(CliTestCase):

    def run_sweep_command(self, document, out_dir='out'):
        config = self.write_config(document, 'sweep.json')
        return main(['sweep', '--config', config, '--out-dir', self.path(out_dir)])

    def test_passing_sweep(self):
        code = self.run_sweep_command(dict(IDENTITY_SWEEP, psi={'c': 1e6, 'kappa': 1.0}))
        self.assertEqual(code, EXIT_OK)
        rows = read_records_csv(self.path(os.path.join('out', 'records.csv')))
        self.assertEqual(len(rows), 5)
        self.assertTrue(all(row[flag] == 1 for row in rows for flag in CHECKLIST_FLAGS))
        self.assertIn('vsc_condition', self.stdout.getvalue())

    def test_tiny_index_function_fails(self):
        sweep = dict(IDENTITY_SWEEP['sweep'], psi_fit={'scale': 1e-9})
        code = self.run_sweep_command(dict(IDENTITY_SWEEP, sweep=sweep))
        self.assertEqual(code, EXIT_FLAGS)
        rows = read_records_csv(self.path(os.path.join('out', 'records.csv')))
        self.assertTrue(any(row['vsc_condition'] == 0 for row in rows))

    def test_missing_sweep_section(self):
        document = dict(IDENTITY_SWEEP)
        del document['sweep']
        self.assertEqual(self.run_sweep_command(document), EXIT_CONFIG)

    def test_delta_max_above_data_norm(self):
        sweep = dict(IDENTITY_SWEEP['sweep'], delta_max=10.0)
        self.assertEqual(
            self.run_sweep_command(dict(IDENTITY_SWEEP, sweep=sweep)), EXIT_CONFIG)

    def test_every_point_failed(self):
        with mock.patch('convreg.cli.run_sweep', side_effect=SweepFailure('all failed')):
            self.assertEqual(self.run_sweep_command(IDENTITY_SWEEP), EXIT_COMPUTATION)

    def test_exit_code_follows_flags(self):
        with mock.patch('convreg.cli.write_sweep_outputs'), \
                mock.patch('convreg.cli.print_tallies'), \
                mock.patch('convreg.cli.run_sweep') as run:
            run.return_value.all_flags_hold.return_value = True
            self.assertEqual(self.run_sweep_command(IDENTITY_SWEEP), EXIT_OK)
            run.return_value.all_flags_hold.return_value = False
            self.assertEqual(self.run_sweep_command(IDENTITY_SWEEP), EXIT_FLAGS)

    def test_outputs_are_byte_identical(self):
        document = dict(IDENTITY_SWEEP, sweep=dict(IDENTITY_SWEEP['sweep'], count=3))
        self.run_sweep_command(document, 'first')
        self.run_sweep_command(document, 'second')
        for name in ('report.json', 'records.csv'):
            with io.open(self.path(os.path.join('first', name)), 'rb') as first, \
                    io.open(self.path(os.path.join('second', name)), 'rb') as second:
                self.assertEqual(first.read(), second.read())


class VerifyCommandTest(CliTestCase):

    def sweep(self, document):
        config = self.write_config(document, 'sweep.json')
        main(['sweep', '--config', config, '--out-dir', self.tmpdir])
        return self.path('report.json')

    def small_sweep(self, **sections):
        document = dict(IDENTITY_SWEEP, sweep=dict(IDENTITY_SWEEP['sweep'], count=3))
        document.update(sections)
        return document

    def test_verify_passing_report(self):
        report = self.sweep(self.small_sweep(psi={'c': 1e6, 'kappa': 1.0}))
        self.assertEqual(main(['verify', '--report', report]), EXIT_OK)

    def test_verify_failing_report(self):
        report = self.sweep(self.small_sweep(psi={'c': 1e-9, 'kappa': 1.0}))
        self.assertEqual(main(['verify', '--report', report]), EXIT_FLAGS)

    def test_tampered_flags(self):
        report = self.sweep(self.small_sweep(psi={'c': 1e6, 'kappa': 1.0}))
        with io.open(report, encoding='utf-8') as handle:
            document = json.load(handle)
        document['records'][0]['checklist']['checks']['vsc_condition']['holds'] = False
        with io.open(report, 'w', encoding='utf-8') as handle:
            handle.write(json.dumps(document))
        self.assertEqual(main(['verify', '--report', report]), EXIT_FLAGS)

    def test_missing_report(self):
        self.assertEqual(main(['verify', '--report', self.path('none.json')]), EXIT_CONFIG)


if __name__ == '__main__':
    unittest.main()
