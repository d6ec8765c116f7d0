# -*- coding: utf-8 -*-

import io
import os
import shutil
import tempfile
import unittest

import convreg
from convreg.config import RunConfig
from convreg.config import read_document
from convreg.config import validate_document
from convreg.exceptions import ConfigError
from convreg.harness import SweepConfig
from convreg.linops import Signal

DATA_DIR = os.path.join(os.path.dirname(convreg.__file__), 'data')


def identity_document(**sections):
    document = {
        'operator': {'kind': 'identity'},
        'penalty': {'kind': 'quadratic'},
        'data': {'values': [1.0, 0.0]},
        'noise': {'delta': 0.1},
        'radii': {'tau_lower': 1.5, 'tau_upper': 2.0},
    }
    document.update(sections)
    return document


class ValidateDocumentTest(unittest.TestCase):

    def assertRejected(self, document, path):
        with self.assertRaises(ConfigError) as context:
            validate_document(document)
        self.assertEqual(context.exception.path, path)

    def test_valid(self):
        document = identity_document(search={'alpha0': None, 'max_probes': 10})
        self.assertIs(validate_document(document), document)

    def test_unknown_keys(self):
        self.assertRejected(identity_document(output={}), 'output')
        self.assertRejected(identity_document(solver={'tolerance': 1e-6}), 'solver.tolerance')
        self.assertRejected(
            identity_document(sweep={'delta_max': 0.1, 'factor': 0.5, 'count': 3,
                                     'psi_fit': {'kind': 'power'}}),
            'sweep.psi_fit.kind')

    def test_wrong_types(self):
        self.assertRejected(identity_document(solver={'tol': '1e-6'}), 'solver.tol')
        self.assertRejected(identity_document(solver={'max_iter': True}), 'solver.max_iter')
        self.assertRejected(identity_document(data={'values': [1.0, 'a']}), 'data.values')
        self.assertRejected(
            identity_document(operator={'kind': 'dense', 'matrix': [1.0, 2.0]}),
            'operator.matrix')

    def test_choices(self):
        self.assertRejected(identity_document(penalty={'kind': 'huber'}), 'penalty.kind')
        self.assertRejected(
            identity_document(bounds={'alpha_max_variant': 'other'}),
            'bounds.alpha_max_variant')

    def test_missing_required(self):
        self.assertRejected(identity_document(radii={'tau_lower': 1.5}), 'radii.tau_upper')
        self.assertRejected(identity_document(penalty={}), 'penalty.kind')

    def test_message_carries_path(self):
        with self.assertRaises(ConfigError) as context:
            validate_document(identity_document(solver={'tol': 'x'}))
        self.assertTrue(str(context.exception).startswith('solver.tol: '))


class RunConfigTest(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def write(self, content):
        path = os.path.join(self.tmpdir, 'run.json')
        with io.open(path, 'w', encoding='utf-8') as handle:
            handle.write(content)
        return path

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            RunConfig.load(os.path.join(self.tmpdir, 'missing.json'))

    def test_invalid_json(self):
        with self.assertRaises(ConfigError):
            RunConfig.load(self.write(u'{"operator": '))

    def test_load(self):
        config = RunConfig.load(self.write(
            u'{"operator": {"kind": "identity"}, "penalty": {"kind": "l1"},'
            u' "data": {"values": [1.0, 2.0, 3.0], "grid_spacing": 0.5}}'))
        self.assertEqual(config.dim, 3)
        self.assertEqual(config.build_data(), Signal([1.0, 2.0, 3.0], 0.5))
        self.assertEqual(config.build_operator().grid_spacing, 0.5)
        self.assertEqual(config.solver_settings(), (1e-8, 20000))

    def test_phantom_data_with_noise(self):
        config = RunConfig({
            'operator': {'kind': 'identity'},
            'penalty': {'kind': 'quadratic'},
            'phantom': {'name': 'step', 'dim': 8},
            'noise': {'delta': 0.2, 'seed': 1},
        })
        data = config.build_data()
        f_true = config.build_operator().apply(config.build_phantom())
        self.assertAlmostEqual((data - f_true).norm(), 0.2, places=12)
        self.assertEqual(config.true_penalty_value(), 2.0)

    def test_non_square_dense_operator(self):
        matrix = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
        config = RunConfig(identity_document(
            operator={'kind': 'dense', 'matrix': matrix},
            data={'values': [1.0, 0.0, 1.0]}))
        op = config.build_operator()
        self.assertEqual((op.in_dim, op.out_dim), (2, 3))

    def test_dense_columns_follow_phantom(self):
        document = {
            'operator': {'kind': 'dense', 'matrix': [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]},
            'penalty': {'kind': 'quadratic'},
            'phantom': {'name': 'step', 'dim': 3},
        }
        with self.assertRaises(ConfigError) as context:
            RunConfig(document).build_operator()
        self.assertEqual(context.exception.path, 'operator')
        document['phantom']['dim'] = 2
        self.assertEqual(len(RunConfig(document).build_data()), 3)

    def test_radii_need_noise_level(self):
        document = identity_document()
        del document['noise']
        with self.assertRaises(ConfigError) as context:
            RunConfig(document).radii()
        self.assertEqual(context.exception.path, 'noise')

    def test_invalid_radii(self):
        config = RunConfig(identity_document(radii={'tau_lower': 2.0, 'tau_upper': 1.5}))
        with self.assertRaises(ConfigError) as context:
            config.radii()
        self.assertEqual(context.exception.path, 'radii')

    def test_index_function(self):
        self.assertIsNone(RunConfig(identity_document()).index_function())
        config = RunConfig(identity_document(psi={'c': 2.0, 'kappa': 0.5}))
        self.assertEqual(config.index_function()(4.0), 4.0)
        with self.assertRaises(ConfigError):
            RunConfig(identity_document(psi={'c': 2.0, 'kappa': 2.0})).index_function()

    def test_sweep_section_required(self):
        with self.assertRaises(ConfigError) as context:
            RunConfig(identity_document()).sweep_config()
        self.assertEqual(context.exception.path, 'sweep')


class ShippedConfigurationsTest(unittest.TestCase):

    def test_shipped_sweeps_are_valid(self):
        names = sorted(os.listdir(DATA_DIR))
        self.assertEqual(names, [
            'convolution_l1.json', 'convolution_smoothed_tv.json',
            'identity_quadratic.json'])
        for name in names:
            config = RunConfig(read_document(os.path.join(DATA_DIR, name))).sweep_config()
            self.assertIsInstance(config, SweepConfig)
            self.assertEqual(len(config.deltas()), 6)


if __name__ == '__main__':
    unittest.main()
