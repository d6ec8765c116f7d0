# -*- coding: utf-8 -*-

"""
Convreg solves linear ill-posed problems T phi = f by minimizing the
Tikhonov functional 1/2 ||T phi - f||^2 + alpha J(phi) for convex penalties
J, selects alpha with Morozov's discrepancy principle, and checks the
Bregman distance convergence rates obeyed by that choice on noise sweeps.
"""

__title__ = 'convreg'
__version__ = '0.1.0'
__author__ = 'Balthazar Rouberol'

from convreg.linops import Signal, DenseMap, ConvolutionMap
from convreg.linops import operator_from_spec
from convreg.penalties import penalty_from_spec, bregman, subgradient
from convreg.solver import VariationalProblem, minimize_tikhonov
from convreg.mdp import DiscrepancyRadii, select_alpha_mdp
from convreg.vsc import IndexFunction, check_theorems
from convreg.harness import SweepConfig, run_sweep, fit_rates
