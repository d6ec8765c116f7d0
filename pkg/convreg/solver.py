# -*- coding: utf-8 -*-

"""
Minimization of the Tikhonov functional

    F_alpha(phi) = 1/2 ||T phi - f||^2 + alpha * J(phi)

Penalties with a proximal map are handled by an accelerated proximal
gradient method (FISTA), smooth penalties without one by accelerated
gradient descent on the whole functional. Both use a backtracking line
search and a function value restart, which keeps the objective values
non-increasing from one iteration to the next, up to rounding.

Not converging within the iteration budget is not an error: the best
iterate is returned with `converged=False`.

"""

from __future__ import division

import logging
from collections import namedtuple

import numpy as np
import scipy.linalg

from convreg.exceptions import ConvregError
from convreg.exceptions import RejectedInput
from convreg.linops import Signal
from convreg.linops import operator_norm_estimate
from convreg.utils import weighted_inner
from convreg.utils import weighted_norm

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 20000
BACKTRACKING_FACTOR = 0.5
POWER_ITERATIONS = 20
POWER_ITERATION_SEED = 0
MAX_LIPSCHITZ = 1e300
ROUNDING_SLACK = 1e-13


RegularizedSolution = namedtuple('RegularizedSolution', [
    'phi',
    'objective_value',
    'residual_norm',
    'penalty_value',
    'optimality_defect',
    'iterations',
    'converged',
    'alpha',
    'history',
])


class VariationalProblem(object):

    """The data of a Tikhonov problem: operator, noisy data, penalty and
    regularization parameter.

    """

    def __init__(self, op, data, penalty, alpha):
        if not (np.isfinite(alpha) and alpha > 0):
            raise RejectedInput('alpha must be positive')
        if len(data) != op.out_dim:
            raise RejectedInput(
                'data has length %d, operator output dimension is %d' % (
                    len(data), op.out_dim))
        if not np.isclose(data.grid_spacing, op.grid_spacing):
            raise RejectedInput('data and operator grids differ')
        self.op = op
        self.data = data
        self.penalty = penalty
        self.alpha = float(alpha)

    @property
    def grid_spacing(self):
        return self.op.grid_spacing

    def with_alpha(self, alpha):
        return VariationalProblem(self.op, self.data, self.penalty, alpha)

    def objective(self, x):
        """F_alpha at the array x."""
        h = self.grid_spacing
        r = self.op.forward(x) - self.data.values
        return 0.5 * weighted_inner(r, r, h) + self.alpha * self.penalty.value(x, h)

    def defect(self, x):
        """Normalized distance to first order optimality at the array x.

        With q = T*(f - T x) / alpha, optimality reads q in dJ(x). For a
        differentiable J this is measured as ||q - grad J(x)||, otherwise as
        the fixed point residual ||x - prox_J(x + q, 1)||.

        """
        h = self.grid_spacing
        q = self.op.adjoint(self.data.values - self.op.forward(x)) / self.alpha
        if self.penalty.differentiable:
            grad = self.penalty.gradient(x, h)
            return weighted_norm(q - grad, h) / (1.0 + weighted_norm(grad, h))
        fixed_point = self.penalty.prox(x + q, 1.0)
        return weighted_norm(x - fixed_point, h) / (1.0 + weighted_norm(q, h))

    def solution(self, x, iterations, converged, history=None):
        h = self.grid_spacing
        residual = weighted_norm(self.op.forward(x) - self.data.values, h)
        penalty_value = self.penalty.value(x, h)
        return RegularizedSolution(
            phi=Signal(x, h),
            objective_value=0.5 * residual ** 2 + self.alpha * penalty_value,
            residual_norm=residual,
            penalty_value=penalty_value,
            optimality_defect=self.defect(x),
            iterations=iterations,
            converged=converged,
            alpha=self.alpha,
            history=tuple(history) if history is not None else None,
        )


class AcceleratedSolver(object):

    """FISTA with backtracking and function value restart.

    The smooth part is the data term (plus alpha * J when J has no proximal
    map); the non-smooth part is alpha * J otherwise.

    """

    def __init__(self, problem, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
        if not tol > 0:
            raise RejectedInput('tol must be positive')
        self.problem = problem
        self.tol = tol
        self.max_iter = int(max_iter)
        self.use_prox = problem.penalty.has_prox
        estimate = operator_norm_estimate(
            problem.op, POWER_ITERATIONS, POWER_ITERATION_SEED)
        self.lipschitz = estimate if estimate > 0 else 1.0

    def _smooth(self, x):
        p = self.problem
        h = p.grid_spacing
        r = p.op.forward(x) - p.data.values
        value = 0.5 * weighted_inner(r, r, h)
        grad = p.op.adjoint(r)
        if not self.use_prox:
            value += p.alpha * p.penalty.value(x, h)
            grad = grad + p.alpha * p.penalty.gradient(x, h)
        return value, grad

    def _smooth_value(self, x):
        p = self.problem
        h = p.grid_spacing
        r = p.op.forward(x) - p.data.values
        value = 0.5 * weighted_inner(r, r, h)
        if not self.use_prox:
            value += p.alpha * p.penalty.value(x, h)
        return value

    def _step(self, y):
        """One (proximal) gradient step from y, with backtracking on 1/L."""
        p = self.problem
        h = p.grid_spacing
        value_y, grad_y = self._smooth(y)
        while True:
            x = y - grad_y / self.lipschitz
            if self.use_prox:
                x = p.penalty.prox(x, p.alpha / self.lipschitz)
            diff = x - y
            model = (value_y + weighted_inner(grad_y, diff, h)
                     + 0.5 * self.lipschitz * weighted_inner(diff, diff, h))
            slack = 1e-12 * (1.0 + abs(value_y))
            if self._smooth_value(x) <= model + slack:
                return x
            if self.lipschitz > MAX_LIPSCHITZ:
                return x
            self.lipschitz /= BACKTRACKING_FACTOR

    def run(self, x0=None, record_history=False):
        p = self.problem
        x = np.zeros(p.op.in_dim) if x0 is None else np.array(x0, dtype=float)
        y = x
        t = 1.0
        value = p.objective(x)
        history = [value] if record_history else None

        best_x, best_defect = x, p.defect(x)
        if best_defect <= self.tol:
            return p.solution(x, 0, True, history)

        iterations = 0
        for iterations in range(1, self.max_iter + 1):
            x_new = self._step(y)
            value_new = p.objective(x_new)
            if value_new > value:
                # restart the momentum from the last accepted iterate
                t = 1.0
                x_new = self._step(x)
                value_new = p.objective(x_new)
                if value_new > value + ROUNDING_SLACK * (1.0 + abs(value)):
                    log.debug('no descent left after %d iterations', iterations)
                    break
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            x, value, t = x_new, value_new, t_new
            if record_history:
                history.append(value)

            defect = p.defect(x)
            if defect < best_defect:
                best_x, best_defect = x, defect
            if defect <= self.tol:
                return p.solution(x, iterations, True, history)

        converged = best_defect <= self.tol
        if not converged:
            log.warning(
                'solver stopped after %d iterations with defect %.3e > %.1e '
                '(alpha=%.6e)', iterations, best_defect, self.tol, p.alpha)
        return p.solution(best_x, iterations, converged, history)


def minimize_tikhonov(problem, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                      x0=None, record_history=False):
    """Return the RegularizedSolution minimizing F_alpha.

    x0 (a Signal or an array) warm starts the iteration. With
    record_history, the objective value of every accepted iterate is kept
    in `history`.

    """
    if isinstance(x0, Signal):
        x0 = x0.values
    solver = AcceleratedSolver(problem, tol, max_iter)
    return solver.run(x0, record_history)


def optimality_defect(problem, phi):
    """Scalar distance to the first order optimality condition; 0 exactly at
    a minimizer.

    """
    if len(phi) != problem.op.in_dim:
        raise RejectedInput('phi does not match the operator input dimension')
    return problem.defect(phi.values)


def closed_form_quadratic(op, data, alpha):
    """Solve (T*T + alpha I) phi = T* f by a Cholesky factorization.

    This is the exact minimizer for the quadratic penalty, used as an
    independent oracle for `minimize_tikhonov`.

    """
    if not alpha > 0:
        raise RejectedInput('alpha must be positive')
    matrix = op.dense
    normal = matrix.T.dot(matrix) + alpha * np.eye(op.in_dim)
    try:
        factor = scipy.linalg.cho_factor(normal)
    except np.linalg.LinAlgError as exc:
        raise ConvregError('singular normal equations: %s' % exc)
    phi = scipy.linalg.cho_solve(factor, matrix.T.dot(data.values))
    return Signal(phi, op.grid_spacing)


def objective(problem, phi):
    """F_alpha(phi, f)"""
    return problem.objective(phi.values)
