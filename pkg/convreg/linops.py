# -*- coding: utf-8 -*-

"""
Discretized signals and linear forward operators.

Every vector lives on a uniform 1D grid; inner products and norms are
weighted by the grid spacing so that they approximate their continuous L2
counterparts. Domain and data space of an operator share the same spacing,
which makes the adjoint of a dense operator its plain transpose.

Two realizations of the forward operator are provided:

 * DenseMap: an explicit, injective (full column rank) matrix
 * ConvolutionMap: a 1D convolution with zero padding, whose output has the
   same length as its input

"""

from __future__ import division

import numpy as np
import scipy.linalg

from convreg.exceptions import RejectedInput
from convreg.utils import cached_property
from convreg.utils import random_stream
from convreg.utils import weighted_inner
from convreg.utils import weighted_norm

RANK_TOLERANCE = 1e-10


def _as_finite_vector(values, what='values'):
    arr = np.array(values, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise RejectedInput('%s must be a non-empty 1D sequence' % what)
    if not np.all(np.isfinite(arr)):
        raise RejectedInput('%s must be finite' % what)
    return arr


class Signal(object):

    """Immutable real vector sampled on a uniform grid.

    :param values: the samples (sequence of finite reals, length >= 1)
    :param grid_spacing: the grid step h > 0, weighting inner products

    """

    def __init__(self, values, grid_spacing=1.0):
        arr = _as_finite_vector(values)
        if not (np.isfinite(grid_spacing) and grid_spacing > 0):
            raise RejectedInput('grid_spacing must be positive')
        arr.flags.writeable = False
        self.values = arr
        self.grid_spacing = float(grid_spacing)

    def like(self, values):
        """Return a new Signal on the same grid."""
        return Signal(values, self.grid_spacing)

    def __len__(self):
        return self.values.size

    def __iter__(self):
        return iter(self.values.tolist())

    def __repr__(self):
        return 'Signal(%r, grid_spacing=%r)' % (
            self.values.tolist(), self.grid_spacing)

    def __eq__(self, other):
        return (
            isinstance(other, Signal)
            and self.grid_spacing == other.grid_spacing
            and np.array_equal(self.values, other.values))

    def __ne__(self, other):
        return not self == other

    __hash__ = None

    def _check_same_grid(self, other):
        if len(other) != len(self):
            raise RejectedInput(
                'length mismatch: %d != %d' % (len(self), len(other)))
        if not np.isclose(other.grid_spacing, self.grid_spacing):
            raise RejectedInput('grid spacing mismatch')

    def __add__(self, other):
        self._check_same_grid(other)
        return self.like(self.values + other.values)

    def __sub__(self, other):
        self._check_same_grid(other)
        return self.like(self.values - other.values)

    def __mul__(self, scalar):
        return self.like(self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self.like(-self.values)

    def inner(self, other):
        """Grid-weighted inner product."""
        self._check_same_grid(other)
        return weighted_inner(self.values, other.values, self.grid_spacing)

    def norm(self):
        """sqrt(sum(values[i] ** 2) * grid_spacing)"""
        return weighted_norm(self.values, self.grid_spacing)

    def to_list(self):
        return self.values.tolist()


class LinearMap(object):

    """Linear operator T with its exact adjoint T*.

    Subclasses override `_forward` and `_adjoint`, which act on plain
    numpy arrays of the right length.

    """

    kind = None

    def __init__(self, in_dim, out_dim, grid_spacing=1.0):
        if in_dim < 1 or out_dim < 1:
            raise RejectedInput('operator dimensions must be positive')
        if not (np.isfinite(grid_spacing) and grid_spacing > 0):
            raise RejectedInput('grid_spacing must be positive')
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        self.grid_spacing = float(grid_spacing)

    def _forward(self, x):
        raise NotImplementedError

    def _adjoint(self, y):
        raise NotImplementedError

    def forward(self, x):
        """Array-level forward action, used by the solvers."""
        if x.shape != (self.in_dim,):
            raise RejectedInput(
                'expected an input of length %d, got %d' % (self.in_dim, x.size))
        return self._forward(x)

    def adjoint(self, y):
        """Array-level adjoint action, used by the solvers."""
        if y.shape != (self.out_dim,):
            raise RejectedInput(
                'expected an input of length %d, got %d' % (self.out_dim, y.size))
        return self._adjoint(y)

    def _check_grid(self, signal):
        if not np.isclose(signal.grid_spacing, self.grid_spacing):
            raise RejectedInput(
                'signal grid spacing %r does not match the operator one %r' % (
                    signal.grid_spacing, self.grid_spacing))

    def apply(self, x):
        self._check_grid(x)
        return Signal(self.forward(x.values), self.grid_spacing)

    def apply_adjoint(self, y):
        self._check_grid(y)
        return Signal(self.adjoint(y.values), self.grid_spacing)

    def to_dense(self):
        """Assemble the operator matrix column by column."""
        columns = []
        for j in range(self.in_dim):
            e_j = np.zeros(self.in_dim)
            e_j[j] = 1.0
            columns.append(self._forward(e_j))
        return np.column_stack(columns)

    @cached_property
    def dense(self):
        matrix = self.to_dense()
        matrix.flags.writeable = False
        return matrix


class DenseMap(LinearMap):

    """Explicit matrix operator, validated to be injective."""

    kind = 'dense'

    def __init__(self, matrix, grid_spacing=1.0, check_rank=True):
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.size == 0:
            raise RejectedInput('matrix must be a non-empty 2D grid')
        if not np.all(np.isfinite(matrix)):
            raise RejectedInput('matrix entries must be finite')
        rows, cols = matrix.shape
        super(DenseMap, self).__init__(cols, rows, grid_spacing)
        if check_rank and numerical_rank(matrix) < cols:
            raise RejectedInput(
                'matrix does not have full column rank (operator not injective)')
        matrix.flags.writeable = False
        self.matrix = matrix

    def _forward(self, x):
        return self.matrix.dot(x)

    def _adjoint(self, y):
        return self.matrix.T.dot(y)

    def to_dense(self):
        return np.array(self.matrix)


class ConvolutionMap(LinearMap):

    """1D convolution with a kernel, zero padded, same-size output.

    The output sample i is sum_j kernel[j] * x[i + c - j] with the center
    c = (len(kernel) - 1) // 2, and x taken as 0 outside of its support.

    """

    kind = 'convolution'

    def __init__(self, kernel, dim, grid_spacing=1.0):
        if isinstance(kernel, Signal):
            kernel = kernel.values
        kernel = _as_finite_vector(kernel, 'kernel')
        super(ConvolutionMap, self).__init__(dim, dim, grid_spacing)
        kernel.flags.writeable = False
        self.kernel = kernel
        self.center = (kernel.size - 1) // 2

    def _forward(self, x):
        full = np.convolve(x, self.kernel, mode='full')
        return full[self.center:self.center + self.in_dim]

    def _adjoint(self, y):
        # adjoint of the slicing: embed y in the full convolution support
        embedded = np.zeros(self.in_dim + self.kernel.size - 1)
        embedded[self.center:self.center + self.out_dim] = y
        return np.correlate(embedded, self.kernel, mode='valid')


def numerical_rank(matrix, tolerance=RANK_TOLERANCE):
    """Rank of the matrix from a column pivoted QR factorization.

    Diagonal entries of R smaller than tolerance * |R[0, 0]| are considered
    to be zero.

    """
    r = scipy.linalg.qr(matrix, mode='r', pivoting=True)[0]
    diagonal = np.abs(np.diag(r))
    if diagonal.size == 0 or diagonal[0] == 0:
        return 0
    return int(np.sum(diagonal > tolerance * diagonal[0]))


def identity(dim, grid_spacing=1.0):
    return DenseMap(np.eye(dim), grid_spacing, check_rank=False)


def random_dense(dim, seed, grid_spacing=1.0):
    """Seeded random square operator, normalized to an O(1) spectral norm."""
    rng = random_stream(seed)
    matrix = rng.standard_normal((dim, dim)) / np.sqrt(dim)
    return DenseMap(matrix, grid_spacing)


def operator_from_spec(spec, dim=None, grid_spacing=1.0):
    """Build a LinearMap from its configuration dict.

    Identity and convolution operators take their input dimension from the
    `dim` argument (usually the phantom dimension), e.g.
    {'kind': 'convolution', 'kernel': [0.5, 0.5]} with dim=3.

    """
    kind = spec.get('kind')
    if kind == 'dense':
        op = DenseMap(spec['matrix'], grid_spacing)
        if dim is not None and op.in_dim != dim:
            raise RejectedInput(
                'dense operator has %d columns, expected %d' % (op.in_dim, dim))
        return op
    if dim is None:
        raise RejectedInput('a dimension is needed to build a %s operator' % kind)
    if kind == 'identity':
        return identity(dim, grid_spacing)
    if kind == 'convolution':
        return ConvolutionMap(spec['kernel'], dim, grid_spacing)
    raise RejectedInput('unknown operator kind %r' % kind)


def apply(op, x):
    """Return T x."""
    return op.apply(x)


def apply_adjoint(op, y):
    """Return T* y."""
    return op.apply_adjoint(y)


def adjoint_check(op, trials=100, seed=0):
    """Largest relative adjoint defect over seeded random pairs.

    For each trial, draws x and y and returns the max of
    |<Tx, y> - <x, T*y>| / (1 + |<Tx, y>|).

    """
    if trials < 1:
        raise RejectedInput('trials must be >= 1')
    rng = random_stream(seed)
    h = op.grid_spacing
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(op.in_dim)
        y = rng.standard_normal(op.out_dim)
        lhs = weighted_inner(op.forward(x), y, h)
        rhs = weighted_inner(x, op.adjoint(y), h)
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
    return worst


def constant_nonvanish_check(op):
    """Return ||T 1||; values below 1e-12 mean T annihilates constants."""
    return weighted_norm(op.forward(np.ones(op.in_dim)), op.grid_spacing)


def operator_norm_estimate(op, iterations=20, seed=0):
    """Power iteration estimate of ||T||^2 (largest eigenvalue of T*T)."""
    x = random_stream(seed).standard_normal(op.in_dim)
    h = op.grid_spacing
    estimate = 0.0
    for _ in range(iterations):
        norm = weighted_norm(x, h)
        if norm == 0:
            return 0.0
        x = x / norm
        x = op.adjoint(op.forward(x))
        estimate = weighted_norm(x, h)
    return estimate
