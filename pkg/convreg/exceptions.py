# -*- coding: utf-8 -*-

"""Exceptions raised by convreg."""


class ConvregError(Exception):
    """Base class of every convreg error."""
    pass


class RejectedInput(ConvregError, ValueError):
    """
    Exception raised when an argument violates a precondition: dimension
    mismatch, non-finite entries, non-positive parameters...
    """
    pass


class InvalidRadii(RejectedInput):
    """
    Exception raised when the discrepancy radii do not satisfy
    1 < tau_lower <= tau_upper < inf, or when delta is not positive.
    """
    pass


class InvalidIndexFunction(RejectedInput):
    """
    Exception raised when an index function is evaluated outside of its
    domain, or vanishes where it must be positive.
    """
    pass


class UnsupportedOperation(ConvregError):
    """Exception raised when a penalty does not provide an operation."""
    pass


class InsufficientData(ConvregError):
    """
    Exception raised when a regression is requested on less than three
    usable points, or on degenerate abscissae.
    """
    pass


class NoAdmissibleAlpha(ConvregError):
    """
    Exception raised when the discrepancy principle search cannot bracket
    the residual window.
    """

    def __init__(self, message, residual_low=None, residual_high=None):
        super(NoAdmissibleAlpha, self).__init__(message)
        self.residual_low = residual_low
        self.residual_high = residual_high


class ProbeFailure(ConvregError):
    """
    Exception raised when the solver does not converge for one of the
    regularization parameters probed by the discrepancy principle.
    """

    def __init__(self, message, alpha=None, solution=None):
        super(ProbeFailure, self).__init__(message)
        self.alpha = alpha
        self.solution = solution


class IncompleteRecord(ConvregError):
    """Exception raised when a sweep record lacks data needed by a check."""
    pass


class ConfigError(ConvregError):
    """Exception raised when a configuration document is invalid."""

    def __init__(self, message, path=None):
        if path:
            message = '%s: %s' % (path, message)
        super(ConfigError, self).__init__(message)
        self.path = path


class SweepFailure(ConvregError):
    """Exception raised when every noise level of a sweep failed."""
    pass
