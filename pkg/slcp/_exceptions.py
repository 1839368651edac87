from abc import ABC


class SlcpException(Exception, ABC):
    """
    Base class for all library exceptions.
    """

    pass


class ModelError(SlcpException):
    """
    Raised when a problem, monomial or posynomial is constructed with invalid data,
    e.g. a nonpositive coefficient or an exponent vector of the wrong dimension.
    """

    pass


class DomainError(SlcpException):
    """
    Raised when a function is evaluated outside its domain,
    e.g. at a nonpositive variable value or when a black box returns a nonpositive value.
    """

    pass


class PositivityError(DomainError):
    """
    Raised when a log-space quantity is requested for a nonpositive function value.
    """

    pass


class SolverError(SlcpException, ABC):
    """
    Base class for all solver errors.
    """

    pass


class SubproblemError(SolverError):
    """
    Raised when a sub-problem is built from non-finite data and cannot be solved at all.
    """

    pass


class BenchmarkError(SlcpException, ABC):
    """
    Base class for all benchmark-related errors.
    """

    pass


class UnknownBenchmarkError(BenchmarkError):
    """
    Raised when a benchmark id is not registered.
    """

    pass


class ConstantsError(BenchmarkError):
    """
    Raised when a constants file is missing, malformed or lacks required keys.
    """

    pass


class ReferenceOptimumError(BenchmarkError):
    """
    Raised when a reference optimum is infeasible under its own problem
    or a stored reference would be overwritten without permission.
    """

    pass
