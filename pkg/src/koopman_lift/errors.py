"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: configuration problems exit 2,
numerical failures exit 3, file/parse problems exit 4.
"""


class KoopmanLiftError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(KoopmanLiftError):
    """Invalid experiment configuration (schema violation, bad parameter)."""


class SizeError(ConfigError):
    """Data/dictionary size constraint violated (e.g. K < N for the main method)."""


class DataFormatError(KoopmanLiftError):
    """Malformed snapshot/model file."""


class NumericalError(KoopmanLiftError):
    """Generic numerical failure (SVD breakdown, non-finite values)."""


class BranchCutError(NumericalError):
    """An eigenvalue lies on (or too close to) the closed negative real axis,
    so the principal matrix logarithm is not defined.

    Attributes:
        eigenvalues: offending eigenvalues.
    """

    def __init__(self, message, eigenvalues=()):
        super().__init__(message)
        self.eigenvalues = list(eigenvalues)


class AliasingError(NumericalError):
    """Branch failure surfaced by an estimator: the sampling period is too
    large for the principal logarithm to recover the generator."""

    def __init__(self, message, eigenvalues=()):
        super().__init__(message)
        self.eigenvalues = list(eigenvalues)


class ConditioningError(NumericalError):
    """Rank deficiency or ill-conditioning that prevents the estimate."""

    def __init__(self, message, rank=None, needed=None):
        super().__init__(message)
        self.rank = rank
        self.needed = needed


class ConvergenceError(NumericalError):
    """Iterative solver exceeded its iteration budget.

    Attributes:
        history: per-sweep maximum coefficient updates, for diagnosis.
    """

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class DivergenceError(NumericalError):
    """Trajectory blow-up during integration."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class UndefinedMetricError(NumericalError):
    """Metric undefined for the given inputs (e.g. AUROC with degenerate truth)."""
