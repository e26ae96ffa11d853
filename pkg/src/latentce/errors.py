"""Exception types shared across the package."""


class LatentCeError(Exception):
    """Base class for all package errors."""


class DomainError(LatentCeError, ValueError):
    """An argument is outside its mathematical domain."""


class ShapeError(LatentCeError, ValueError):
    """Tensor/array dimensions do not match the expected shape."""


class CorruptCorpusError(LatentCeError):
    """A corpus manifest or image file fails validation."""

    def __init__(self, message, sample_id=None):
        super().__init__(message)
        self.sample_id = sample_id


class DegenerateDataError(LatentCeError, ValueError):
    """Probe training data does not contain both classes, or is otherwise unusable."""


class CalibrationRejectedError(LatentCeError, ValueError):
    """A fitted calibration violates monotonicity or is degenerate."""


class OutOfRangeError(LatentCeError, ValueError):
    """A target value lies outside the invertible range of a calibration."""


class UndefinedMetricError(LatentCeError, ValueError):
    """A metric is undefined for the given inputs (e.g. single-class AUC)."""


class NumericError(LatentCeError, ArithmeticError):
    """A numerical routine detected an ill-conditioned or inconsistent result."""


class OptimizerError(LatentCeError):
    """A parameter update received non-finite gradients."""

    def __init__(self, message, param_name=None):
        super().__init__(message)
        self.param_name = param_name


class TrainingError(LatentCeError):
    """Training aborted (e.g. non-finite loss)."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class FormatError(LatentCeError):
    """A binary artifact file has a bad magic/version or is truncated."""


class ConfigError(LatentCeError):
    """Mismatched or missing runtime artifacts."""
