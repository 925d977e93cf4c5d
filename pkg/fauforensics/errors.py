"""Exception hierarchy shared by the tensor core, services and CLI"""

from typing import Optional


class FauForensicsError(Exception):
    """Base error; exit_code is what the CLI returns for it"""
    exit_code = 2
    kind = "error"


class UsageError(FauForensicsError):
    """Caller misused an API or passed invalid flags"""
    exit_code = 1
    kind = "usage"


class DimensionError(FauForensicsError):
    """Tensor extents do not match"""
    kind = "dimension"


class NumericDomainError(FauForensicsError):
    """NaN or Inf where finite values are required"""
    kind = "numeric"


class LabelError(FauForensicsError):
    """Class index outside [0, C)"""
    kind = "label"


class InputError(FauForensicsError):
    """Input signal or file content cannot be processed"""
    kind = "input"


class FormatError(FauForensicsError):
    """Binary file does not match its declared format"""
    kind = "format"

    def __init__(self, message: str, offset: Optional[int] = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ConfigError(FauForensicsError):
    """Configuration values violate their invariants"""
    kind = "config"


class DataError(FauForensicsError):
    """Data set is empty or incompatible with the requested run"""
    kind = "data"


class TrainingError(FauForensicsError):
    """Training diverged or optimizer state is inconsistent with the parameters"""
    kind = "training"


class MetricError(FauForensicsError):
    """Metric is undefined for the given input"""
    kind = "metric"


class CheckFailure(FauForensicsError):
    """A numerical check (gradient check, acceptance gate) failed"""
    exit_code = 3
    kind = "check"
