"""Exception hierarchy.

Every error carries an ``error_class`` string used by the command line tool
to report failures in a machine readable way and pick the exit code.
"""


class GsgError(Exception):
    error_class = "gsg-error"
    exit_code = 1


class InvalidSpinError(GsgError, ValueError):
    error_class = "invalid-spin"
    exit_code = 2


class DomainError(GsgError, ValueError):
    error_class = "domain-error"
    exit_code = 2


class DimensionMismatchError(GsgError, ValueError):
    error_class = "dimension-mismatch"
    exit_code = 2


class NotHermitianError(GsgError, ValueError):
    error_class = "not-hermitian"
    exit_code = 3


class UnboundedSplittingTimeError(GsgError, ValueError):
    """Raised when a vanishing gradient makes the trap frequency zero."""

    error_class = "unbounded-splitting-time"
    exit_code = 3


class TruncationError(GsgError, RuntimeError):
    error_class = "fock-truncation"
    exit_code = 3


class ConfigError(GsgError, ValueError):
    error_class = "config-error"
    exit_code = 2

    def __init__(self, key_path, message):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}" if key_path else message)


class OutputError(GsgError, OSError):
    error_class = "io-error"
    exit_code = 4
