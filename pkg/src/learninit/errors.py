"""Exception hierarchy shared across the package.

Each class maps to one CLI exit code (see ``learninit.cli``).
"""


class LearnInitError(Exception):
    exit_code = 1


class InputError(LearnInitError, ValueError):
    """Malformed argument: wrong dimension, out-of-range parameter."""

    exit_code = 2


class ConfigError(LearnInitError):
    """Inconsistent or unusable configuration."""

    exit_code = 2


class NumericalError(LearnInitError, FloatingPointError):
    """A non-finite value showed up during optimization or training."""

    exit_code = 3

    def __init__(self, message, index=None):
        super().__init__(message if index is None else f"{message} (at index {index})")
        self.index = index


class TrainingError(LearnInitError):
    """A model failed its post-training quality gate."""

    exit_code = 3
