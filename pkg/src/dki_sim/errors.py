class DKIError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class InvalidParameter(DKIError, ValueError):
    exit_code = 2


class InvalidModel(InvalidParameter):
    exit_code = 3


class IndexOutOfRange(DKIError, IndexError):
    exit_code = 4


class DimensionTooLarge(DKIError):
    exit_code = 5


class ConfigError(DKIError):
    exit_code = 6


class ValidationFailed(DKIError):
    exit_code = 7
