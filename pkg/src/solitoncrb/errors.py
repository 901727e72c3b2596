"""Exception hierarchy. The CLI maps each class to an exit code."""


class SolitonCRBError(Exception):
    exit_code = 1


class DomainError(SolitonCRBError, ValueError):
    """Input outside the domain of an operation (bad parameter, grid outside box)."""

    exit_code = 2


class ConfigError(SolitonCRBError, ValueError):
    exit_code = 2


class ModelValidityError(SolitonCRBError):
    """The physical model broke down (negative density, indefinite covariance)."""

    exit_code = 3


class DegenerateModelError(ModelValidityError):
    pass


class NumericalPrecisionError(SolitonCRBError):
    exit_code = 4
