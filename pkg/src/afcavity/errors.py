"""Exception types raised by afcavity.

All of them derive from ``ValueError`` or ``RuntimeError`` so callers that
do not care about the distinction can catch the builtin.
"""


class AFCError(Exception):
    """Base class for every error raised by this package."""

    #: short machine-readable tag, printed by the CLI
    code = "error"


class ParameterError(AFCError, ValueError):
    code = "invalid_parameter"


class DegenerateCavityError(ParameterError):
    code = "degenerate_cavity"


class UnphysicalGainError(ParameterError):
    code = "unphysical_gain"


class ValidityError(AFCError, ValueError):
    """Closed-form result evaluated outside the regime where it holds."""

    code = "out_of_validity"


class DiscretizationError(ParameterError):
    code = "discretization"


class ConfigurationError(ParameterError):
    code = "configuration"


class CalibrationError(AFCError, RuntimeError):
    code = "calibration"


class IntegratorBlowupError(AFCError, RuntimeError):
    code = "integrator_blowup"


class ConsistencyError(AFCError, RuntimeError):
    code = "internal_consistency"
