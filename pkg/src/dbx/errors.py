"""Exception hierarchy shared by every dbx module."""


class DbxError(Exception):
    """Base class for all errors raised by dbx."""


class DomainError(DbxError, ValueError):
    """A parameter lies outside the domain an operation can handle."""


class NonFiniteError(DbxError, ArithmeticError):
    """An evaluator produced NaN or infinity."""


class RegularityError(DbxError):
    """A curve or surface is not regular at some parameter value."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class SingularCurvatureError(DbxError):
    """Curvature fell below the cutoff, so 1/curvature is undefined."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class FrameUndefinedError(SingularCurvatureError):
    """The Frenet frame does not exist (straight segment)."""


class FrameDriftError(DbxError):
    """An integrated moving frame lost orthonormality beyond the budget."""


class IntegrationError(DbxError):
    """ODE integration produced a non-finite state."""

    def __init__(self, message, last_good):
        super().__init__(message)
        self.last_good = last_good


class CaseInapplicableError(DbxError):
    """A closed form was requested for data that violates its hypotheses."""


class InconsistentInitialDataError(DbxError):
    """Initial coefficients do not satisfy a required compatibility condition."""


class ThetaRangeError(DbxError):
    """A coefficient trajectory does not cover the requested angle range."""


class ScenarioError(DbxError):
    """A scenario file is malformed; ``field`` names the offending key path."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class DegenerateParameterError(DbxError, ZeroDivisionError):
    """A closed form divides by a parameter that is zero."""
