"""Exception hierarchy shared across the toolkit."""


class ActsensError(Exception):
    """Base class for all toolkit errors."""


class IntegrationError(ActsensError):
    """Base class for ODE integration failures."""


class StepSizeUnderflow(IntegrationError):
    """Adaptive step control drove the step below the allowed minimum."""


class NonFiniteState(IntegrationError):
    """The right-hand side produced NaN or Inf."""


class PoleViolation(ActsensError, ValueError):
    """Relative CE length outside (0, ell_rho), where the length-dependency blows up."""


class DomainViolation(ActsensError, ValueError):
    """Activity outside the open interval where fractional powers are real."""


class DegenerateState(ActsensError, ValueError):
    """A closed-form expression is evaluated where its denominator vanishes."""


class MissingDerivative(ActsensError):
    """A model does not provide a partial derivative required by the requested analysis."""


class InvalidBounds(ActsensError, ValueError):
    """Parameter cuboid bounds are inconsistent (lower > upper)."""


class SamplingError(ActsensError):
    """Rejection sampling could not produce a valid sample row within the retry budget."""


class NoInteriorMaximum(ActsensError):
    """The isometric-force maximum lies on the search-interval boundary."""


class MaxIterationsExceeded(ActsensError):
    """The simplex search did not converge within the iteration cap."""


class ConfigError(ActsensError, ValueError):
    """Invalid run configuration (CLI exit code 2)."""
