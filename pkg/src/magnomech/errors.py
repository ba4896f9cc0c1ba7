"""Exception types shared across the package."""


class MagnomechError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(MagnomechError):
    """Base class for failures of the numerical pipeline (CLI exit code 3)."""


class NonConvergence(NumericalError):
    """Fixed-point iteration for the operating point did not converge."""


class EigenFailure(NumericalError):
    """Eigenvalue routine failed to converge on the drift matrix."""


class Unstable(NumericalError):
    """Operation requires a strictly stable drift matrix."""


class SingularSystem(NumericalError):
    """Lyapunov solve is numerically singular (near-marginal stability)."""


class Divergence(NumericalError):
    """Time integration exceeded the overflow guard."""


class UnphysicalInput(NumericalError):
    """Covariance matrix violates two-mode physicality conditions."""


class NoStablePoint(NumericalError):
    """Optimization found no stable point inside the search bounds."""


class ConfigError(MagnomechError):
    """Base class for configuration problems (CLI exit code 2)."""


class ParseError(ConfigError):
    """Configuration file is missing, empty or not valid YAML."""


class ValidationError(ConfigError):
    """A configuration value is missing, mistyped or out of range."""


class UnknownKeyError(ConfigError):
    """Configuration contains a key that is not part of the schema."""
