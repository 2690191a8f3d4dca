"""Exception types shared across the package."""


class CylfrontsError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(CylfrontsError):
    """Invalid configuration value; the message names the offending field."""


class ShapeError(CylfrontsError):
    """A field does not match the grid it is used with."""


class NumericError(CylfrontsError):
    """Non-finite values encountered; the message locates the node."""


class EllipticityError(CylfrontsError):
    """The height-equation state violates the ellipticity guard."""

    def __init__(self, margin, location):
        self.margin = margin
        self.location = location
        super().__init__(
            f"ellipticity margin {margin:.3e} <= 0 at node {location}"
        )


class HypothesisViolationError(CylfrontsError):
    """A structural hypothesis of the nonlinearity fails (e.g. g21 >= 0)."""


class SeedRangeError(CylfrontsError):
    """Seed amplitude outside the asymptotic validity range."""


class RootFindingError(CylfrontsError):
    """Scalar root finder failed to converge; message lists brackets."""


class EigensolverError(CylfrontsError):
    """Principal-eigenvalue iteration failed to converge."""


class TruncationError(CylfrontsError):
    """Far-field column of a state has not settled: truncation too short."""


class NewtonError(CylfrontsError):
    """Bordered Newton corrector failed (max iterations or guard trip)."""

    def __init__(self, message, guard=None):
        self.guard = guard
        super().__init__(message)


class DegenerateTangentError(CylfrontsError):
    """Secant predictor received two identical points."""
