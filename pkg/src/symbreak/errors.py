"""Exception types shared across the package."""


class SymbreakError(Exception):
    """Base class for all package-specific failures."""


class DimensionMismatch(SymbreakError):
    """Vector or matrix arguments do not conform to the algebra dimension."""


class NotInTorus(SymbreakError):
    """An algebra element required to lie in the maximal-torus subalgebra does not."""


class MetricDegenerate(SymbreakError):
    """The metric callback returned a matrix that is not positive definite."""


class LeftChart(SymbreakError):
    """A trajectory or geodesic exited the chart validity region."""


class GeoTolerance(SymbreakError):
    """Geodesic step-doubling error estimate exceeded the configured tolerance."""


class NonFinite(SymbreakError):
    """A stencil evaluation produced a non-finite value."""


class SymmetricPoint(SymbreakError):
    """The locked inertia tensor is singular here; the amended potential is undefined."""


class IsotropyNotInTorus(SymbreakError):
    """The isotropy algebra at the base configuration is not contained in the torus."""


class InZMu(SymbreakError):
    """The direction lies in the singular set: the reduced velocity system is degenerate."""


class SingularInertia(SymbreakError):
    """Direct inversion of the locked inertia tensor failed away from the blow-up regime."""


class TrivialIsotropyFailed(SymbreakError):
    """The slice direction does not have trivial isotropy."""


class NewtonDiverged(SymbreakError):
    """Newton iteration failed to converge within the iteration budget."""


class DeltaDegenerate(SymbreakError):
    """Seed conditions hold but the certificate matrix is degenerate; no branch certified."""


class StepFailed(SymbreakError):
    """Branch continuation failed to correct a step even at the minimum step size."""

    def __init__(self, tau, message=None):
        self.tau = tau
        super().__init__(message or f"continuation step failed at tau={tau!r}")


class NonAbelian(SymbreakError):
    """Stability classification is only available for abelian symmetry groups."""


class UnknownSystem(SymbreakError):
    """Requested catalog system name does not exist."""


class BadParams(SymbreakError):
    """Catalog system parameters are invalid."""


class ConfigError(SymbreakError):
    """A CLI configuration document failed to parse or validate."""
