"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Input violates a geometric precondition (off-manifold, non-tangent, ...)."""


class DomainError(GeometryError):
    """A parameter left the domain on which a patch or profile is defined."""


class IntegrationError(RuntimeError):
    """The ODE integrator produced a non-finite state."""

    def __init__(self, message, s=None):
        super().__init__(message)
        self.s = s


class CertificationError(RuntimeError):
    """A numerical certificate exceeded its tolerance.

    ``stage`` names the step that failed so callers (and the CLI) can
    report which certificate broke.
    """

    def __init__(self, message, stage=None, value=None):
        super().__init__(message)
        self.stage = stage
        self.value = value
