"""Exception hierarchy shared by all vstates modules."""


class VStateError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(VStateError):
    """Incompatible sizes or parameters (grid/fold mismatch, bad ranges)."""


class GeometryError(VStateError):
    """Base class for geometric inadmissibility of a contour configuration."""


class DomainViolationError(GeometryError):
    """A boundary node or evaluation target lies on or outside the unit circle."""


class DegenerateContourError(GeometryError):
    """Sampled radius is non-positive, or two boundary nodes collide."""


class BoundaryOrderingError(GeometryError):
    """Inner/outer boundaries cross or lose their radial ordering."""


class NoBifurcationError(VStateError):
    """No bifurcation point exists for the requested mode and radii."""


class NoRealEigenvalueError(VStateError):
    """The mode's discriminant is negative: no real eigenvalue pair."""


class SingularSystemError(VStateError):
    """Newton's linear system is numerically singular (near a bifurcation)."""


class SeedError(VStateError):
    """Branch seeding failed to produce a nontrivial first point."""


class InstabilityError(VStateError):
    """Time integration pushed a node out of the unit disc."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time
