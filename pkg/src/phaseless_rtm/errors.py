"""Exception hierarchy shared by all modules."""


class RTMError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RTMError, ValueError):
    """Argument outside the domain of a special function."""


class SingularityError(RTMError, ValueError):
    """Kernel evaluated at (or numerically at) its singular point."""


class GeometryError(RTMError, ValueError):
    """Invalid obstacle or survey geometry (overlap, containment, degeneracy)."""


class NearBoundaryError(RTMError, ValueError):
    """Field evaluation requested too close to an obstacle boundary."""


class SingularSystemError(RTMError, ArithmeticError):
    """The dense boundary-integral system is numerically singular."""


class MissingPhaseError(RTMError, ValueError):
    """A full-phase operation was given a magnitude-only dataset."""


class GridMismatchError(RTMError, ValueError):
    """Images defined on different grids were combined."""


class DatasetFormatError(RTMError, ValueError):
    """Malformed or unsupported dataset/image file."""


class ConfigError(RTMError, ValueError):
    """Invalid experiment configuration."""


class DegenerateImageError(RTMError, ValueError):
    """An image metric is undefined (for instance a constant image)."""
