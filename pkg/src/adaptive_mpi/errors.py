"""Exception types shared across the pipeline."""


class InvalidArgumentError(ValueError):
    """A caller passed an argument outside an operation's contract."""


class DegenerateInputError(ValueError):
    """Input is structurally valid but carries no usable signal (e.g. constant disparity)."""


class ContainerError(ValueError):
    """An MPI container on disk violates the format invariants."""


class UnsupportedVersionError(ContainerError):
    """Container was written by an incompatible (newer major) format version."""


class CameraParseError(ValueError):
    """A camera trajectory line could not be parsed."""
