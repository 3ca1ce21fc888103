"""Exception hierarchy shared by all meshcodec modules."""


class MeshcodecError(Exception):
    """Base class for all errors raised by this package."""


class DimMismatchError(MeshcodecError):
    """Operands live in state spaces of different dimension."""


class ZeroVectorError(MeshcodecError):
    """A vector with no component above the zero threshold cannot be normalized."""


class NotNormalizedError(MeshcodecError):
    """Operation requires a unit-norm state but received one that is not."""


class IndexOutOfRangeError(MeshcodecError):
    """A gate's mode pair does not fit inside the state space."""


class OddModesForCrossError(MeshcodecError):
    """Cross topology layers are only defined for an even number of modes."""


class FullyRejectedError(MeshcodecError):
    """All probability mass was projected out; renormalization is undefined."""


class ShapeMismatchError(MeshcodecError):
    """Pixel grid or vector shapes are inconsistent."""


class ZeroImageError(MeshcodecError):
    """An all-zero image carries no amplitude information to encode."""


class InvalidParamsError(MeshcodecError):
    """Generator or configuration parameters are out of their valid range."""


class NonFiniteLossError(MeshcodecError):
    """Training loss became NaN or infinite, typically a divergent learning rate."""


class ExportRangeError(MeshcodecError):
    """Parameters cannot be folded into physical ranges without changing the network matrix."""
