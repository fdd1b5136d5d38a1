"""Exception hierarchy shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for every error raised by this package."""


class FormatError(ToolkitError):
    """Unreadable, unsupported, truncated or otherwise malformed file."""


class DimensionMismatchError(ToolkitError, ValueError):
    pass


class SingleClassMaskError(ToolkitError, ValueError):
    """A mask needed both classes but contains only one."""


class EmptyForegroundError(ToolkitError, ValueError):
    pass


class DegenerateMapError(ToolkitError, ValueError):
    """Map has zero spread and cannot be z-scored."""


class NormalizationError(ToolkitError, ValueError):
    """Map is in the wrong normalization state for the requested operation."""


class ConsistencyError(ToolkitError, ValueError):
    """Ground-truth SDF sign partition disagrees with its mask."""


class EmptyBoundaryError(ToolkitError, ValueError):
    """HD95 is undefined because a mask has no boundary pixels."""


class DegenerateGeometryError(ToolkitError, ValueError):
    """Shape parameters produced a single-class mask."""


class DivergenceError(ToolkitError, ArithmeticError):
    """Descent produced a non-finite loss."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"loss became non-finite at step {step}")
