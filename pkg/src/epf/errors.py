"""Exception types shared across the toolkit."""


class EpfError(Exception):
    """Base class for all toolkit errors."""


class ImageError(EpfError):
    """Image decoding, encoding, or validation failed."""


class DimensionMismatchError(EpfError):
    """Two images that must share dimensions do not."""


class RegistryError(EpfError):
    """Filter registry configuration is invalid (unknown or duplicate id, bad file)."""


class FilterError(EpfError):
    """A filter application failed."""


class ExternalFilterError(FilterError):
    """An external filter process failed; carries captured diagnostics."""

    def __init__(self, message, *, exit_code=None, stderr=None):
        super().__init__(message)
        self.exit_code = exit_code
        self.stderr = stderr


class SolverError(FilterError):
    """An iterative solve did not reach its residual tolerance within the cap."""

    def __init__(self, message, *, residual):
        super().__init__(message)
        self.residual = residual


class UndefinedContrastError(EpfError):
    """Contrast ratio is undefined because the input image has zero global contrast."""


class FitDegenerateError(EpfError):
    """Polynomial fit is rank-deficient; the raw points are still available."""

    def __init__(self, message, *, points):
        super().__init__(message)
        self.points = points
