"""Exception types shared across the package."""


class LumifitError(Exception):
    """Base class for package-specific failures."""


class DecodeError(LumifitError):
    """Raised when image bytes cannot be parsed as PNG or JPEG."""


class UnsupportedFormatError(LumifitError):
    """Raised for valid image files outside the supported 8-bit PNG/JPEG set."""


class OptimizationDivergedError(LumifitError):
    """Raised when the optimization loss becomes NaN or infinite.

    Carries the epoch index at which divergence was detected.
    """

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss at epoch {epoch}")


class StaleTapeError(LumifitError):
    """Raised when a backward pass receives a tape that no longer matches
    the parameters (parameters were updated, or the tape was already consumed)."""
