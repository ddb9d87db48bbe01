"""Exception types shared across the package."""


class ExtractError(Exception):
    """Base class for every error this package raises on purpose."""


class MaskCodecError(ExtractError):
    """Run-length data is inconsistent with the declared mask size."""


class DimensionMismatchError(ExtractError):
    """Inputs that must share dimensions do not."""


class ManifestError(ExtractError):
    """Base class for segmentation-manifest loading failures."""


class ManifestParseError(ManifestError):
    """The manifest file is not well-formed JSON."""


class ManifestSchemaError(ManifestError):
    """The manifest JSON does not match the expected schema; the message names the JSON path."""


class ManifestValidationError(ManifestError):
    """The manifest parsed but violates a semantic invariant; the message names frame and instance."""


class SelectionError(ExtractError):
    """A selection spec referenced a person that is not present."""


class ImageFormatError(ExtractError):
    """An image file is in a format or bit depth this package does not handle."""


class FrameDirectoryError(ExtractError):
    """A frame directory does not follow the frame_%06d naming convention."""


class StreamTruncationError(ExtractError):
    """A raw frame stream ended mid-frame."""

    def __init__(self, message: str, frames_completed: int):
        super().__init__(message)
        self.frames_completed = frames_completed


class FrameProcessError(ExtractError):
    """Processing one output frame failed; carries the frame and source indices."""

    def __init__(self, message: str, frame_index: int, source_index: int | None = None):
        super().__init__(message)
        self.frame_index = frame_index
        self.source_index = source_index
