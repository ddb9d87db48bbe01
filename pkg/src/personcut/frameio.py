"""Still-image and frame-sequence I/O.

Two lossless still formats are supported: 8-bit RGB PNG (RGBA is accepted on
read, alpha discarded with a warning) and binary PPM (P6). Sequences travel
either as frame directories following the frame_%06d.png convention
(zero-based, contiguous) or as headerless raw RGB24 streams (row-major,
top-to-bottom, 3 bytes per pixel, frames concatenated) so standard
transcoding tools can sit on either side of the pipeline.

Frame sources present both forms behind one interface. Sources backed by
files are safe to read from concurrent workers; a raw stream is strictly
sequential and must be consumed in order by a single reader.
"""

from __future__ import annotations

import logging
import re
from fractions import Fraction
from pathlib import Path
from typing import BinaryIO, Iterator, Protocol, Sequence, runtime_checkable

import numpy as np
from PIL import Image

from .core import RasterImage
from .errors import (
    DimensionMismatchError,
    FrameDirectoryError,
    ImageFormatError,
    StreamTruncationError,
)

__all__ = [
    "INCOMPLETE_SENTINEL",
    "read_image",
    "write_image",
    "enumerate_frames",
    "read_raw_frame",
    "iter_raw_frames",
    "write_raw_frame",
    "FrameSource",
    "StillImageSource",
    "FrameDirectorySource",
    "MemorySource",
    "RawFileSource",
    "RawStreamSource",
    "FrameSink",
    "DirectorySink",
    "SingleImageSink",
    "RawStreamSink",
]

logger = logging.getLogger(__name__)

# Name of the marker file dropped into an output directory when a run aborts
# partway, so downstream tooling never mistakes a partial render for a result.
INCOMPLETE_SENTINEL = "INCOMPLETE"

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_FRAME_NAME = re.compile(r"frame_(\d{6,})\.(png|ppm)\Z")


def _read_ppm(path: Path) -> RasterImage:
    data = path.read_bytes()
    if data[:2] != b"P6":
        raise ImageFormatError(f"{path}: not a binary PPM (P6) file")

    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed, then a single whitespace byte before pixels.
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            eol = data.find(b"\n", pos)
            pos = len(data) if eol < 0 else eol + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise ImageFormatError(f"{path}: malformed PPM header near byte {start}")
        fields.append(int(token))
    pos += 1  # the single whitespace byte terminating the header

    width, height, maxval = fields
    if maxval != 255:
        raise ImageFormatError(f"{path}: PPM maxval {maxval} unsupported, only 8-bit (255)")
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: invalid PPM dimensions {width}x{height}")
    need = width * height * 3
    pixels = data[pos : pos + need]
    if len(pixels) < need:
        raise ImageFormatError(
            f"{path}: PPM pixel data truncated, have {len(pixels)} of {need} bytes"
        )
    arr = np.frombuffer(pixels, dtype=np.uint8).reshape((height, width, 3))
    return RasterImage.from_array(arr)


def _read_png(path: Path) -> RasterImage:
    try:
        with Image.open(path) as im:
            mode = im.mode
            if mode == "RGBA":
                logger.warning("%s: discarding alpha channel", path)
                im = im.convert("RGB")
            elif mode != "RGB":
                raise ImageFormatError(
                    f"{path}: unsupported PNG mode {mode!r}, only 8-bit RGB or RGBA"
                )
            arr = np.asarray(im, dtype=np.uint8)
    except ImageFormatError:
        raise
    except (OSError, SyntaxError) as exc:
        raise ImageFormatError(f"{path}: broken PNG data ({exc})") from exc
    return RasterImage.from_array(arr)


def read_image(path: str | Path) -> RasterImage:
    """Decode a PNG or binary PPM file to an 8-bit RGB image.

    The format is detected from the file's magic bytes, not its extension.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(8)
    if magic.startswith(_PNG_MAGIC):
        return _read_png(path)
    if magic[:2] == b"P6":
        return _read_ppm(path)
    raise ImageFormatError(
        f"{path}: unrecognized image format (magic {magic[:4]!r}), need PNG or binary PPM"
    )


def write_image(img: RasterImage, path: str | Path) -> None:
    """Write an image as PNG or binary PPM, chosen by file extension."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".png":
        Image.fromarray(img.pixels, mode="RGB").save(path, format="PNG")
    elif suffix == ".ppm":
        header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
        path.write_bytes(header + img.tobytes())
    else:
        raise ImageFormatError(
            f"{path}: unsupported output extension {suffix!r}, use .png or .ppm"
        )


def enumerate_frames(directory: str | Path) -> list[Path]:
    """List a frame directory's files in index order.

    Files must be named frame_%06d.png (or .ppm, but not a mix) with indices
    contiguous from 0. The result is independent of filesystem listing order.
    """
    directory = Path(directory)
    by_index: dict[int, Path] = {}
    extensions: set[str] = set()
    for entry in directory.iterdir():
        match = _FRAME_NAME.match(entry.name)
        if match is None:
            continue
        index = int(match.group(1))
        extensions.add(match.group(2))
        if index in by_index:
            raise FrameDirectoryError(
                f"{directory}: duplicate frame index {index} "
                f"({by_index[index].name} and {entry.name})"
            )
        by_index[index] = entry
    if not by_index:
        raise FrameDirectoryError(f"{directory}: no frames found")
    if len(extensions) > 1:
        raise FrameDirectoryError(
            f"{directory}: mixed frame extensions {sorted(extensions)}"
        )
    for expected, index in enumerate(sorted(by_index)):
        if index != expected:
            raise FrameDirectoryError(f"{directory}: missing frame index {expected}")
    return [by_index[i] for i in range(len(by_index))]


def _read_exact(stream: BinaryIO, count: int) -> bytes:
    chunks: list[bytes] = []
    have = 0
    while have < count:
        chunk = stream.read(count - have)
        if not chunk:
            break
        chunks.append(chunk)
        have += len(chunk)
    return b"".join(chunks)


def read_raw_frame(
    stream: BinaryIO, width: int, height: int, *, frames_completed: int = 0
) -> RasterImage | None:
    """Read one width*height*3-byte RGB frame; None at a clean end of stream."""
    need = width * height * 3
    data = _read_exact(stream, need)
    if not data:
        return None
    if len(data) < need:
        raise StreamTruncationError(
            f"raw stream truncated: got {len(data)} of {need} bytes "
            f"after {frames_completed} complete frame(s)",
            frames_completed=frames_completed,
        )
    arr = np.frombuffer(data, dtype=np.uint8).reshape((height, width, 3))
    return RasterImage.from_array(arr)


def iter_raw_frames(stream: BinaryIO, width: int, height: int) -> Iterator[RasterImage]:
    """Yield frames from a raw RGB24 stream until a clean end of stream."""
    count = 0
    while True:
        frame = read_raw_frame(stream, width, height, frames_completed=count)
        if frame is None:
            return
        count += 1
        yield frame


def write_raw_frame(stream: BinaryIO, img: RasterImage) -> None:
    stream.write(img.tobytes())


@runtime_checkable
class FrameSource(Protocol):
    """Uniform view of a frame sequence (a still image counts as one frame).

    random_access sources tolerate get_frame calls in any order from any
    thread; sequential sources require strictly ascending indices.
    """

    width: int
    height: int
    frame_count: int
    frame_rate: Fraction | None
    random_access: bool

    def get_frame(self, index: int) -> RasterImage: ...


def _check_index(index: int, frame_count: int) -> None:
    if not 0 <= index < frame_count:
        raise IndexError(f"frame index {index} out of range 0..{frame_count - 1}")


class StillImageSource:
    """A single decoded image presented as a one-frame sequence."""

    random_access = True

    def __init__(self, path: str | Path, frame_rate: Fraction | None = None):
        self._image = read_image(path)
        self.width = self._image.width
        self.height = self._image.height
        self.frame_count = 1
        self.frame_rate = frame_rate

    def get_frame(self, index: int) -> RasterImage:
        _check_index(index, self.frame_count)
        return self._image


class FrameDirectorySource:
    """Frames stored as individual PNG/PPM files under one directory."""

    random_access = True

    def __init__(self, directory: str | Path, frame_rate: Fraction | None = None):
        self._paths = enumerate_frames(directory)
        first = read_image(self._paths[0])
        self.width = first.width
        self.height = first.height
        self.frame_count = len(self._paths)
        self.frame_rate = frame_rate

    def get_frame(self, index: int) -> RasterImage:
        _check_index(index, self.frame_count)
        img = read_image(self._paths[index])
        if (img.width, img.height) != (self.width, self.height):
            raise DimensionMismatchError(
                f"{self._paths[index]}: frame is {img.width}x{img.height}, "
                f"expected {self.width}x{self.height}"
            )
        return img


class MemorySource:
    """In-memory frame list, mainly for tests and library embedding."""

    random_access = True

    def __init__(
        self,
        frames: Sequence[RasterImage],
        frame_rate: Fraction | None = None,
        *,
        width: int | None = None,
        height: int | None = None,
    ):
        self._frames = tuple(frames)
        if self._frames:
            width = self._frames[0].width
            height = self._frames[0].height
            for i, frame in enumerate(self._frames):
                if (frame.width, frame.height) != (width, height):
                    raise DimensionMismatchError(
                        f"frame {i} is {frame.width}x{frame.height}, "
                        f"expected {width}x{height}"
                    )
        elif width is None or height is None:
            raise ValueError("an empty MemorySource needs explicit width and height")
        self.width = width
        self.height = height
        self.frame_count = len(self._frames)
        self.frame_rate = frame_rate

    def get_frame(self, index: int) -> RasterImage:
        _check_index(index, self.frame_count)
        return self._frames[index]


class RawFileSource:
    """A raw RGB24 stream stored in a regular file, so frames are seekable."""

    random_access = True

    def __init__(
        self,
        path: str | Path,
        width: int,
        height: int,
        frame_rate: Fraction | None = None,
    ):
        self._path = Path(path)
        self._frame_bytes = width * height * 3
        size = self._path.stat().st_size
        whole, leftover = divmod(size, self._frame_bytes)
        if leftover:
            raise StreamTruncationError(
                f"{self._path}: {size} bytes is not a multiple of the "
                f"{self._frame_bytes}-byte frame size "
                f"({whole} complete frame(s) for {width}x{height})",
                frames_completed=whole,
            )
        self.width = width
        self.height = height
        self.frame_count = whole
        self.frame_rate = frame_rate

    def get_frame(self, index: int) -> RasterImage:
        _check_index(index, self.frame_count)
        with open(self._path, "rb") as fh:
            fh.seek(index * self._frame_bytes)
            frame = read_raw_frame(fh, self.width, self.height, frames_completed=index)
        if frame is None:
            raise StreamTruncationError(
                f"{self._path}: frame {index} vanished mid-read", frames_completed=index
            )
        return frame


class RawStreamSource:
    """A live raw RGB24 stream; frames must be consumed in ascending order."""

    random_access = False

    def __init__(
        self,
        stream: BinaryIO,
        width: int,
        height: int,
        frame_count: int,
        frame_rate: Fraction | None = None,
    ):
        self._stream = stream
        self._next = 0
        self.width = width
        self.height = height
        self.frame_count = frame_count
        self.frame_rate = frame_rate

    def get_frame(self, index: int) -> RasterImage:
        _check_index(index, self.frame_count)
        if index != self._next:
            raise RuntimeError(
                f"raw stream frames must be read in order: asked for {index}, "
                f"next is {self._next}"
            )
        frame = read_raw_frame(self._stream, self.width, self.height, frames_completed=index)
        if frame is None:
            raise StreamTruncationError(
                f"raw stream ended after {index} of {self.frame_count} frame(s)",
                frames_completed=index,
            )
        self._next += 1
        return frame


@runtime_checkable
class FrameSink(Protocol):
    """Destination for ordered output frames."""

    def write_frame(self, index: int, img: RasterImage) -> None: ...

    def close(self) -> None: ...


class DirectorySink:
    """Writes frames as frame_%06d files into a directory it creates."""

    def __init__(self, directory: str | Path, image_format: str = "png"):
        if image_format not in ("png", "ppm"):
            raise ValueError(f"unsupported frame format {image_format!r}")
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._suffix = "." + image_format
        # A sentinel left by an earlier aborted run is stale once we start over.
        sentinel = self.directory / INCOMPLETE_SENTINEL
        if sentinel.exists():
            sentinel.unlink()

    def write_frame(self, index: int, img: RasterImage) -> None:
        write_image(img, self.directory / f"frame_{index:06d}{self._suffix}")

    def mark_incomplete(self, message: str) -> None:
        (self.directory / INCOMPLETE_SENTINEL).write_text(message + "\n")

    def close(self) -> None:
        pass


class SingleImageSink:
    """Writes exactly one frame to one image file."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._written = False

    def write_frame(self, index: int, img: RasterImage) -> None:
        if self._written or index != 0:
            raise ValueError(
                f"single-image output holds exactly one frame, got frame {index}"
            )
        write_image(img, self.path)
        self._written = True

    def close(self) -> None:
        pass


class RawStreamSink:
    """Appends frames to a raw RGB24 stream in index order."""

    def __init__(self, stream: BinaryIO, *, close_stream: bool = False):
        self._stream = stream
        self._close_stream = close_stream
        self._next = 0

    def write_frame(self, index: int, img: RasterImage) -> None:
        if index != self._next:
            raise ValueError(
                f"raw stream frames must be written in order: got {index}, "
                f"expected {self._next}"
            )
        write_raw_frame(self._stream, img)
        self._next += 1

    def close(self) -> None:
        self._stream.flush()
        if self._close_stream:
            self._stream.close()
