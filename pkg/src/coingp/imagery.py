"""8-bit grayscale images: PGM codec, pixel access, amplified difference images.

Images are stored as ``(height, width)`` uint8 arrays, row-major with the top
row first. Coordinates are 0-based ``(row, col)`` everywhere in this package.
The only supported file format is PGM with maxval 255: binary "P5" is written,
both "P5" and ASCII "P2" are accepted on input.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class PgmError(ValueError):
    """Raised when PGM bytes cannot be decoded."""


class PixelCoord(NamedTuple):
    """0-based (row, col) position inside an image."""

    row: int
    col: int


@dataclass(eq=False)
class GrayImage:
    """An M x N grid of intensities in [0, 255].

    ``pixels`` is a ``(height, width)`` uint8 array. Treat instances as
    immutable; every operation in this package returns new images instead of
    writing into existing ones.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.size == 0:
            raise ValueError(f"pixels must be a non-empty 2-D array, got shape {px.shape}")
        if px.dtype != np.uint8:
            if not np.issubdtype(px.dtype, np.integer):
                raise ValueError(f"intensities must be integers, got dtype {px.dtype}")
            if int(px.min()) < 0 or int(px.max()) > 255:
                raise ValueError("intensities must lie in [0, 255]")
            px = px.astype(np.uint8)
        self.pixels = px

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def get(self, row: int, col: int) -> int:
        return int(self.pixels[row, col])

    def in_bounds(self, coord: PixelCoord) -> bool:
        return 0 <= coord.row < self.height and 0 <= coord.col < self.width

    def on_border(self, coord: PixelCoord) -> bool:
        return (
            coord.row in (0, self.height - 1)
            or coord.col in (0, self.width - 1)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __repr__(self) -> str:
        return f"GrayImage({self.width}x{self.height})"


def _scan_header_tokens(data: bytes, count: int, start: int) -> tuple[list[bytes], int]:
    """Read whitespace-separated header tokens, skipping '#' comments.

    Returns the tokens and the offset one past the final token.
    """
    tokens: list[bytes] = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        if i >= n:
            raise PgmError("malformed header: ran out of data while reading header fields")
        tok = bytearray()
        while i < n and not data[i : i + 1].isspace():
            tok += data[i : i + 1]
            i += 1
        tokens.append(bytes(tok))
    return tokens, i


def _header_int(token: bytes, what: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise PgmError(f"malformed header: {what} is not an integer: {token!r}") from None
    return value


def load_pgm(data: bytes) -> GrayImage:
    """Decode PGM bytes (binary "P5" or ASCII "P2", maxval 255 only)."""
    if not isinstance(data, (bytes, bytearray)):
        raise TypeError("load_pgm expects bytes")
    data = bytes(data)
    magic_tokens, pos = _scan_header_tokens(data, 1, 0)
    magic = magic_tokens[0]
    if magic not in (b"P5", b"P2"):
        raise PgmError(f"malformed header: unsupported magic {magic!r} (expected P5 or P2)")
    fields, pos = _scan_header_tokens(data, 3, pos)
    width = _header_int(fields[0], "width")
    height = _header_int(fields[1], "height")
    maxval = _header_int(fields[2], "maxval")
    if width <= 0 or height <= 0:
        raise PgmError(f"malformed header: non-positive dimensions {width}x{height}")
    if maxval != 255:
        raise PgmError(f"unsupported maxval {maxval} (only 255 is handled)")

    n_pixels = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates the maxval from the raster
        if pos >= len(data) or not data[pos : pos + 1].isspace():
            raise PgmError("malformed header: missing separator before binary raster")
        raster = data[pos + 1 : pos + 1 + n_pixels]
        if len(raster) < n_pixels:
            raise PgmError(
                f"truncated pixel data: expected {n_pixels} bytes, found {len(raster)}"
            )
        px = np.frombuffer(raster, dtype=np.uint8, count=n_pixels)
    else:
        text = data[pos:]
        parts = text.split()
        if len(parts) < n_pixels:
            raise PgmError(
                f"truncated pixel data: expected {n_pixels} values, found {len(parts)}"
            )
        try:
            values = [int(p) for p in parts[:n_pixels]]
        except ValueError:
            raise PgmError("malformed pixel data: non-integer ASCII sample") from None
        if any(v < 0 or v > 255 for v in values):
            raise PgmError("malformed pixel data: ASCII sample outside [0, 255]")
        px = np.asarray(values, dtype=np.uint8)
    return GrayImage(px.reshape(height, width).copy())


def save_pgm(img: GrayImage) -> bytes:
    """Encode an image as binary PGM ("P5"). Round-trips bit-exactly."""
    header = b"P5\n%d %d\n255\n" % (img.width, img.height)
    return header + np.ascontiguousarray(img.pixels).tobytes()


def read_pgm(path: str | os.PathLike) -> GrayImage:
    with open(path, "rb") as fh:
        return load_pgm(fh.read())


def write_pgm(path: str | os.PathLike, img: GrayImage) -> None:
    with open(path, "wb") as fh:
        fh.write(save_pgm(img))


def diff_image(original: GrayImage, reconstructed: GrayImage, gain: int = 10) -> GrayImage:
    """Per-pixel ``min(255, gain * |original - reconstructed|)``.

    Amplifying the absolute difference makes small reconstruction errors
    visible; the result saturates at 255 instead of wrapping.
    """
    if gain < 1:
        raise ValueError(f"gain must be >= 1, got {gain}")
    if (original.height, original.width) != (reconstructed.height, reconstructed.width):
        raise ValueError(
            "dimension mismatch: "
            f"{original.width}x{original.height} vs {reconstructed.width}x{reconstructed.height}"
        )
    a = original.pixels.astype(np.int32)
    b = reconstructed.pixels.astype(np.int32)
    amplified = np.abs(a - b) * int(gain)
    return GrayImage(np.minimum(amplified, 255).astype(np.uint8))
