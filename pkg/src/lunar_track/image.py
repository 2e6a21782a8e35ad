"""Grayscale images as 2-D float64 arrays, with 8-bit PGM/PNG file I/O.

Arrays are row-major with the origin at the top left: pixel (x, y) lives at
``img[y, x]``. Intensities stay real valued in memory so signed filter
outputs keep full precision; clamping and rounding to 8 bits happens only
when writing.
"""

from __future__ import annotations

import PIL.Image
import numpy as np

__all__ = [
    "ImageFormatError",
    "load_image",
    "save_image",
    "extract_subimage",
    "sample_bilinear",
]

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_WHITESPACE = b" \t\n\r\x0b\x0c"


class ImageFormatError(ValueError):
    """File is not something this library decodes (8-bit grayscale PGM/PNG)."""


def as_image(img) -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting anything that is not one."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D image array, got shape {arr.shape}")
    return arr


class _PgmScanner:
    """Token reader for PNM headers: whitespace-separated, # comments to EOL."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def next_token(self) -> bytes:
        data, pos = self.data, self.pos
        while pos < len(data):
            byte = data[pos : pos + 1]
            if byte == b"#":
                nl = data.find(b"\n", pos)
                pos = len(data) if nl < 0 else nl + 1
            elif byte in _WHITESPACE:
                pos += 1
            else:
                start = pos
                while pos < len(data) and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
                    pos += 1
                self.pos = pos
                return data[start:pos]
        raise ImageFormatError("truncated PGM header")

    def next_int(self, what: str) -> int:
        tok = self.next_token()
        try:
            return int(tok)
        except ValueError:
            raise ImageFormatError(f"bad PGM {what}: {tok!r}") from None


def _read_pgm(data: bytes) -> np.ndarray:
    scanner = _PgmScanner(data)
    magic = scanner.next_token()
    width = scanner.next_int("width")
    height = scanner.next_int("height")
    maxval = scanner.next_int("maxval")
    if width < 1 or height < 1:
        raise ImageFormatError(f"bad PGM dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise ImageFormatError(f"only 8-bit PGM supported, got maxval {maxval}")
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates the maxval from the payload
        payload = data[scanner.pos + 1 :]
        if len(payload) < count:
            raise ImageFormatError(f"truncated P5 payload: expected {count} bytes, got {len(payload)}")
        if payload[count:].strip(_WHITESPACE):
            raise ImageFormatError("P5 payload longer than the declared dimensions")
        pixels = np.frombuffer(payload[:count], dtype=np.uint8)
    else:  # P2
        rest = scanner.data[scanner.pos :]
        tokens = rest.split()
        if len(tokens) != count:
            raise ImageFormatError(f"P2 payload holds {len(tokens)} values, expected {count}")
        try:
            pixels = np.array([int(t) for t in tokens], dtype=np.int64)
        except ValueError:
            raise ImageFormatError("non-numeric P2 sample") from None

    if pixels.min(initial=0) < 0 or pixels.max(initial=0) > maxval:
        raise ImageFormatError(f"sample outside [0, {maxval}]")
    return pixels.astype(np.float64).reshape(height, width)


def _read_png(path) -> np.ndarray:
    with PIL.Image.open(path) as im:
        if im.mode != "L":
            raise ImageFormatError(
                f"only 8-bit grayscale PNG is supported, got mode {im.mode!r} (no conversion is attempted)"
            )
        return np.asarray(im, dtype=np.float64)


def load_image(path) -> np.ndarray:
    """Read an 8-bit grayscale PGM (P2/P5) or PNG file.

    Color and 16-bit inputs are rejected, never converted. Returned
    intensities lie in [0, 255].
    """
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head.startswith(_PNG_MAGIC):
        return _read_png(path)
    if head[:2] in (b"P2", b"P5") and (len(head) < 3 or head[2:3] in _WHITESPACE or head[2:3] == b"#"):
        with open(path, "rb") as fh:
            return _read_pgm(fh.read())
    raise ImageFormatError(f"unsupported image format in {path}")


def save_image(img, path) -> None:
    """Write a binary P5 PGM, clamping to [0, 255] and rounding half-up.

    Layout is exactly ``P5\\n<w> <h>\\n255\\n`` followed by the pixel bytes,
    so identical arrays always produce identical files.
    """
    arr = as_image(img)
    quantized = np.floor(np.clip(arr, 0.0, 255.0) + 0.5).astype(np.uint8)
    height, width = arr.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(quantized.tobytes())


def _int_coord(value, name: str) -> int:
    f = float(value)
    if not f.is_integer():
        raise ValueError(f"{name} must be an integer pixel coordinate, got {value}")
    return int(f)


def extract_subimage(img, anchor, w: int, h: int) -> np.ndarray:
    """Copy the w x h window whose top-left pixel is ``anchor`` = (x, y)."""
    arr = as_image(img)
    x = _int_coord(anchor[0], "anchor x")
    y = _int_coord(anchor[1], "anchor y")
    if w < 1 or h < 1:
        raise ValueError(f"window dimensions must be positive, got {w}x{h}")
    if x < 0 or y < 0 or x + w > arr.shape[1] or y + h > arr.shape[0]:
        raise ValueError(
            f"window {w}x{h} at ({x}, {y}) exceeds image bounds {arr.shape[1]}x{arr.shape[0]}"
        )
    return arr[y : y + h, x : x + w].copy()


def sample_bilinear(img, x, y):
    """Bilinearly interpolate ``img`` at positions (x, y), scalar or array.

    Positions must satisfy 0 <= x <= width-1 and 0 <= y <= height-1.
    Integer positions reproduce the stored pixel values exactly, including
    on the bottom and right edges.
    """
    arr = as_image(img)
    height, width = arr.shape
    if height < 2 or width < 2:
        raise ValueError("bilinear sampling needs an image of at least 2x2 pixels")
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if np.any((xs < 0) | (xs > width - 1) | (ys < 0) | (ys > height - 1)):
        raise ValueError("sample position outside the image")
    x0 = np.minimum(np.floor(xs).astype(np.intp), width - 2)
    y0 = np.minimum(np.floor(ys).astype(np.intp), height - 2)
    fx = xs - x0
    fy = ys - y0
    top = (1.0 - fx) * arr[y0, x0] + fx * arr[y0, x0 + 1]
    bottom = (1.0 - fx) * arr[y0 + 1, x0] + fx * arr[y0 + 1, x0 + 1]
    return (1.0 - fy) * top + fy * bottom
