"""Grayscale image loading and saving.

8-bit binary PGM (P5) is the native format and needs nothing beyond numpy.
PNG is accepted behind a Pillow adapter so phone uploads work too; any
other input is rejected as undecodable.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

# Matcher inputs must be at least this large in both dimensions.
MIN_MATCH_SIZE = 64


class ImageFormatError(Exception):
    """Input bytes are not a decodable grayscale image."""


def _parse_pgm(data: bytes) -> np.ndarray:
    if not data.startswith(b"P5"):
        raise ImageFormatError("not a P5 PGM")
    # Header: magic, width, height, maxval; '#' comments allowed anywhere
    # in the header, a single whitespace byte terminates it.
    pos = 2
    fields = []
    while len(fields) < 3:
        match = re.match(rb"(?:\s|#[^\n]*\n)*(\d+)", data[pos:])
        if match is None:
            raise ImageFormatError("truncated PGM header")
        fields.append(int(match.group(1)))
        pos += match.end()
    width, height, maxval = fields
    if maxval <= 0 or maxval > 255:
        raise ImageFormatError(f"unsupported PGM maxval {maxval}")
    pos += 1  # single whitespace after maxval
    pixels = np.frombuffer(data, dtype=np.uint8, count=-1, offset=pos)
    if pixels.size < width * height:
        raise ImageFormatError("truncated PGM pixel data")
    return pixels[: width * height].reshape(height, width).copy()


def _decode_png(data: bytes) -> np.ndarray:
    import io

    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - Pillow is a declared dep
        raise ImageFormatError("PNG support requires Pillow") from exc
    try:
        with Image.open(io.BytesIO(data)) as img:
            return np.asarray(img.convert("L"), dtype=np.uint8)
    except Exception as exc:
        raise ImageFormatError(f"undecodable PNG: {exc}") from exc


def decode_gray(data: bytes) -> np.ndarray:
    """Decode image bytes to a 2-D uint8 array. PGM or PNG only."""
    if data.startswith(b"P5"):
        return _parse_pgm(data)
    if data.startswith(b"\x89PNG\r\n\x1a\n"):
        return _decode_png(data)
    raise ImageFormatError("unsupported image format (expect P5 PGM or PNG)")


def sniff_extension(data: bytes) -> str:
    if data.startswith(b"P5"):
        return ".pgm"
    if data.startswith(b"\x89PNG\r\n\x1a\n"):
        return ".png"
    raise ImageFormatError("unsupported image format (expect P5 PGM or PNG)")


def load_gray(path: Path | str) -> np.ndarray:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"unreadable image {path}: {exc}") from exc
    return decode_gray(data)


def write_pgm(path: Path | str, image: np.ndarray) -> None:
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError("expected a 2-D grayscale array")
    image = np.clip(np.rint(image), 0, 255).astype(np.uint8)
    header = f"P5\n{image.shape[1]} {image.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + image.tobytes())


def require_match_size(image: np.ndarray) -> np.ndarray:
    h, w = image.shape
    if h < MIN_MATCH_SIZE or w < MIN_MATCH_SIZE:
        raise ImageFormatError(
            f"image too small for matching: {w}x{h} (minimum {MIN_MATCH_SIZE})")
    return image


def resize_bilinear(image: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Resize to (height, width) with bilinear interpolation."""
    src = np.asarray(image, dtype=np.float64)
    out_h, out_w = shape
    in_h, in_w = src.shape
    if (in_h, in_w) == (out_h, out_w):
        return src.copy()
    # Align pixel centers of source and destination grids.
    ys = (np.arange(out_h) + 0.5) * in_h / out_h - 0.5
    xs = (np.arange(out_w) + 0.5) * in_w / out_w - 0.5
    ys = np.clip(ys, 0, in_h - 1)
    xs = np.clip(xs, 0, in_w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = src[np.ix_(y0, x0)] * (1 - wx) + src[np.ix_(y0, x1)] * wx
    bottom = src[np.ix_(y1, x0)] * (1 - wx) + src[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bottom * wy
