"""Image file formats: binary PGM (P5), 8-bit grayscale PNG and raw float32.

The raw float format stores linear backscatter: an ASCII header line
``RF32 <rows> <cols>\\n`` followed by ``rows * cols`` little-endian float32
values in row-major order.
"""
from __future__ import annotations

import os
import re

import numpy as np

from nnkop.imaging import as_image

__all__ = [
    "read_pgm",
    "write_pgm",
    "read_png",
    "write_png",
    "read_rf32",
    "write_rf32",
    "read_image",
    "write_image",
]

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*(\S+)")


def _pgm_header(data: bytes):
    fields = []
    pos = 0
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise ValueError("truncated PGM header")
        fields.append(m.group(1))
        pos = m.end()
    # exactly one whitespace byte separates the header from the raster
    return fields, pos + 1


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    fields, offset = _pgm_header(data)
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {fields[0]!r})")
    try:
        width, height, maxval = (int(v) for v in fields[1:])
    except ValueError:
        raise ValueError(f"{path}: malformed PGM header") from None
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 is supported, got {maxval}")
    raster = data[offset : offset + width * height]
    if len(raster) != width * height:
        raise ValueError(f"{path}: expected {width * height} pixels, found {len(raster)}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path, image) -> None:
    img = as_image(image)
    if img.ndim != 2:
        raise ValueError("PGM holds a single band")
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(img).tobytes())


def read_png(path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        if im.mode not in ("L", "P", "1"):
            raise ValueError(f"{path}: expected an 8-bit grayscale PNG, got mode {im.mode}")
        return np.array(im.convert("L"), dtype=np.uint8)


def write_png(path, image) -> None:
    from PIL import Image

    img = as_image(image)
    if img.ndim != 2:
        raise ValueError("grayscale PNG holds a single band")
    Image.fromarray(img, mode="L").save(path, format="PNG")


def read_rf32(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 3 or parts[0] != b"RF32":
            raise ValueError(f"{path}: not an RF32 file")
        rows, cols = int(parts[1]), int(parts[2])
        body = fh.read()
    if len(body) != 4 * rows * cols:
        raise ValueError(f"{path}: expected {4 * rows * cols} bytes of samples, found {len(body)}")
    return np.frombuffer(body, dtype="<f4").reshape(rows, cols).astype(np.float64)


def write_rf32(path, values) -> None:
    v = np.asarray(values)
    if v.ndim != 2:
        raise ValueError("RF32 stores a 2-d matrix")
    with open(path, "wb") as fh:
        fh.write(b"RF32 %d %d\n" % v.shape)
        fh.write(np.ascontiguousarray(v, dtype="<f4").tobytes())


def read_image(path) -> np.ndarray:
    """Read a PGM or PNG, detected from the file's magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head.startswith(_PNG_MAGIC):
        return read_png(path)
    if head[:2] == b"P5":
        return read_pgm(path)
    raise ValueError(f"{path}: unsupported image format (expected binary PGM or PNG)")


def write_image(path, image) -> None:
    """Write PNG for a ``.png`` suffix, PGM otherwise."""
    if os.fspath(path).lower().endswith(".png"):
        write_png(path, image)
    else:
        write_pgm(path, image)
