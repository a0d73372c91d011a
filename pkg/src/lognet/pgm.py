"""Minimal binary PGM (P5) reader/writer for latent-space bitmaps."""

from __future__ import annotations

import numpy as np

from .errors import ParseError, ValidationError


def write_pgm(matrix: np.ndarray, path: str) -> None:
    """Write a 2-D uint8 matrix as a raw (P5) graymap with maxval 255."""
    arr = np.asarray(matrix)
    if arr.ndim != 2 or arr.size == 0:
        raise ValidationError("PGM export requires a non-empty 2-D matrix")
    arr = arr.astype(np.uint8)
    height, width = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def read_pgm(path: str) -> np.ndarray:
    """Read a raw (P5) graymap back into a 2-D uint8 matrix."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, offset = _header_tokens(data, path)
    magic, width, height, maxval = tokens
    if magic != b"P5":
        raise ParseError(f"not a raw PGM (magic {magic!r})", path=path)
    try:
        width, height, maxval = int(width), int(height), int(maxval)
    except ValueError:
        raise ParseError("non-numeric PGM header fields", path=path) from None
    if maxval != 255:
        raise ParseError(f"unsupported maxval {maxval}; expected 255", path=path)
    raster = data[offset : offset + width * height]
    if len(raster) != width * height:
        raise ParseError(
            f"raster has {len(raster)} bytes; expected {width * height}", path=path
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width)


def _header_tokens(data: bytes, path: str) -> tuple[list[bytes], int]:
    """First four whitespace-separated header tokens, skipping '#' comments."""
    tokens: list[bytes] = []
    i = 0
    while len(tokens) < 4:
        if i >= len(data):
            raise ParseError("truncated PGM header", path=path)
        c = data[i : i + 1]
        if c == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            start = i
            while i < len(data) and not data[i : i + 1].isspace():
                i += 1
            tokens.append(data[start:i])
    # Exactly one whitespace byte separates the header from the raster.
    return tokens, i + 1
