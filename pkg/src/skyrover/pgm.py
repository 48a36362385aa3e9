"""Reader for PGM occupancy images (P2 ascii and P5 binary, maxval <= 255).

Dark pixels are obstacles: a value below the threshold maps to occupancy 1.
Image row 0 (the top of the picture) maps to the maximum-y map row, so the
returned map uses a y-up convention.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError, UnsupportedFormatError
from .voxelgrid import GroundMap2D

DEFAULT_OCCUPIED_THRESHOLD = 128


def _header_tokens(data: bytes, n_tokens: int):
    """Yield the first header tokens, skipping '#' comments; return end offset."""
    tokens = []
    pos = 0
    while len(tokens) < n_tokens:
        if pos >= len(data):
            raise ParseError("file ended inside the header", offset=len(data))
        c = data[pos]
        if c in b" \t\r\n":
            pos += 1
        elif c == ord("#"):
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        else:
            end = pos
            while end < len(data) and data[end] not in b" \t\r\n#":
                end += 1
            tokens.append((data[pos:end], pos))
            pos = end
    return tokens, pos


def parse_pgm(
    data: bytes,
    resolution: float = 1.0,
    occupied_threshold: int = DEFAULT_OCCUPIED_THRESHOLD,
) -> GroundMap2D:
    """Parse PGM bytes into a :class:`GroundMap2D`.

    ``resolution`` is attached to the result (PGM itself carries no scale).

    Raises:
        UnsupportedFormatError: magic number is neither P2 nor P5.
        ParseError: bad dimensions or maxval, or a short/overlong raster.
    """
    tokens, body_pos = _header_tokens(data, 4)
    magic = tokens[0][0]
    if magic not in (b"P2", b"P5"):
        raise UnsupportedFormatError(f"bad magic {magic!r}, expected P2 or P5", offset=tokens[0][1])
    try:
        width = int(tokens[1][0])
        height = int(tokens[2][0])
        maxval = int(tokens[3][0])
    except ValueError:
        raise ParseError("width, height, and maxval must be integers", offset=tokens[1][1]) from None
    if width < 1 or height < 1:
        raise ParseError(f"dimensions must be positive, got {width}x{height}", offset=tokens[1][1])
    if not 0 < maxval <= 255:
        raise ParseError(f"maxval {maxval} outside the supported range 1..255", offset=tokens[3][1])

    n_pixels = width * height
    if magic == b"P2":
        raw = data[body_pos:].split()
        if len(raw) != n_pixels:
            raise ParseError(f"raster holds {len(raw)} samples, expected {n_pixels}", offset=body_pos)
        try:
            pixels = np.array([int(t) for t in raw], dtype=np.int64)
        except ValueError:
            raise ParseError("non-integer sample in raster", offset=body_pos) from None
    else:
        # exactly one whitespace byte separates maxval from the raster
        body = data[body_pos + 1 :]
        if len(body) < n_pixels:
            raise ParseError(f"raster holds {len(body)} bytes, expected {n_pixels}", offset=len(data))
        if len(body) > n_pixels:
            raise ParseError(f"{len(body) - n_pixels} trailing bytes after the raster", offset=body_pos + 1 + n_pixels)
        pixels = np.frombuffer(body, dtype=np.uint8).astype(np.int64)

    if (pixels > maxval).any():
        raise ParseError(f"sample exceeds maxval {maxval}", offset=body_pos)

    image = pixels.reshape(height, width)  # row 0 = top of the picture
    occupancy = (image < occupied_threshold).astype(np.uint8)[::-1].reshape(-1)
    return GroundMap2D(width=width, height=height, resolution=resolution, occupancy=occupancy)
