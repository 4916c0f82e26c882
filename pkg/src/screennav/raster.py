"""Seeded-deterministic rasterization: glyph programs, bitmap text, PNG.

Everything here is a pure function of its inputs. PNG encoding is done by
hand (single IDAT, filter 0, fixed zlib level) so the emitted bytes never
depend on an image library version.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from .fonts import FALLBACK_GLYPH, FONT_5X7, GLYPH_HEIGHT, GLYPH_WIDTH, text_width
from .icons import GlyphOp, Shape

WHITE = (255, 255, 255, 255)

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_ZLIB_LEVEL = 1  # fixed for determinism; speed matters more than size here


@dataclass
class ImageBuffer:
    """Row-major RGBA raster."""

    width: int
    height: int
    pixels: np.ndarray = field(repr=False)

    def __init__(self, width: int, height: int, pixels: np.ndarray | None = None):
        self.width = width
        self.height = height
        if pixels is None:
            # White RGBA is all-255 bytes, so one memset suffices.
            pixels = np.empty((height, width, 4), dtype=np.uint8)
            pixels.fill(255)
        if pixels.shape != (height, width, 4):
            raise ValueError(f"pixel array shape {pixels.shape} mismatches size")
        self.pixels = pixels

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()

    def pixel(self, x: int, y: int) -> Tuple[int, int, int, int]:
        return tuple(int(v) for v in self.pixels[y, x])

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ImageBuffer)
            and self.width == other.width
            and self.height == other.height
            and np.array_equal(self.pixels, other.pixels)
        )


def _paint(buf: ImageBuffer, mask: np.ndarray, x0: int, y0: int, color) -> None:
    region = buf.pixels[y0:y0 + mask.shape[0], x0:x0 + mask.shape[1]]
    rgba = (*color, 255)
    region[mask] = rgba


_GRID_CACHE: dict = {}


def _grid(box: int) -> Tuple[np.ndarray, np.ndarray]:
    if box not in _GRID_CACHE:
        _GRID_CACHE[box] = tuple(np.mgrid[0:box, 0:box].astype(np.float64))
    return _GRID_CACHE[box]


def _shape_mask(op: GlyphOp, box: int) -> np.ndarray:
    """Boolean mask for one primitive inside a box x box glyph area."""
    yy, xx = _grid(box)
    cx, cy = op.cx * box, op.cy * box
    half = max(op.size * box / 2.0, 1.0)
    if op.shape is Shape.DISC:
        mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= half**2
    elif op.shape is Shape.RING:
        r2 = (xx - cx) ** 2 + (yy - cy) ** 2
        inner = half * min(max(op.param, 0.25), 0.8)
        mask = (r2 <= half**2) & (r2 >= inner**2)
    elif op.shape is Shape.BAR:
        # param is the height/width aspect; param > 1 gives a tall bar.
        aspect = min(max(op.param, 0.15), 4.0)
        mask = (np.abs(xx - cx) <= half) & (np.abs(yy - cy) <= half * aspect)
    elif op.shape is Shape.TRIANGLE:
        # param selects the apex direction: 0 up, 1 down, 2 right, 3 left.
        ux = (xx - cx) / half
        uy = (yy - cy) / half
        orient = int(op.param) % 4
        if orient == 0:
            u, v = ux, uy
        elif orient == 1:
            u, v = ux, -uy
        elif orient == 2:
            u, v = uy, -ux
        else:
            u, v = uy, ux
        mask = (v >= -1.0) & (v <= 1.0) & (np.abs(u) <= (v + 1.0) / 2.0)
    elif op.shape is Shape.CROSS:
        arm = max(half * min(max(op.param / 4.0, 0.08), 0.5), 1.0)
        mask = ((np.abs(xx - cx) <= arm) & (np.abs(yy - cy) <= half)) | (
            (np.abs(yy - cy) <= arm) & (np.abs(xx - cx) <= half)
        )
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown shape {op.shape}")
    return mask


def render_glyph(buf: ImageBuffer, x0: int, y0: int, box: int, ops: Sequence[GlyphOp]) -> None:
    """Rasterize a glyph program into the square starting at (x0, y0)."""
    for op in ops:
        _paint(buf, _shape_mask(op, box), x0, y0, op.color)


def draw_text(
    buf: ImageBuffer,
    x: int,
    y: int,
    text: str,
    scale: int = 2,
    color: Tuple[int, int, int] = (0, 0, 0),
    clip: Tuple[int, int, int, int] | None = None,
) -> None:
    """Draw bitmap text with its top-left corner at (x, y).

    ``clip`` is an optional (x0, y0, x1, y1) window; pixels outside it (or
    outside the canvas) are dropped.
    """
    cx0, cy0, cx1, cy1 = clip if clip else (0, 0, buf.width, buf.height)
    cx0, cy0 = max(cx0, 0), max(cy0, 0)
    cx1, cy1 = min(cx1, buf.width), min(cy1, buf.height)
    rgba = (*color, 255)
    pen_x = x
    step = (GLYPH_WIDTH + 1) * scale
    for ch in text:
        rows = FONT_5X7.get(ch, FALLBACK_GLYPH)
        for row_idx, row in enumerate(rows):
            if not row:
                continue
            py0 = y + row_idx * scale
            for col in range(GLYPH_WIDTH):
                if not row & (1 << (GLYPH_WIDTH - 1 - col)):
                    continue
                px0 = pen_x + col * scale
                sx0, sy0 = max(px0, cx0), max(py0, cy0)
                sx1, sy1 = min(px0 + scale, cx1), min(py0 + scale, cy1)
                if sx0 < sx1 and sy0 < sy1:
                    buf.pixels[sy0:sy1, sx0:sx1] = rgba
        pen_x += step


def draw_text_centered(
    buf: ImageBuffer,
    center_x: int,
    y: int,
    text: str,
    scale: int = 2,
    color: Tuple[int, int, int] = (0, 0, 0),
    clip: Tuple[int, int, int, int] | None = None,
) -> None:
    draw_text(buf, center_x - text_width(text, scale) // 2, y, text, scale, color, clip)


def encode_png(buf: ImageBuffer) -> bytes:
    """Encode as an 8-bit RGBA PNG with deterministic bytes.

    Scanlines use the Up filter: screens are mostly vertical runs of the
    same color, so the filtered stream is near-zero and compresses fast.
    """
    rows = buf.pixels.reshape(buf.height, buf.width * 4)
    raw = np.empty((buf.height, 1 + buf.width * 4), dtype=np.uint8)
    raw[:, 0] = 2  # Up filter
    raw[0, 1:] = rows[0]
    np.subtract(rows[1:], rows[:-1], out=raw[1:, 1:])
    compressed = zlib.compress(raw.data, _ZLIB_LEVEL)

    def chunk(tag: bytes, payload: bytes) -> bytes:
        body = tag + payload
        return struct.pack(">I", len(payload)) + body + struct.pack(
            ">I", zlib.crc32(body) & 0xFFFFFFFF
        )

    ihdr = struct.pack(">IIBBBBB", buf.width, buf.height, 8, 6, 0, 0, 0)
    return b"".join(
        [
            _PNG_SIGNATURE,
            chunk(b"IHDR", ihdr),
            chunk(b"IDAT", compressed),
            chunk(b"IEND", b""),
        ]
    )


def decode_png_size(data: bytes) -> Tuple[int, int]:
    """Read (width, height) from a PNG header without decoding pixels."""
    if data[:8] != _PNG_SIGNATURE or data[12:16] != b"IHDR":
        raise ValueError("not a PNG stream")
    width, height = struct.unpack(">II", data[16:24])
    return width, height


def decode_png(data: bytes) -> ImageBuffer:
    """Minimal decoder for PNGs produced by :func:`encode_png`."""
    width, height = decode_png_size(data)
    bit_depth, color_type = data[24], data[25]
    if (bit_depth, color_type) != (8, 6):
        raise ValueError("only 8-bit RGBA supported")
    idat = b""
    offset = 8
    while offset < len(data):
        (length,) = struct.unpack(">I", data[offset:offset + 4])
        tag = data[offset + 4:offset + 8]
        if tag == b"IDAT":
            idat += data[offset + 8:offset + 8 + length]
        offset += 12 + length
    raw = np.frombuffer(zlib.decompress(idat), dtype=np.uint8)
    raw = raw.reshape(height, 1 + width * 4)
    filters = raw[:, 0]
    data = raw[:, 1:]
    if np.all(filters == 0):
        pixels = data.copy()
    elif np.all(filters == 2):  # Up filter: undo by cumulative sum mod 256
        pixels = np.cumsum(data.astype(np.uint64), axis=0, dtype=np.uint64)
        pixels = (pixels & 0xFF).astype(np.uint8)
    else:
        raise ValueError("unsupported scanline filter mix")
    return ImageBuffer(width, height, pixels.reshape(height, width, 4).copy())
