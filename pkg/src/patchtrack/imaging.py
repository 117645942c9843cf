"""Image decoding, cropping and luminance conversion.

Images are immutable 8-bit RGB rasters; every function here is pure, so
values can be shared freely across threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image as PILImage, UnidentifiedImageError

from .errors import DecodeError, EmptyRegion

# BT.601 luma coefficients; the scalar "color value" used by projection
# profiles is luminance, which is channel-order independent.
LUMA_R, LUMA_G, LUMA_B = 0.299, 0.587, 0.114


@dataclass(frozen=True)
class Image:
    """Owned RGB raster, shape (height, width, 3), dtype uint8, read-only."""

    data: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(self.data)
        if d.ndim != 3 or d.shape[2] != 3 or d.dtype != np.uint8:
            raise ValueError("image data must be (h, w, 3) uint8")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box; x/y are the 0-based top-left corner."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError("box must be at least 1x1")

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)


def decode_image(payload: bytes) -> Image:
    """Decode PNG or JPEG bytes to an RGB image.

    Grayscale sources are expanded to r=g=b. Raises DecodeError on
    malformed payloads or unsupported formats.
    """
    try:
        with PILImage.open(io.BytesIO(payload)) as im:
            if im.format not in ("PNG", "JPEG"):
                raise DecodeError(f"unsupported format: {im.format}")
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except DecodeError:
        raise
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(str(exc)) from exc
    return Image(arr)


def pixel_rect(box: BBox, width: int, height: int) -> tuple[int, int, int, int]:
    """Clamp `box` to a (width, height) raster.

    Returns integer (r0, r1, c0, c1) slice bounds; raises EmptyRegion
    when the intersection is empty.
    """
    c0 = int(round(box.x))
    r0 = int(round(box.y))
    c1 = c0 + int(round(box.w))
    r1 = r0 + int(round(box.h))
    c0, c1 = max(c0, 0), min(c1, width)
    r0, r1 = max(r0, 0), min(r1, height)
    if c1 <= c0 or r1 <= r0:
        raise EmptyRegion(f"box {box} does not intersect {width}x{height} image")
    return r0, r1, c0, c1


def crop(img: Image, box: BBox) -> Image:
    """Extract the intersection of `box` with the image bounds."""
    r0, r1, c0, c1 = pixel_rect(box, img.width, img.height)
    return Image(img.data[r0:r1, c0:c1])


def luminance(r: float, g: float, b: float) -> float:
    """BT.601 luminance of one pixel, in [0, 255], not rounded."""
    return LUMA_R * r + LUMA_G * g + LUMA_B * b


def luminance_map(img: Image) -> np.ndarray:
    """Per-pixel luminance as a float64 (h, w) array."""
    d = img.data.astype(np.float64)
    return LUMA_R * d[:, :, 0] + LUMA_G * d[:, :, 1] + LUMA_B * d[:, :, 2]


def encode_png(img: Image) -> bytes:
    """Serialize an image as PNG bytes (deterministic for fixed pixels)."""
    buf = io.BytesIO()
    PILImage.fromarray(np.asarray(img.data)).save(buf, format="PNG")
    return buf.getvalue()
