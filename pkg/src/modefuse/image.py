"""Raster images, deterministic bilinear resize, and seeded augmentation
(vertical reflection, continuous translation, scaling).

All geometric transforms use inverse mapping with bilinear sampling.
Sample points that fall fully outside the source frame are filled black;
points within half a pixel of the border clamp to the nearest edge texel.
Intensities round half-to-even when quantizing back to 8 bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import DomainError, FormatError


@dataclass(frozen=True)
class RasterImage:
    """8-bit image stored as an (height, width, channels) array, channels 1 or 3."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.uint8)
        object.__setattr__(self, "pixels", arr)
        if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DomainError(f"image must be nonempty (h, w, c), got shape {arr.shape}")
        if arr.shape[2] not in (1, 3):
            raise FormatError(f"unsupported channel count {arr.shape[2]}")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


def load_image(path) -> RasterImage:
    """Read a PNG/JPEG (or any Pillow-readable raster) as grayscale or RGB."""
    with Image.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB") if len(im.getbands()) >= 3 else im.convert("L")
        arr = np.asarray(im, dtype=np.uint8)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return RasterImage(arr)


def save_png(img: RasterImage, path) -> None:
    arr = img.pixels[:, :, 0] if img.channels == 1 else img.pixels
    Image.fromarray(arr).save(path, format="PNG")


def _quantize(values: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(values), 0, 255).astype(np.uint8)


def _bilinear(pixels: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample float coordinate grids (same shape) from an (h, w, c) image."""
    h, w = pixels.shape[:2]
    x = np.clip(xs, 0.0, w - 1.0)
    y = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (x - x0)[..., None]
    fy = (y - y0)[..., None]
    p = pixels.astype(np.float64)
    top = p[y0, x0] * (1.0 - fx) + p[y0, x1] * fx
    bot = p[y1, x0] * (1.0 - fx) + p[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def resize(img: RasterImage, target_w: int, target_h: int) -> RasterImage:
    """Bilinear resize with pixel-center alignment; identity at equal size."""
    if target_w < 1 or target_h < 1:
        raise DomainError("target dimensions must be >= 1")
    if (target_w, target_h) == (img.width, img.height):
        return RasterImage(img.pixels.copy())
    xs = (np.arange(target_w) + 0.5) * (img.width / target_w) - 0.5
    ys = (np.arange(target_h) + 0.5) * (img.height / target_h) - 0.5
    gx, gy = np.meshgrid(xs, ys)
    return RasterImage(_quantize(_bilinear(img.pixels, gx, gy)))


def to_rgb(img: RasterImage) -> RasterImage:
    """Replicate grayscale across 3 channels; pass RGB through unchanged."""
    if img.channels == 3:
        return img
    return RasterImage(np.repeat(img.pixels, 3, axis=2))


@dataclass(frozen=True)
class AugmentationConfig:
    """Distribution parameters of the randomized train-time augmentation."""

    reflect_probability: float = 0.5
    translate_range: tuple[float, float] = (-30.0, 30.0)
    scale_range: tuple[float, float] = (0.9, 1.1)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.reflect_probability <= 1.0:
            raise DomainError("reflect_probability must lie in [0, 1]")
        if self.translate_range[0] > self.translate_range[1]:
            raise DomainError("translate_range bounds out of order")
        if not 0.0 < self.scale_range[0] <= self.scale_range[1]:
            raise DomainError("scale_range bounds must satisfy 0 < lo <= hi")


def rng_stream(seed: int, index: int) -> np.random.Generator:
    """Independent per-image generator derived from (seed, stream index).

    Portable across platforms and parallel schedules: the stream depends
    only on the two integers, not on call order.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _warp(pixels: np.ndarray, src_x: np.ndarray, src_y: np.ndarray) -> np.ndarray:
    h, w = pixels.shape[:2]
    inside = (src_x >= -0.5) & (src_x <= w - 0.5) & (src_y >= -0.5) & (src_y <= h - 0.5)
    out = _bilinear(pixels, src_x, src_y)
    out[~inside] = 0.0
    return out


def augment(img: RasterImage, cfg: AugmentationConfig, stream: np.random.Generator) -> RasterImage:
    """Apply reflect -> translate -> scale with draws from ``stream``.

    Five draws are always consumed (reflection coin, x/y offsets, x/y
    factors) so the stream position is independent of the parameters.
    Output dimensions equal input dimensions.
    """
    coin = stream.random()
    tx = stream.uniform(cfg.translate_range[0], cfg.translate_range[1])
    ty = stream.uniform(cfg.translate_range[0], cfg.translate_range[1])
    sx = stream.uniform(cfg.scale_range[0], cfg.scale_range[1])
    sy = stream.uniform(cfg.scale_range[0], cfg.scale_range[1])

    pixels = img.pixels
    if coin < cfg.reflect_probability:
        pixels = pixels[::-1, :, :]

    h, w = pixels.shape[:2]
    gx, gy = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))

    if tx != 0.0 or ty != 0.0:
        pixels = _quantize(_warp(pixels, gx - tx, gy - ty))
    if sx != 1.0 or sy != 1.0:
        cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
        pixels = _quantize(_warp(pixels, cx + (gx - cx) / sx, cy + (gy - cy) / sy))

    return RasterImage(np.ascontiguousarray(pixels))
