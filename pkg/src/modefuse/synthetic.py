"""Seeded synthetic two-class image dataset used by the demo and tests.

Class -1 images are exactly black and class +1 images are bright with
mild noise, so every built-in classifier separates them, including the
short-budget logistic members whose bias must drift below zero to label
the black class.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .image import RasterImage, save_png


def make_synthetic_dataset(
    out_dir,
    k: int = 200,
    seed: int = 0,
    side: int = 64,
    dark_level: float = 0.0,
    dark_sd: float = 0.0,
    bright_level: float = 200.0,
    bright_sd: float = 10.0,
):
    """Write k PNGs plus manifest.csv; returns the manifest path.

    Classes alternate (-1 dark, +1 bright) so the set is balanced.
    """
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    manifest_path = os.path.join(out_dir, "manifest.csv")
    with open(manifest_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "path", "label"])
        for i in range(k):
            label = -1 if i % 2 == 0 else 1
            base, sd = (dark_level, dark_sd) if label == -1 else (bright_level, bright_sd)
            if sd == 0.0:
                plane = np.full((side, side), base)
            else:
                plane = rng.normal(base, sd, size=(side, side))
            pixels = np.clip(plane, 0, 255).astype(np.uint8)[:, :, None]
            image_id = f"img{i:04d}"
            path = os.path.join(out_dir, f"{image_id}.png")
            save_png(RasterImage(pixels), path)
            writer.writerow([image_id, path, label])
    return manifest_path
