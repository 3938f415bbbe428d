"""Deterministic synthetic test images.

Used by the test-suite, the benchmarks and ``psept ... --synthetic``.
"""

from __future__ import annotations

import numpy as np

from .image_io import GrayImage


def _unit_coords(size: int):
    c = (size - 1) / 2.0
    s = size / 2.0 - 0.5
    rows, cols = np.mgrid[0:size, 0:size].astype(np.float64)
    return (cols - c) / s, (c - rows) / s


def smooth_blobs(size: int = 64) -> GrayImage:
    """Three anisotropic Gaussians, tapered to zero well inside the disk.

    Asymmetric on purpose so rotations change the picture.
    """
    x, y = _unit_coords(size)
    img = (
        0.9 * np.exp(-((x - 0.25) ** 2 / 0.04 + (y - 0.1) ** 2 / 0.10))
        + 0.6 * np.exp(-((x + 0.3) ** 2 / 0.08 + (y + 0.25) ** 2 / 0.03))
        + 0.4 * np.exp(-((x + 0.05) ** 2 + (y - 0.45) ** 2) / 0.02)
    )
    r2 = x * x + y * y
    taper = np.where(r2 < 0.8**2, np.exp(-((r2 / 0.8**2) ** 4) * 2.0), 0.0)
    img = img * taper
    return GrayImage(img / img.max(), (0.0, 1.0))


def smooth_scene(size: int = 128) -> GrayImage:
    """Low-frequency scene filling the whole raster (gradients plus blobs)."""
    x, y = _unit_coords(size)
    img = (
        0.35
        + 0.2 * x
        - 0.1 * y
        + 0.3 * np.exp(-((x - 0.3) ** 2 + (y - 0.2) ** 2) / 0.08)
        - 0.2 * np.exp(-((x + 0.35) ** 2 / 0.05 + (y + 0.3) ** 2 / 0.15))
        + 0.1 * np.cos(3.0 * x + 1.0) * np.sin(2.0 * y)
    )
    return GrayImage(np.clip(img, 0.0, 1.0), (0.0, 1.0))


def radial_gaussian(size: int = 64, width: float = 0.3) -> GrayImage:
    x, y = _unit_coords(size)
    return GrayImage(np.exp(-(x * x + y * y) / (2 * width * width)), (0.0, 1.0))


SYNTHETIC = {
    "blobs": smooth_blobs,
    "scene": smooth_scene,
    "gaussian": radial_gaussian,
}


def make(name: str, size: int) -> GrayImage:
    try:
        return SYNTHETIC[name](size)
    except KeyError:
        raise ValueError(f"unknown synthetic image {name!r}; choose from {sorted(SYNTHETIC)}") from None
