"""Discrete polar lattice and Cartesian <-> polar resampling.

The lattice has radii ``r_k = k / (n_r - 1) * r_max`` and angles
``theta_j = -pi + 2 pi j / n_theta``. A :class:`PolarImage` stores samples
as an ``(n_theta, n_r)`` array: one row per angular slice.

Cartesian coordinates use the image center as origin with the y axis
pointing up the screen, and the inscribed disk has radius
``s = min(width, height) / 2 - 0.5`` pixels so bilinear stencils never
leave the raster.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _accel
from .image_io import GrayImage, read_pgm, write_pgm

DEFAULT_R_MAX = 0.999


@dataclass(frozen=True)
class PolarGrid:
    n_r: int
    n_theta: int
    r_max: float = DEFAULT_R_MAX

    def __post_init__(self):
        if int(self.n_r) != self.n_r or self.n_r < 2:
            raise ValueError(f"n_r must be an integer >= 2, got {self.n_r}")
        if int(self.n_theta) != self.n_theta or self.n_theta < 2:
            raise ValueError(f"n_theta must be an integer >= 2, got {self.n_theta}")
        if self.n_theta % 2:
            raise ValueError(f"n_theta must be even, got {self.n_theta}")
        if not 0.0 < self.r_max <= 1.0:
            raise ValueError(f"r_max must lie in (0, 1], got {self.r_max}")
        object.__setattr__(self, "n_r", int(self.n_r))
        object.__setattr__(self, "n_theta", int(self.n_theta))
        object.__setattr__(self, "r_max", float(self.r_max))

    @property
    def radii(self) -> np.ndarray:
        r = np.arange(self.n_r) * (self.r_max / (self.n_r - 1))
        r[-1] = self.r_max
        return r

    @property
    def thetas(self) -> np.ndarray:
        return -np.pi + 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def weights(self) -> np.ndarray:
        """Polar Jacobian ``w_k = r_k``."""
        return self.radii

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_theta, self.n_r)

    @property
    def m_values(self) -> np.ndarray:
        """Signed angular orders in storage order, ``-n_theta/2 .. n_theta/2 - 1``."""
        return np.arange(-self.n_theta // 2, self.n_theta // 2)


def build_grid(n_r: int, n_theta: int, r_max: float = DEFAULT_R_MAX) -> PolarGrid:
    return PolarGrid(n_r, n_theta, r_max)


def default_grid(width: int, height: int | None = None, r_max: float = DEFAULT_R_MAX) -> PolarGrid:
    """Grid sized for an image: ``n_r = N`` and ``n_theta`` the next
    multiple of four at or above ``ceil(pi N)``, where ``N = min(width, height)``.

    A multiple of four keeps quarter turns exact cyclic shifts of the rows.
    """
    n = min(width, height if height is not None else width)
    n_theta = 4 * math.ceil(math.ceil(math.pi * n) / 4)
    return PolarGrid(max(n, 2), n_theta, r_max)


@dataclass(frozen=True, eq=False)
class PolarImage:
    grid: PolarGrid
    samples: np.ndarray

    def __post_init__(self):
        arr = np.array(self.samples, copy=True)
        if not np.iscomplexobj(arr):
            arr = arr.astype(np.float64)
        if arr.shape != self.grid.shape:
            raise ValueError(f"samples shape {arr.shape} does not match grid {self.grid.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def real(self) -> "PolarImage":
        return PolarImage(self.grid, np.real(self.samples))

    def shift_rows(self, delta: int) -> "PolarImage":
        """Cyclic angular shift: the result's row ``j`` is this image's row ``j - delta``.

        This is exactly the action of a rotation by ``2 pi delta / n_theta``.
        """
        return PolarImage(self.grid, np.roll(self.samples, delta, axis=0))


def disk_geometry(width: int, height: int) -> tuple[float, float, float]:
    """Center (cx, cy) in pixel indices and inscribed-disk radius s."""
    return (width - 1) / 2.0, (height - 1) / 2.0, min(width, height) / 2.0 - 0.5


def disk_mask(width: int, height: int) -> np.ndarray:
    """Boolean (height, width) mask of pixel centers inside the inscribed disk."""
    cx, cy, s = disk_geometry(width, height)
    rows, cols = np.mgrid[0:height, 0:width]
    return (cols - cx) ** 2 + (rows - cy) ** 2 <= s * s


def cart_to_polar(img: GrayImage, grid: PolarGrid) -> PolarImage:
    """Bilinearly resample ``img`` at every lattice point."""
    if img.width < 2 or img.height < 2:
        raise ValueError("image must be at least 2x2")
    cx, cy, s = disk_geometry(img.width, img.height)
    rr = grid.radii[np.newaxis, :] * s
    th = grid.thetas[:, np.newaxis]
    xs = cx + rr * np.cos(th)
    ys = cy - rr * np.sin(th)
    # r = 0 must hit the center for every slice, independent of cos/sin rounding
    xs[:, 0] = cx
    ys[:, 0] = cy
    samples = _accel.bilinear_sample(img.pixels, xs, ys, 0.0)
    return PolarImage(grid, samples)


def polar_to_cart(polar: PolarImage, width: int, height: int, fill: float = 0.0, value_range=None) -> GrayImage:
    """Render polar samples back onto a raster; pixels outside the disk get ``fill``."""
    samples = np.real(polar.samples)
    grid = polar.grid
    cx, cy, s = disk_geometry(width, height)
    rows, cols = np.mgrid[0:height, 0:width].astype(np.float64)
    x = cols - cx
    y = cy - rows
    inside = x * x + y * y <= s * s
    r = np.hypot(x[inside], y[inside]) / s
    th = np.arctan2(y[inside], x[inside])
    kf = r / grid.r_max * (grid.n_r - 1)
    jf = (th + np.pi) * (grid.n_theta / (2.0 * np.pi))
    out = np.full((height, width), float(fill))
    out[inside] = _accel.bilinear_sample_polar(samples, jf, kf)
    if value_range is None:
        lo = float(min(out.min(), fill))
        hi = float(max(out.max(), fill))
        value_range = (lo, hi) if hi > lo else (lo, lo + 1.0)
    return GrayImage(out, value_range)


# --------------------------------------------------------- serialization

_HEADER_RE = re.compile(r"psept-polar N_r=(\d+) N_theta=(\d+) R_max=(\S+) lo=(\S+) hi=(\S+)")


def save_polar_pgm(polar: PolarImage, path, bit_depth: int = 16) -> None:
    """Write real polar samples as a PGM (width n_r, height n_theta).

    A header comment records the grid and the value interval mapped onto
    0..maxval; decimals are written with ``repr`` so they parse back exactly.
    """
    samples = np.real(polar.samples)
    lo, hi = float(samples.min()), float(samples.max())
    if hi == lo:
        hi = lo + 1.0
    maxval = 255 if bit_depth == 8 else 65535
    q = np.clip(np.rint((samples - lo) / (hi - lo) * maxval), 0, maxval).astype(np.int64)
    g = polar.grid
    comment = f"psept-polar N_r={g.n_r} N_theta={g.n_theta} R_max={g.r_max!r} lo={lo!r} hi={hi!r}"
    write_pgm(path, q, maxval, comments=[comment])


def load_polar_pgm(path) -> PolarImage:
    samples, maxval, comments = read_pgm(Path(path).read_bytes())
    for c in comments:
        m = _HEADER_RE.search(c)
        if m:
            n_r, n_theta = int(m.group(1)), int(m.group(2))
            r_max, lo, hi = (float(m.group(i)) for i in (3, 4, 5))
            break
    else:
        raise ValueError(f"{path}: missing psept-polar header comment")
    grid = PolarGrid(n_r, n_theta, r_max)
    return PolarImage(grid, lo + samples / maxval * (hi - lo))
