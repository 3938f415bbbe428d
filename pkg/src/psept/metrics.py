"""Error, quality, distance and conditioning measurements."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .image_io import GrayImage
from .polar_grid import disk_mask

SINGULAR_FLOOR = 1e-300


def _as_array(x) -> np.ndarray:
    if isinstance(x, GrayImage):
        return np.asarray(x.pixels)
    values = getattr(x, "values", x)
    return np.asarray(values)


def _diff(a, b, disk_only: bool) -> np.ndarray:
    a, b = _as_array(a), _as_array(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a - b
    if disk_only:
        d = d[disk_mask(a.shape[1], a.shape[0])]
    return d.ravel()


def mse(a, b, disk_only: bool = False) -> float:
    d = _diff(a, b, disk_only)
    return float(np.mean(d * d))


def rmse(a, b, disk_only: bool = False) -> float:
    return math.sqrt(mse(a, b, disk_only))


def psnr(a, b, peak: float = 1.0, disk_only: bool = False) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical inputs."""
    e = mse(a, b, disk_only)
    if e == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / e)


@dataclass(frozen=True)
class QualityReport:
    rmse: float
    psnr: float
    max_abs: float
    n_pixels: int

    def to_json(self) -> str:
        psnr_db = None if math.isinf(self.psnr) else self.psnr
        return json.dumps(
            {"rmse": self.rmse, "psnr_db": psnr_db, "max_abs": self.max_abs, "n_pixels": self.n_pixels},
            sort_keys=True,
        )

    def csv_row(self) -> list[str]:
        return [repr(self.rmse), "inf" if math.isinf(self.psnr) else repr(self.psnr), repr(self.max_abs), str(self.n_pixels)]

    CSV_HEADER = ("rmse", "psnr_db", "max_abs", "n_pixels")


def quality_report(a, b, peak: float = 1.0, disk_only: bool = False) -> QualityReport:
    d = _diff(a, b, disk_only)
    e = float(np.mean(d * d)) if d.size else 0.0
    return QualityReport(
        rmse=math.sqrt(e),
        psnr=math.inf if e == 0 else 10.0 * math.log10(peak * peak / e),
        max_abs=float(np.max(np.abs(d))) if d.size else 0.0,
        n_pixels=int(d.size),
    )


def euclidean_distance(v1, v2, normalize: bool = False) -> float:
    a = np.asarray(_as_array(v1), dtype=np.float64).ravel()
    b = np.asarray(_as_array(v2), dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if normalize:
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na > 0:
            a = a / na
        if nb > 0:
            b = b / nb
    return float(np.linalg.norm(a - b))


def condition_number(matrix) -> float:
    """sigma_max / sigma_min from a full SVD; ``inf`` when sigma_min < 1e-300."""
    a = np.asarray(matrix)
    if a.size == 0:
        raise ValueError("empty matrix")
    if a.ndim != 2:
        raise ValueError("condition_number expects a 2-D matrix")
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] < SINGULAR_FLOOR:
        return math.inf
    return float(s[0] / s[-1])


def orthogonality_error(gram) -> float:
    g = np.asarray(gram)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError(f"gram matrix must be square, got shape {g.shape}")
    return float(np.max(np.abs(g - np.eye(g.shape[0]))))
