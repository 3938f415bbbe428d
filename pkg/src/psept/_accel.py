"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy twins
take over. Set ``PSEPT_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

_compiled = None
if os.environ.get("PSEPT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def available_backends() -> list[str]:
    return ["cython", "python"] if _compiled is not None else ["python"]


def _impl(backend: str | None):
    name = backend or BACKEND
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled backend not available")
        return _compiled
    if name == "python":
        return _pykernels
    raise ValueError(f"unknown backend {name!r}")


def _flat(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64).ravel()


def bilinear_sample(img, xs, ys, fill: float = 0.0, backend: str | None = None) -> np.ndarray:
    """Sample ``img`` at fractional (column, row) positions.

    Positions outside the raster (beyond a 1e-9 slack) receive ``fill``.
    Output has the broadcast shape of ``xs`` and ``ys``.
    """
    img = np.ascontiguousarray(img, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    shape = np.broadcast(xs, ys).shape
    xs = np.broadcast_to(xs, shape)
    ys = np.broadcast_to(ys, shape)
    h, w = img.shape
    if h < 2 or w < 2:
        # single-row/column rasters: duplicate the edge so a 2x2 stencil exists
        img = np.ascontiguousarray(np.pad(img, ((0, int(h < 2)), (0, int(w < 2))), mode="edge"))
    out = _impl(backend).bilinear_sample(img, _flat(xs), _flat(ys), float(fill)).reshape(shape)
    if h < 2 or w < 2:
        tol = _pykernels.EDGE_TOL
        out[(xs > w - 1 + tol) | (ys > h - 1 + tol)] = fill
    return out


def bilinear_sample_polar(samples, jf, kf, backend: str | None = None) -> np.ndarray:
    """Sample a (n_theta, n_r) array at fractional (angle, radius) indices.

    The angular index wraps periodically; the radial index is clamped.
    """
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    jf = np.asarray(jf, dtype=np.float64)
    kf = np.asarray(kf, dtype=np.float64)
    shape = np.broadcast(jf, kf).shape
    out = _impl(backend).bilinear_sample_polar(
        samples, _flat(np.broadcast_to(jf, shape)), _flat(np.broadcast_to(kf, shape))
    )
    return out.reshape(shape)


def horner(coeffs, x, backend: str | None = None) -> np.ndarray:
    """Evaluate the polynomial with descending ``coeffs`` at every point of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    out = _impl(backend).horner(_flat(coeffs), _flat(x))
    return out.reshape(x.shape)
