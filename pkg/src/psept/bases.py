"""Orthonormal radial DCT-II basis, Fourier angular basis and their product kernel.

The radial functions depend only on the integer sample index ``k``; they
are the orthonormal DCT-II vectors, whose half-sample nodes ``(k + 1/2)/n_r``
are deliberately decoupled from the lattice radii ``r_k``. Mode 0 carries
``sqrt(1/n_r)`` rather than ``sqrt(2/n_r)`` so the radial set is orthonormal.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple

import numpy as np

from .polar_grid import PolarGrid

MAX_MATRIX_SIZE = 4096


class KernelIndex(NamedTuple):
    n: int
    m: int


def _radial_scale(n: int, n_r: int) -> float:
    return math.sqrt((1.0 if n == 0 else 2.0) / n_r)


def _check_radial(n: int, k: int, n_r: int) -> None:
    if n_r < 1:
        raise ValueError(f"n_r must be positive, got {n_r}")
    if not (0 <= n < n_r and 0 <= k < n_r):
        raise IndexError(f"radial indices n={n}, k={k} out of range for n_r={n_r}")


def _check_angular(m: int, j: int, n_theta: int) -> None:
    if n_theta < 2 or n_theta % 2:
        raise ValueError(f"n_theta must be even and >= 2, got {n_theta}")
    if not (0 <= j < n_theta and -n_theta // 2 <= m <= n_theta // 2 - 1):
        raise IndexError(f"angular indices m={m}, j={j} out of range for n_theta={n_theta}")


def radial_basis(n: int, k: int, n_r: int) -> float:
    _check_radial(n, k, n_r)
    return _radial_scale(n, n_r) * math.cos(n * math.pi * (k + 0.5) / n_r)


def angular_basis(m: int, j: int, n_theta: int) -> complex:
    _check_angular(m, j, n_theta)
    theta = -math.pi + 2.0 * math.pi * j / n_theta
    return complex(math.cos(m * theta), math.sin(m * theta)) / math.sqrt(n_theta)


def kernel(idx: KernelIndex, k: int, j: int, grid: PolarGrid) -> complex:
    n, m = idx
    return radial_basis(n, k, grid.n_r) * angular_basis(m, j, grid.n_theta)


def radial_matrix(n_r: int) -> np.ndarray:
    """``Phi[n, k]`` for all orders and samples (the orthonormal DCT-II matrix)."""
    n = np.arange(n_r)[:, np.newaxis]
    k = np.arange(n_r)[np.newaxis, :]
    phi = np.sqrt(2.0 / n_r) * np.cos(n * np.pi * (k + 0.5) / n_r)
    phi[0, :] = math.sqrt(1.0 / n_r)
    return phi


def angular_matrix(n_theta: int) -> np.ndarray:
    """``Psi[i, j]`` with row ``i`` holding order ``m = i - n_theta/2``."""
    m = np.arange(-n_theta // 2, n_theta // 2)[:, np.newaxis]
    theta = -np.pi + 2.0 * np.pi * np.arange(n_theta)[np.newaxis, :] / n_theta
    return np.exp(1j * m * theta) / math.sqrt(n_theta)


def full_index_set(grid: PolarGrid) -> list[KernelIndex]:
    """Every (n, m) pair of the grid, ascending n then ascending m."""
    return [KernelIndex(n, int(m)) for n in range(grid.n_r) for m in grid.m_values]


def build_kernel_matrix(grid: PolarGrid, orders: Iterable[KernelIndex]) -> np.ndarray:
    """Explicit kernel matrix for validation work.

    Row ``i`` is ``K_{orders[i]}`` flattened with the angular index outer and
    the radial index inner, matching ``PolarImage.samples.ravel()``. Each
    entry is the product of the two factor evaluations.
    """
    orders = [KernelIndex(int(n), int(m)) for n, m in orders]
    if not orders:
        raise ValueError("orders must be non-empty")
    if len(set(orders)) != len(orders):
        raise ValueError("duplicate kernel indices")
    if grid.n_r * grid.n_theta > MAX_MATRIX_SIZE:
        raise ValueError(f"grid too large for an explicit matrix ({grid.n_r}x{grid.n_theta})")
    for n, m in orders:
        _check_radial(n, 0, grid.n_r)
        _check_angular(m, 0, grid.n_theta)

    phi = np.array([[radial_basis(n, k, grid.n_r) for k in range(grid.n_r)] for n in range(grid.n_r)])
    psi = {}
    out = np.empty((len(orders), grid.n_theta * grid.n_r), dtype=np.complex128)
    for i, (n, m) in enumerate(orders):
        if m not in psi:
            psi[m] = np.array([angular_basis(m, j, grid.n_theta) for j in range(grid.n_theta)])
        out[i] = (psi[m][:, np.newaxis] * phi[n][np.newaxis, :]).ravel()
    return out
