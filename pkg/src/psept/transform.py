"""Two-stage forward/inverse polar separable transform.

Forward: an orthonormal DCT-II along each angular slice (radial stage),
then a unitary DFT along each radial mode (angular stage), with the
``theta_0 = -pi`` phase origin folded in so that

    C[n, m] = sum_{j,k} g[j, k] * conj(K_{n,m}(k, j)).

Inverse runs the adjoint stages in the opposite order (angular, then
radial). Under the default ``"orthonormal"`` convention the pair is
unitary: exact reconstruction, Parseval, and rotation acting as a pure
phase ``exp(-i m alpha)``.

``"paper-literal"`` applies the Jacobian weights ``w_k = r_k`` and the
global ``1 / (n_r n_theta)`` factor in the analysis; it has no inverse.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft

from .bases import angular_matrix, radial_matrix
from .polar_grid import PolarGrid, PolarImage

ORTHONORMAL = "orthonormal"
PAPER_LITERAL = "paper-literal"
CONVENTIONS = (ORTHONORMAL, PAPER_LITERAL)


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Complex coefficients stored as ``values[n, m + n_theta // 2]``."""

    grid: PolarGrid
    values: np.ndarray
    convention: str = ORTHONORMAL

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}")
        arr = np.array(self.values, dtype=np.complex128, copy=True)
        if arr.shape != (self.grid.n_r, self.grid.n_theta):
            raise ValueError(f"values shape {arr.shape} does not match grid ({self.grid.n_r}, {self.grid.n_theta})")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def m_values(self) -> np.ndarray:
        return self.grid.m_values

    def column(self, m: int) -> int:
        half = self.grid.n_theta // 2
        if not -half <= m < half:
            raise IndexError(f"angular order {m} out of range")
        return m + half

    def __getitem__(self, nm) -> complex:
        n, m = nm
        if not 0 <= n < self.grid.n_r:
            raise IndexError(f"radial order {n} out of range")
        return complex(self.values[n, self.column(m)])

    def replace(self, values) -> "CoefficientTable":
        return CoefficientTable(self.grid, values, self.convention)


def _phase_sign(n_theta: int) -> np.ndarray:
    # exp(-i m theta_j) = (-1)^m exp(-2 pi i m j / n_theta) because theta_0 = -pi
    m = np.arange(-n_theta // 2, n_theta // 2)
    return np.where(m % 2 == 0, 1.0, -1.0)


def _check_finite(samples: np.ndarray) -> None:
    if not np.all(np.isfinite(samples)):
        raise ValueError("polar samples must be finite")


def forward(polar: PolarImage, convention: str = ORTHONORMAL) -> CoefficientTable:
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    g = polar.samples
    _check_finite(g)
    grid = polar.grid
    if convention == PAPER_LITERAL:
        g = g * grid.weights[np.newaxis, :]

    # stage 1: radial DCT-II of every angular slice -> G[j, n]
    if np.iscomplexobj(g):
        stage1 = scipy.fft.dct(g.real, type=2, norm="ortho", axis=1) + 1j * scipy.fft.dct(
            g.imag, type=2, norm="ortho", axis=1
        )
    else:
        stage1 = scipy.fft.dct(g, type=2, norm="ortho", axis=1)
    # stage 2: angular DFT of every radial mode -> C[n, m]
    spectrum = scipy.fft.fft(stage1, axis=0, norm="ortho")
    coeffs = scipy.fft.fftshift(spectrum, axes=0).T * _phase_sign(grid.n_theta)[np.newaxis, :]
    if convention == PAPER_LITERAL:
        coeffs = coeffs / (grid.n_r * grid.n_theta)
    return CoefficientTable(grid, coeffs, convention)


def inverse(coeffs: CoefficientTable) -> PolarImage:
    """Exact inverse of :func:`forward` (orthonormal convention only).

    Samples come back complex; use ``.real()`` for images known to be real.
    """
    if coeffs.convention != ORTHONORMAL:
        raise ValueError("inverse is only defined for the orthonormal convention")
    grid = coeffs.grid
    c = np.asarray(coeffs.values) * _phase_sign(grid.n_theta)[np.newaxis, :]
    # stage 1: angular synthesis for every radial mode -> G[j, n]
    stage1 = scipy.fft.ifft(scipy.fft.ifftshift(c.T, axes=0), axis=0, norm="ortho")
    # stage 2: radial synthesis (inverse DCT-II) of every slice -> g[j, k]
    g = scipy.fft.idct(stage1.real, type=2, norm="ortho", axis=1) + 1j * scipy.fft.idct(
        stage1.imag, type=2, norm="ortho", axis=1
    )
    return PolarImage(grid, g)


def forward_direct(polar: PolarImage, convention: str = ORTHONORMAL) -> CoefficientTable:
    """Slow two-stage forward by explicit summation against the basis matrices."""
    grid = polar.grid
    g = polar.samples
    _check_finite(g)
    if convention == PAPER_LITERAL:
        g = g * grid.weights[np.newaxis, :]
    phi = radial_matrix(grid.n_r)
    psi = angular_matrix(grid.n_theta)
    stage1 = g @ phi.T  # G[j, n]
    coeffs = (psi.conj() @ stage1).T  # C[n, m]
    if convention == PAPER_LITERAL:
        coeffs = coeffs / (grid.n_r * grid.n_theta)
    return CoefficientTable(grid, coeffs, convention)


def inverse_direct(coeffs: CoefficientTable) -> PolarImage:
    if coeffs.convention != ORTHONORMAL:
        raise ValueError("inverse is only defined for the orthonormal convention")
    grid = coeffs.grid
    phi = radial_matrix(grid.n_r)
    psi = angular_matrix(grid.n_theta)
    stage1 = psi.T @ np.asarray(coeffs.values).T  # G[j, n]
    return PolarImage(grid, stage1 @ phi)


def truncate(coeffs: CoefficientTable, n_r_star: int, m_star: int) -> CoefficientTable:
    """Zero every entry with ``n > n_r_star`` or ``|m| > m_star``."""
    grid = coeffs.grid
    if not 0 <= n_r_star < grid.n_r:
        raise ValueError(f"n_r_star={n_r_star} outside [0, {grid.n_r})")
    if not 0 <= m_star <= grid.n_theta // 2 - 1:
        raise ValueError(f"m_star={m_star} outside [0, {grid.n_theta // 2 - 1}]")
    keep = (np.arange(grid.n_r)[:, np.newaxis] <= n_r_star) & (np.abs(grid.m_values)[np.newaxis, :] <= m_star)
    return coeffs.replace(np.where(keep, coeffs.values, 0.0))


def mask_coefficients(coeffs: CoefficientTable, keep: np.ndarray) -> CoefficientTable:
    """Zero every entry where the boolean ``keep`` array is False."""
    return coeffs.replace(np.where(keep, coeffs.values, 0.0))


def rotate_coefficients(coeffs: CoefficientTable, alpha: float) -> CoefficientTable:
    """Apply a rotation by ``alpha`` radians: ``C[n, m] -> C[n, m] exp(-i m alpha)``."""
    phase = np.exp(-1j * coeffs.m_values * alpha)
    return coeffs.replace(coeffs.values * phase[np.newaxis, :])


def energy_spatial(polar: PolarImage) -> float:
    return float(np.sum(np.abs(polar.samples) ** 2))


def energy_spectral(coeffs: CoefficientTable) -> float:
    if coeffs.convention != ORTHONORMAL:
        raise ValueError("spectral energy requires the orthonormal convention")
    return float(np.sum(np.abs(coeffs.values) ** 2))


def weighted_energy(polar: PolarImage) -> float:
    """Disk-measure energy ``sum |g|^2 r_k`` (Jacobian weighted)."""
    return float(np.sum(np.abs(polar.samples) ** 2 * polar.grid.weights[np.newaxis, :]))


# --------------------------------------------------------- serialization

MAGIC = b"PSEPT1"


def save_coefficients(coeffs: CoefficientTable, path) -> None:
    """Little-endian container.

    Layout: ``b"PSEPT1"``, ``<u4 n_r``, ``<u4 n_theta``, ``<u2`` length +
    ASCII ``repr(r_max)``, ``<u2`` length + ASCII convention tag, then
    ``n_r * n_theta`` pairs ``<f8 re, <f8 im`` in n-major order with m
    ascending from ``-n_theta/2``.
    """
    g = coeffs.grid
    rmax = repr(g.r_max).encode("ascii")
    conv = coeffs.convention.encode("ascii")
    head = MAGIC + struct.pack("<II", g.n_r, g.n_theta)
    head += struct.pack("<H", len(rmax)) + rmax + struct.pack("<H", len(conv)) + conv
    body = np.ascontiguousarray(coeffs.values, dtype="<c16").tobytes()
    Path(path).write_bytes(head + body)


def load_coefficients(path) -> CoefficientTable:
    data = Path(path).read_bytes()
    if data[:6] != MAGIC:
        raise ValueError(f"{path}: bad magic {data[:6]!r}")
    pos = 6
    n_r, n_theta = struct.unpack_from("<II", data, pos)
    pos += 8
    (ln,) = struct.unpack_from("<H", data, pos)
    pos += 2
    r_max = float(data[pos : pos + ln].decode("ascii"))
    pos += ln
    (ln,) = struct.unpack_from("<H", data, pos)
    pos += 2
    convention = data[pos : pos + ln].decode("ascii")
    pos += ln
    nbytes = n_r * n_theta * 16
    if len(data) - pos < nbytes:
        raise ValueError(f"{path}: truncated coefficient payload")
    values = np.frombuffer(data[pos : pos + nbytes], dtype="<c16").reshape(n_r, n_theta)
    return CoefficientTable(PolarGrid(n_r, n_theta, r_max), values, convention)


def coefficients_to_csv(coeffs: CoefficientTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "m", "re", "im"])
        for n in range(coeffs.grid.n_r):
            for col, m in enumerate(coeffs.m_values):
                v = coeffs.values[n, col]
                w.writerow([n, int(m), repr(float(v.real)), repr(float(v.imag))])
