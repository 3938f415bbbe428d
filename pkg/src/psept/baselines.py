"""Classical disk moments computed by direct projection over pixel centers.

Families and their bases ``V_{n,m}(r, theta) = R(r) exp(i m theta)``:

=============== ============================ ======================= ==================
family          radial factor R              normalization           index set
=============== ============================ ======================= ==================
zernike         R_n^{|m|}(r), |m|<=n, parity (n + 1) / pi            n <= C
pseudo_zernike  pseudo-Zernike R_n^{|m|}(r)  (n + 1) / pi            n <= C
pct             cos(pi n r^2)                1/pi (n=0), 2/pi        n + |m| <= C
pst             sin(pi n r^2), n >= 1        2 / pi                  n + |m| <= C
pcet            exp(i 2 pi n r^2), n signed  1 / pi                  2|n| + |m| <= C
=============== ============================ ======================= ==================

Radial polynomials are evaluated from their explicit factorial sums in
float64, with the factorial ratios formed in log space. High orders lose
precision through cancellation; that is the behavior being measured, so
nothing here tries to rescue it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _accel
from .bases import KernelIndex
from .features import SelectionRule
from .image_io import GrayImage
from .polar_grid import disk_geometry, disk_mask

FAMILIES = ("zernike", "pseudo_zernike", "pct", "pst", "pcet")

_FAMILY_ALIASES = {
    "zernike": "zernike",
    "zm": "zernike",
    "pseudo_zernike": "pseudo_zernike",
    "pzernike": "pseudo_zernike",
    "pzm": "pseudo_zernike",
    "pct": "pct",
    "pst": "pst",
    "pcet": "pcet",
}

_FAMILY_RULE = {
    "zernike": "radial_with_parity",
    "pseudo_zernike": "radial",
    "pct": "pyramidal",
    "pst": "pyramidal",
    "pcet": "pcet_weighted",
}


class PrecisionLossError(ArithmeticError):
    """Factorial terms of a radial polynomial overflow float64."""


@dataclass(frozen=True)
class MomentFamily:
    kind: str

    def __post_init__(self):
        kind = _FAMILY_ALIASES.get(self.kind)
        if kind is None:
            raise ValueError(f"unknown moment family {self.kind!r}")
        object.__setattr__(self, "kind", kind)

    def rule(self, C: int) -> SelectionRule:
        return SelectionRule(_FAMILY_RULE[self.kind], C)

    def indices(self, C: int) -> list[KernelIndex]:
        idx = self.rule(C).indices(signed_n=self.kind == "pcet")
        if self.kind == "pst":
            idx = [i for i in idx if i.n >= 1]
        return idx

    def count(self, C: int) -> int:
        return len(self.indices(C))

    def level(self, n: int, m: int) -> int:
        """Smallest C whose index set contains (n, m)."""
        if self.kind in ("zernike", "pseudo_zernike"):
            return n
        if self.kind == "pcet":
            return 2 * abs(n) + abs(m)
        return n + abs(m)

    def normalization(self, n: int) -> float:
        if self.kind in ("zernike", "pseudo_zernike"):
            return (n + 1) / math.pi
        if self.kind == "pct":
            return (1.0 if n == 0 else 2.0) / math.pi
        if self.kind == "pst":
            return 2.0 / math.pi
        return 1.0 / math.pi


# ---------------------------------------------------------- radial factors


def _log_fact(x: int) -> float:
    return math.lgamma(x + 1)


def _signed_exp(logs: list[float], signs: list[int], what: str) -> np.ndarray:
    try:
        vals = [sg * math.exp(lv) for lv, sg in zip(logs, signs)]
    except OverflowError as exc:
        raise PrecisionLossError(f"{what}: factorial coefficient overflows float64") from exc
    return np.array(vals, dtype=np.float64)


def zernike_coefficients(n: int, m_abs: int) -> np.ndarray:
    """Coefficients of ``r^{n-2s}``, s = 0 .. (n - m_abs)/2."""
    if m_abs < 0 or m_abs > n:
        raise ValueError(f"need 0 <= |m| <= n, got n={n}, |m|={m_abs}")
    if (n - m_abs) % 2:
        raise ValueError(f"n - |m| must be even, got n={n}, |m|={m_abs}")
    half_p, half_m = (n + m_abs) // 2, (n - m_abs) // 2
    logs = [_log_fact(n - s) - _log_fact(s) - _log_fact(half_p - s) - _log_fact(half_m - s) for s in range(half_m + 1)]
    signs = [(-1) ** s for s in range(half_m + 1)]
    return _signed_exp(logs, signs, f"R_{n}^{m_abs}")


def pseudo_zernike_coefficients(n: int, m_abs: int) -> np.ndarray:
    """Coefficients of ``r^{n-s}``, s = 0 .. n - m_abs."""
    if m_abs < 0 or m_abs > n:
        raise ValueError(f"need 0 <= |m| <= n, got n={n}, |m|={m_abs}")
    logs = [
        _log_fact(2 * n + 1 - s) - _log_fact(s) - _log_fact(n + m_abs + 1 - s) - _log_fact(n - m_abs - s)
        for s in range(n - m_abs + 1)
    ]
    signs = [(-1) ** s for s in range(n - m_abs + 1)]
    return _signed_exp(logs, signs, f"pseudo-Zernike R_{n}^{m_abs}")


def zernike_radial(n: int, m_abs: int, r, backend: str | None = None):
    """Zernike radial polynomial ``R_n^{|m|}(r)`` on ``0 <= r <= 1``."""
    coeffs = zernike_coefficients(n, m_abs)
    r_arr = np.asarray(r, dtype=np.float64)
    # sum_s c_s r^{n-2s} = r^{|m|} * poly(r^2) with descending coefficients
    val = _accel.horner(coeffs, r_arr * r_arr, backend=backend) * r_arr**m_abs
    return float(val) if val.ndim == 0 else val


def pseudo_zernike_radial(n: int, m_abs: int, r, backend: str | None = None):
    coeffs = pseudo_zernike_coefficients(n, m_abs)
    r_arr = np.asarray(r, dtype=np.float64)
    val = _accel.horner(coeffs, r_arr, backend=backend) * r_arr**m_abs
    return float(val) if val.ndim == 0 else val


def radial_factor(family: MomentFamily, n: int, m: int, r: np.ndarray) -> np.ndarray:
    kind = family.kind
    if kind == "zernike":
        return zernike_radial(n, abs(m), r)
    if kind == "pseudo_zernike":
        return pseudo_zernike_radial(n, abs(m), r)
    if kind == "pct":
        return np.cos(np.pi * n * r * r)
    if kind == "pst":
        return np.sin(np.pi * n * r * r)
    return np.exp(2j * np.pi * n * r * r)


def _radial_key(family: MomentFamily, n: int, m: int):
    return (n, abs(m)) if family.kind in ("zernike", "pseudo_zernike") else n


# ---------------------------------------------------------- disk sampling


class DiskSampler:
    """Pixel centers of the inscribed disk mapped onto the unit disk.

    Each pixel contributes area ``1 / s^2`` in unit-disk units, where ``s`` is
    the disk radius in pixels.
    """

    def __init__(self, width: int, height: int | None = None):
        height = width if height is None else height
        cx, cy, s = disk_geometry(width, height)
        rows, cols = np.mgrid[0:height, 0:width].astype(np.float64)
        x = (cols - cx) / s
        y = (cy - rows) / s
        r = np.hypot(x, y)
        self.mask = disk_mask(width, height)
        self.width, self.height = width, height
        self.r = r[self.mask]
        self.theta = np.arctan2(y[self.mask], x[self.mask])
        self.pixel_area = 1.0 / (s * s)
        self._radial: dict = {}
        self._angular: dict = {}

    def angular(self, m: int) -> np.ndarray:
        if m not in self._angular:
            self._angular[m] = np.exp(1j * m * self.theta)
        return self._angular[m]

    def radial(self, family: MomentFamily, n: int, m: int) -> np.ndarray:
        key = (family.kind, _radial_key(family, n, m))
        if key not in self._radial:
            self._radial[key] = radial_factor(family, n, m, self.r)
        return self._radial[key]

    def basis(self, family: MomentFamily, n: int, m: int) -> np.ndarray:
        return self.radial(family, n, m) * self.angular(m)

    def clear(self) -> None:
        self._radial.clear()


def _family(family) -> MomentFamily:
    return family if isinstance(family, MomentFamily) else MomentFamily(family)


def compute_moments(img: GrayImage, family, C: int, sampler: DiskSampler | None = None) -> list[tuple[KernelIndex, complex]]:
    """Project the image onto every admitted basis function of ``family``.

    ``moment = normalization * sum_{pixels in disk} f * conj(V) * pixel_area``.
    Raises :class:`PrecisionLossError` when factorial terms overflow.
    """
    family = _family(family)
    if C < 0:
        raise ValueError("C must be non-negative")
    sampler = sampler or DiskSampler(img.width, img.height)
    f = np.asarray(img.pixels)[sampler.mask]
    out = []
    last_n = None
    for idx in family.indices(C):
        if idx.n != last_n:
            # canonical order visits every radial key of one n together
            sampler.clear()
            last_n = idx.n
        v = sampler.basis(family, idx.n, idx.m)
        moment = family.normalization(idx.n) * sampler.pixel_area * np.dot(f, np.conj(v))
        out.append((idx, complex(moment)))
    return out


def reconstruct_from_moments(
    moments: Sequence[tuple[KernelIndex, complex]], family, size: int, sampler: DiskSampler | None = None
) -> GrayImage:
    """``sum moment * V`` over the disk (real part); exterior is 0."""
    family = _family(family)
    sampler = sampler or DiskSampler(size, size)
    acc = np.zeros(sampler.r.shape, dtype=np.complex128)
    last_n = None
    for (n, m), a in moments:
        if n != last_n:
            sampler.clear()
            last_n = n
        acc += a * sampler.basis(family, n, m)
    out = np.zeros((sampler.height, sampler.width))
    out[sampler.mask] = acc.real
    return GrayImage(out, (0.0, 1.0))


def reconstruction_sweep(img: GrayImage, family, C_values: Iterable[int]) -> dict[int, GrayImage | None]:
    """Reconstructions at several C from a single pass over the basis.

    Index sets are nested in C, so contributions are accumulated level by
    level and snapshotted at each requested C. A C whose terms or running
    sum overflow maps to ``None``, as do all larger ones.
    """
    family = _family(family)
    wanted = sorted(set(int(c) for c in C_values))
    if not wanted:
        return {}
    sampler = DiskSampler(img.width, img.height)
    f = np.asarray(img.pixels)[sampler.mask]
    by_level: dict[int, list[KernelIndex]] = {}
    for idx in family.indices(wanted[-1]):
        by_level.setdefault(family.level(idx.n, idx.m), []).append(idx)

    acc = np.zeros(sampler.r.shape, dtype=np.complex128)
    results: dict[int, GrayImage | None] = {}
    level = -1
    try:
        for C in wanted:
            while level < C:
                level += 1
                with np.errstate(over="ignore", invalid="ignore"):
                    for n, m in by_level.get(level, ()):
                        v = sampler.basis(family, n, m)
                        a = family.normalization(n) * sampler.pixel_area * np.dot(f, np.conj(v))
                        acc += a * v
                sampler.clear()
                if not np.all(np.isfinite(acc)):
                    raise PrecisionLossError(f"{family.kind}: reconstruction overflows float64 at C={level}")
            out = np.zeros((sampler.height, sampler.width))
            out[sampler.mask] = acc.real
            results[C] = GrayImage(out, (0.0, 1.0))
    except PrecisionLossError:
        for C in wanted:
            results.setdefault(C, None)
    return results


def design_matrix(size: int, family, C: int) -> np.ndarray:
    """Basis values at the disk pixel centers: one row per admitted index."""
    family = _family(family)
    sampler = DiskSampler(size, size)
    rows = []
    for n, m in family.indices(C):
        rows.append(sampler.basis(family, n, m))
    sampler.clear()
    return np.array(rows)


def largest_C_for_count(family, target: int, c_max: int = 1000) -> int | None:
    """Largest C whose index count does not exceed ``target`` (None if even C=0 does)."""
    family = _family(family)
    best = None
    for C in range(c_max + 1):
        if family.count(C) > target:
            break
        best = C
    return best
