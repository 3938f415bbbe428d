"""Coefficient selection rules and feature vectors.

Orders are always ascending ``n`` then ascending ``m``. Magnitude features
sum over every angular order in the table and are laid out k-major:
``[F_0(1) .. F_nmax(1), F_0(2) .. F_nmax(2), ...]``.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bases import KernelIndex
from .transform import CoefficientTable

RULE_KINDS = ("pyramidal", "radial_with_parity", "radial", "pcet_weighted")

# CLI shorthands
RULE_ALIASES = {
    "pyramidal": "pyramidal",
    "zm": "radial_with_parity",
    "pzm": "radial",
    "pcet": "pcet_weighted",
    "radial_with_parity": "radial_with_parity",
    "radial": "radial",
    "pcet_weighted": "pcet_weighted",
}


@dataclass(frozen=True)
class SelectionRule:
    kind: str
    C: int

    def __post_init__(self):
        kind = RULE_ALIASES.get(self.kind)
        if kind is None:
            raise ValueError(f"unknown selection rule {self.kind!r}")
        if int(self.C) != self.C or self.C < 0:
            raise ValueError(f"C must be a non-negative integer, got {self.C}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "C", int(self.C))

    def admits(self, n: int, m: int) -> bool:
        C = self.C
        if self.kind == "pyramidal":
            return n >= 0 and n + abs(m) <= C
        if self.kind == "radial_with_parity":
            return 0 <= n <= C and abs(m) <= n and (n - abs(m)) % 2 == 0
        if self.kind == "radial":
            return 0 <= n <= C and abs(m) <= n
        return 2 * abs(n) + abs(m) <= C

    def indices(self, signed_n: bool = False) -> list[KernelIndex]:
        """Every admitted (n, m) in canonical order.

        ``signed_n`` only matters for ``pcet_weighted``, whose radial index
        may be negative.
        """
        C = self.C
        out = []
        n_lo = -(C // 2) if (signed_n and self.kind == "pcet_weighted") else 0
        for n in range(n_lo, C + 1):
            for m in range(-C, C + 1):
                if self.admits(n, m):
                    out.append(KernelIndex(n, m))
        return out

    def count(self, signed_n: bool = False) -> int:
        C = self.C
        if self.kind == "pyramidal":
            return (C + 1) ** 2
        if self.kind == "radial_with_parity":
            return (C + 1) * (C + 2) // 2
        if self.kind == "radial":
            return (C + 1) ** 2
        return len(self.indices(signed_n))


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True).ravel()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size


def select(coeffs: CoefficientTable, rule: SelectionRule, include_nyquist: bool = False) -> list[tuple[KernelIndex, complex]]:
    """Admitted coefficients of a table, in canonical order.

    Indices the grid cannot hold are skipped; the Nyquist order
    ``m = -n_theta/2`` is left out unless ``include_nyquist``.
    """
    if rule.kind in ("radial_with_parity", "radial", "pcet_weighted"):
        warnings.warn(f"applying {rule.kind!r} to a separable coefficient table", stacklevel=2)
    grid = coeffs.grid
    half = grid.n_theta // 2
    out = []
    for n in range(min(grid.n_r, rule.C + 1)):
        m_lo = -half if include_nyquist else -half + 1
        for m in range(max(m_lo, -rule.C), min(half - 1, rule.C) + 1):
            if rule.admits(n, m):
                out.append((KernelIndex(n, m), complex(coeffs.values[n, m + half])))
    return out


def selection_mask(grid, rule: SelectionRule, include_nyquist: bool = False) -> np.ndarray:
    """Boolean ``(n_r, n_theta)`` mask of admitted entries."""
    n = np.arange(grid.n_r)[:, np.newaxis]
    m = grid.m_values[np.newaxis, :]
    am = np.abs(m)
    if rule.kind == "pyramidal":
        keep = n + am <= rule.C
    elif rule.kind == "radial_with_parity":
        keep = (n <= rule.C) & (am <= n) & ((n - am) % 2 == 0)
    elif rule.kind == "radial":
        keep = (n <= rule.C) & (am <= n)
    else:
        keep = 2 * n + am <= rule.C
    if not include_nyquist:
        keep = keep & (m != -grid.n_theta // 2)
    return keep


def _power_mean(mags: np.ndarray, k: int) -> np.ndarray:
    # (sum |c|^{2k})^{1/2k}, scaled by the row maximum to avoid overflow
    top = mags.max(axis=-1)
    safe = np.where(top > 0, top, 1.0)
    ratio = mags / safe[..., np.newaxis]
    return np.where(top > 0, safe * np.sum(ratio ** (2 * k), axis=-1) ** (1.0 / (2 * k)), 0.0)


def magnitude_invariants(coeffs: CoefficientTable, n_max: int, k_max: int) -> FeatureVector:
    """Rotation-invariant power means ``F_n(k) = (sum_m |C[n,m]|^{2k})^{1/2k}``."""
    if not 0 <= n_max < coeffs.grid.n_r:
        raise ValueError(f"n_max={n_max} outside [0, {coeffs.grid.n_r})")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    mags = np.abs(coeffs.values[: n_max + 1])
    vals = np.concatenate([_power_mean(mags, k) for k in range(1, k_max + 1)])
    meta = {"kind": "magnitude_invariant", "n_max": n_max, "k_max": k_max, "ordering": "k-major, n ascending"}
    return FeatureVector(vals, meta)


def magnitude_vector(selected: Sequence[tuple[KernelIndex, complex]], meta=None) -> FeatureVector:
    """``|c|`` of each selected coefficient (used for the moment baselines)."""
    vals = np.abs(np.array([c for _, c in selected], dtype=np.complex128))
    return FeatureVector(vals, dict(meta or {}, kind="magnitude"))


def complex_parts(selected: Sequence[tuple[KernelIndex, complex]], meta=None) -> FeatureVector:
    """Interleave ``(re, im)`` of each selected coefficient."""
    c = np.array([v for _, v in selected], dtype=np.complex128)
    vals = np.empty(2 * c.size)
    vals[0::2] = c.real
    vals[1::2] = c.imag
    info = {"kind": "complex_parts", "ordering": "n asc, m asc; (re, im) pairs"}
    info.update(meta or {})
    return FeatureVector(vals, info)


@dataclass(frozen=True)
class ScalerState:
    mean: np.ndarray
    scale: np.ndarray


SCALE_FLOOR = 1e-12


def standard_scaler_fit(vectors) -> ScalerState:
    rows = [np.asarray(getattr(v, "values", v), dtype=np.float64).ravel() for v in vectors]
    if len(rows) < 2:
        raise ValueError("need at least two vectors to fit a scaler")
    if len({r.size for r in rows}) != 1:
        raise ValueError("feature vectors have mismatched lengths")
    x = np.vstack(rows)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    # constant dimensions scale to exactly zero
    std = np.where(std < SCALE_FLOOR, SCALE_FLOOR, std)
    return ScalerState(mean, std)


def standard_scaler_apply(state: ScalerState, v) -> FeatureVector:
    x = np.asarray(getattr(v, "values", v), dtype=np.float64).ravel()
    if x.size != state.mean.size:
        raise ValueError(f"expected {state.mean.size} features, got {x.size}")
    meta = dict(getattr(v, "meta", {}) or {}, scaled=True)
    return FeatureVector((x - state.mean) / state.scale, meta)


# ------------------------------------------------------------- CSV bridge


def write_feature_csv(path, rows, meta: dict) -> None:
    """One row per image: ``path,label,f_0,f_1,...``.

    The first line is a ``#`` comment holding the JSON meta descriptor.
    """
    rows = list(rows)
    width = max((len(v) for _, _, v in rows), default=0)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["path", "label"] + [f"f_{i}" for i in range(width)])
        for p, label, vec in rows:
            vals = getattr(vec, "values", vec)
            w.writerow([p, label] + [repr(float(x)) for x in vals])


def read_feature_csv(path) -> tuple[dict, list[tuple[str, str, np.ndarray]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        meta = json.loads(first[1:]) if first.startswith("#") else {}
        reader = csv.reader(fh)
        next(reader)
        rows = [(r[0], r[1], np.array([float(x) for x in r[2:]])) for r in reader]
    return meta, rows
