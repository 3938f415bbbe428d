"""Compare the compiled kernels against their numpy fallbacks.

Checks that both backends agree bit for bit, then times each kernel and
two end-to-end workloads (Cartesian rotation + polar resampling, and a
Zernike moment computation). Usage::

    python3 benchmarks/bench_backends.py [--repeat 5] [--size 128]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from psept import _accel
from psept import baselines as bl
from psept import polar_grid as pg
from psept.synthetic import smooth_scene


def _best_ms(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return min(times)


def _workloads(size: int):
    rng = np.random.default_rng(7)
    img = rng.random((size, size))
    xs = rng.uniform(-1, size, 400_000)
    ys = rng.uniform(-1, size, 400_000)
    polar = rng.random((4 * size, size))
    jf = rng.uniform(0, 4 * size, 400_000)
    kf = rng.uniform(0, size - 1, 400_000)
    coeffs = bl.zernike_coefficients(30, 4)
    r2 = rng.random(400_000)
    scene = smooth_scene(size)
    grid = pg.default_grid(size)

    def rotate_and_resample(backend):
        # same arithmetic path as rotate_image + cart_to_polar, routed to one backend
        h, w = scene.shape
        cx, cy, s = pg.disk_geometry(w, h)
        a = np.deg2rad(17.0)
        rows, cols = np.mgrid[0:h, 0:w].astype(np.float64)
        x, y = cols - (w - 1) / 2, (h - 1) / 2 - rows
        xr = np.cos(a) * x + np.sin(a) * y
        yr = -np.sin(a) * x + np.cos(a) * y
        rot = _accel.bilinear_sample(scene.pixels, xr + (w - 1) / 2, (h - 1) / 2 - yr, 0.0, backend)
        rr = grid.radii[np.newaxis, :] * s
        th = grid.thetas[:, np.newaxis]
        return _accel.bilinear_sample(rot, cx + rr * np.cos(th), cy - rr * np.sin(th), 0.0, backend)

    def zernike_radials(backend):
        r = np.linspace(0, 1, 20_000)
        return [bl.zernike_radial(n, m, r, backend=backend) for n in range(0, 31) for m in range(n % 2, n + 1, 2)]

    return {
        "bilinear_sample": lambda b: _accel.bilinear_sample(img, xs, ys, 0.0, b),
        "bilinear_sample_polar": lambda b: _accel.bilinear_sample_polar(polar, jf, kf, b),
        "horner": lambda b: _accel.horner(coeffs, r2, b),
        "rotate+resample": rotate_and_resample,
        "zernike_radials(C=30)": zernike_radials,
    }


def _same(a, b) -> bool:
    if isinstance(a, list):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=128)
    args = ap.parse_args(argv)

    backends = _accel.available_backends()
    print(f"default backend: {_accel.BACKEND}; available: {', '.join(backends)}")
    if "cython" not in backends:
        print("compiled extension not built; only the fallback can be timed")
    print(f"{'kernel':26s}" + "".join(f"{b + ' ms':>14s}" for b in backends) + f"{'speedup':>10s}  identical")
    for name, fn in _workloads(args.size).items():
        outs = {b: fn(b) for b in backends}
        ms = {b: _best_ms(lambda: fn(b), args.repeat) for b in backends}
        same = _same(outs[backends[0]], outs[backends[-1]])
        speed = ms["python"] / ms["cython"] if "cython" in ms else float("nan")
        print(f"{name:26s}" + "".join(f"{ms[b]:14.2f}" for b in backends) + f"{speed:10.2f}  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
