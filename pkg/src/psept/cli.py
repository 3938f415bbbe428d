"""Command-line entry point and experiment harness.

Every command writes into one output directory::

    config.json   effective configuration (re-loadable with --config)
    results.csv   deterministic result rows
    timings.csv   wall-clock sidecar (never part of results.csv)
    run.log       timestamps
    images/       optional PGM renders

Exit status: 0 success, 1 a validation check failed, 2 bad configuration
or input.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _accel
from . import baselines as bl
from . import features as ft
from . import image_io as iio
from . import metrics as mt
from . import polar_grid as pg
from . import synthetic
from . import transform as tf
from .bases import build_kernel_matrix, full_index_set, radial_matrix, angular_matrix, MAX_MATRIX_SIZE

COMMANDS = (
    "validate",
    "transform",
    "reconstruct",
    "kernels",
    "features",
    "bench-reconstruction",
    "bench-rotation",
    "bench-noise",
    "compare",
)

METHODS = ("psept", "zernike", "pzernike", "pct", "pst", "pcet")

_METHOD_FAMILY = {"zernike": "zernike", "pzernike": "pseudo_zernike", "pct": "pct", "pst": "pst", "pcet": "pcet"}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = "validate"
    inputs: list = field(default_factory=list)
    n_r: int | None = None
    n_theta: int | None = None
    r_max: float = pg.DEFAULT_R_MAX
    convention: str = tf.ORTHONORMAL
    rule: str = "pyramidal"
    C: int = 8
    c_values: list = field(default_factory=lambda: list(range(3, 16)))
    angles: list = field(default_factory=lambda: [0.0, 15.0, 30.0, 45.0, 60.0, 90.0])
    sigmas: list = field(default_factory=lambda: [0.0, 0.02, 0.04, 0.06, 0.08, 0.1])
    seeds: list = field(default_factory=lambda: [42, 123, 456, 789, 999])
    feature_targets: list = field(
        default_factory=lambda: [int(t) for t in np.unique(np.rint(np.geomspace(50, 6000, 15)).astype(int))]
    )
    reference_C: list = field(default_factory=lambda: [20])
    methods: list = field(default_factory=lambda: list(METHODS))
    feature_kind: str = "complex"
    n_max: int = 10
    k_max: int = 3
    include_nyquist: bool = False
    peak: float = 1.0
    size: int = 128
    kernel_n: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    kernel_m: list = field(default_factory=lambda: [-4, -3, -2, -1, 0, 1, 2, 3, 4])
    trials: int = 20
    write_images: bool = False
    workers: int = 1
    out: str = "psept_out"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


# ------------------------------------------------------------- arguments


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            start, stop = bits[0], bits[1]
            step = bits[2] if len(bits) > 2 else 1
            out.extend(range(start, stop + 1, step))
        elif part:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    out: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            bits = [float(b) for b in part.split(":")]
            start, stop = bits[0], bits[1]
            step = bits[2] if len(bits) > 2 else 1.0
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            out.extend(start + i * step for i in range(count))
        elif part:
            out.append(float(part))
    return out


def _str_list(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS, allow_abbrev=False)
    g = p.add_argument_group("grid and selection")
    g.add_argument("--nr", dest="n_r", type=int, help="radial sample count")
    g.add_argument("--ntheta", dest="n_theta", type=int, help="angular sample count (even)")
    g.add_argument("--rmax", dest="r_max", type=float, help="outermost radius as a fraction of the disk")
    g.add_argument("--convention", choices=tf.CONVENTIONS)
    g.add_argument("--rule", choices=sorted(ft.RULE_ALIASES), help="coefficient selection rule")
    g.add_argument("--C", dest="C", type=int, help="complexity parameter of the selection rule")
    g.add_argument("--seeds", type=_int_list, help="comma-separated seeds")
    g.add_argument("--out", help="output directory")
    g.add_argument("--config", dest="config_file", help="JSON config file; flags override it")
    g.add_argument("--workers", type=int, help="worker processes for per-image work")
    return p


def build_parser() -> argparse.ArgumentParser:
    parent = _global_flags()
    parser = argparse.ArgumentParser(
        prog="psept", description=__doc__.splitlines()[0], parents=[parent], allow_abbrev=False
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({_accel.BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        sp = sub.add_parser(
            name, help=help_text, parents=[parent], argument_default=argparse.SUPPRESS, allow_abbrev=False
        )
        return sp

    def inputs(sp, required=True):
        sp.add_argument("inputs", nargs="+" if required else "*", metavar="IMAGE",
                        help="PGM/PNG files, or synthetic:NAME[:SIZE] (NAME in blobs, scene, gaussian)")

    sp = add("validate", "orthogonality, round-trip, Parseval and rotation checks")
    sp.add_argument("--trials", type=int)

    sp = add("transform", "forward transform of images to coefficient files")
    inputs(sp)

    sp = add("reconstruct", "truncated reconstruction from an image or a .psept file")
    inputs(sp)
    sp.add_argument("--size", type=int, help="render size for .psept inputs")
    sp.add_argument("--peak", type=float)

    sp = add("kernels", "render the kernel gallery as PGM files")
    sp.add_argument("--kernel-n", dest="kernel_n", type=_int_list, help="radial orders, e.g. 0:4")
    sp.add_argument("--kernel-m", dest="kernel_m", type=_int_list, help="angular orders, e.g. -4:4")
    sp.add_argument("--size", type=int)

    sp = add("features", "feature CSV for external classifiers")
    inputs(sp)
    sp.add_argument("--methods", type=_str_list)
    sp.add_argument("--kind", dest="feature_kind", choices=("complex", "magnitude"))
    sp.add_argument("--n-max", dest="n_max", type=int)
    sp.add_argument("--k-max", dest="k_max", type=int)
    sp.add_argument("--include-nyquist", dest="include_nyquist", action="store_true")

    sp = add("bench-reconstruction", "RMSE/PSNR versus feature count for every method")
    inputs(sp)
    sp.add_argument("--methods", type=_str_list)
    sp.add_argument("--targets", dest="feature_targets", type=_int_list)
    sp.add_argument("--reference-C", dest="reference_C", type=_int_list)
    sp.add_argument("--peak", type=float)
    sp.add_argument("--write-images", dest="write_images", action="store_true")

    sp = add("bench-rotation", "magnitude-feature distance under image rotation")
    inputs(sp)
    sp.add_argument("--methods", type=_str_list)
    sp.add_argument("--angles", type=_float_list, help="degrees, e.g. 0:360:1")
    sp.add_argument("--n-max", dest="n_max", type=int)
    sp.add_argument("--k-max", dest="k_max", type=int)

    sp = add("bench-noise", "complex features of noise-perturbed images")
    inputs(sp)
    sp.add_argument("--methods", type=_str_list)
    sp.add_argument("--sigmas", type=_float_list)
    sp.add_argument("--include-nyquist", dest="include_nyquist", action="store_true")

    sp = add("compare", "feature counts and reconstruction error per method over a C range")
    inputs(sp)
    sp.add_argument("--methods", type=_str_list)
    sp.add_argument("--C-values", dest="c_values", type=_int_list)
    sp.add_argument("--peak", type=float)
    return parser


def resolve_config(argv=None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    data: dict = {}
    cfg_file = ns.pop("config_file", None)
    if cfg_file:
        try:
            data.update(json.loads(Path(cfg_file).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {cfg_file}: {exc}") from exc
    data.update(ns)
    cfg = RunConfig.from_dict(data)
    _check_config(cfg)
    return cfg


def _check_config(cfg: RunConfig) -> None:
    if cfg.n_theta is not None and cfg.n_theta % 2:
        raise ConfigError(f"--ntheta must be even, got {cfg.n_theta}")
    if cfg.n_r is not None and cfg.n_r < 2:
        raise ConfigError(f"--nr must be at least 2, got {cfg.n_r}")
    if not 0 < cfg.r_max <= 1:
        raise ConfigError(f"--rmax must lie in (0, 1], got {cfg.r_max}")
    bad = [m for m in cfg.methods if m not in METHODS]
    if bad:
        raise ConfigError(f"unknown methods {bad}; choose from {list(METHODS)}")
    if cfg.C < 0:
        raise ConfigError("--C must be non-negative")
    if any(s < 0 or s > 0.5 for s in cfg.sigmas):
        raise ConfigError("noise sigmas must lie in [0, 0.5]")


# ----------------------------------------------------------- run context


class Run:
    """Output directory bookkeeping for one command."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = Path(cfg.out)
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / "config.json").write_text(cfg.to_json() + "\n", encoding="utf-8")
        self.timings: list[list] = []
        self._log = open(self.out / "run.log", "a", encoding="utf-8")
        self.log(f"start {cfg.command} backend={_accel.BACKEND}")

    def log(self, msg: str) -> None:
        self._log.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} {msg}\n")
        self._log.flush()

    def time(self, key: tuple, ms: float) -> None:
        self.timings.append([*key, f"{ms:.3f}"])

    def write_results(self, header, rows, name="results.csv") -> Path:
        path = self.out / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
        return path

    def close(self, timing_header=None) -> None:
        if self.timings:
            hdr = list(timing_header or [f"key_{i}" for i in range(len(self.timings[0]) - 1)]) + ["wall_ms"]
            self.write_results(hdr, self.timings, name="timings.csv")
        self.log("done")
        self._log.close()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, (np.floating,)):
        return _fmt(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return "" if v is None else str(v)


def _load_input(source: str) -> tuple[str, str, iio.GrayImage]:
    """(name, label, image) for a file path or ``synthetic:NAME[:SIZE]``."""
    if source.startswith("synthetic:"):
        parts = source.split(":")
        size = int(parts[2]) if len(parts) > 2 else 64
        return source, parts[1], synthetic.make(parts[1], size)
    path = Path(source)
    try:
        img = iio.load_image(path)
    except iio.ImageReadError as exc:
        raise ConfigError(str(exc)) from exc
    return source, path.parent.name, img


def _grid_for(cfg: RunConfig, img: iio.GrayImage) -> pg.PolarGrid:
    d = pg.default_grid(img.width, img.height, cfg.r_max)
    return pg.PolarGrid(cfg.n_r or d.n_r, cfg.n_theta or d.n_theta, cfg.r_max)


def _stem(source: str) -> str:
    if source.startswith("synthetic:"):
        return source.replace(":", "_")
    return Path(source).stem


def _pool_map(fn, items, workers: int):
    items = list(items)
    if workers and workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def _psept_reconstruct(coeffs: tf.CoefficientTable, keep, width: int, height: int) -> iio.GrayImage:
    rec = tf.inverse(tf.mask_coefficients(coeffs, keep)).real()
    return pg.polar_to_cart(rec, width, height, fill=0.0, value_range=(0.0, 1.0))


def _psept_count(grid, rule: ft.SelectionRule, include_nyquist=False) -> int:
    return int(ft.selection_mask(grid, rule, include_nyquist).sum())


def _largest_psept_C(grid, rule_kind: str, target: int) -> int | None:
    best = None
    for C in range(0, grid.n_r + grid.n_theta):
        if _psept_count(grid, ft.SelectionRule(rule_kind, C)) > target:
            break
        best = C
        if C > 0 and _psept_count(grid, ft.SelectionRule(rule_kind, C)) == _psept_count(grid, ft.SelectionRule(rule_kind, C - 1)):
            break  # grid exhausted
    return best


# ---------------------------------------------------------------- commands


def cmd_validate(cfg: RunConfig) -> int:
    n_r, n_theta = cfg.n_r or 8, cfg.n_theta or 16
    if n_r * n_theta > MAX_MATRIX_SIZE:
        raise ConfigError(f"validation grid {n_r}x{n_theta} exceeds {MAX_MATRIX_SIZE} samples")
    try:
        grid = pg.build_grid(n_r, n_theta, cfg.r_max)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    run = Run(cfg)
    rng = np.random.Generator(np.random.PCG64(cfg.seeds[0] if cfg.seeds else 0))
    literal = cfg.convention == tf.PAPER_LITERAL
    checks = []

    def record(name, measured, tol, skipped=None):
        if skipped:
            checks.append({"check": name, "status": f"skipped: {skipped}", "measured": None, "tolerance": tol})
        else:
            ok = bool(measured <= tol)
            checks.append({"check": name, "status": "pass" if ok else "fail", "measured": float(measured), "tolerance": tol})

    t0 = time.perf_counter()
    kmat = build_kernel_matrix(grid, full_index_set(grid))
    record("orthogonality_error", mt.orthogonality_error(kmat @ kmat.conj().T), 1e-12)
    record("unitarity_error", mt.orthogonality_error(kmat.conj().T @ kmat), 1e-12)
    record("condition_number_minus_1", abs(mt.condition_number(kmat) - 1.0), 1e-10)
    images = [pg.PolarImage(grid, rng.random(grid.shape)) for _ in range(cfg.trials)]

    oracle = 0.0
    for p in images:
        g = p.samples * (grid.weights[np.newaxis, :] if literal else 1.0)
        direct = kmat.conj() @ g.ravel()
        if literal:
            direct = direct / (grid.n_r * grid.n_theta)
        oracle = max(oracle, float(np.max(np.abs(tf.forward(p, cfg.convention).values.ravel() - direct))))
    record("oracle_equivalence", oracle, 1e-12)

    if literal:
        record("round_trip", None, 1e-12, skipped="no inverse")
        record("parseval_relative", None, 1e-10, skipped="no inverse")
    else:
        rt = max(float(np.max(np.abs(tf.inverse(tf.forward(p)).samples - p.samples))) for p in images)
        record("round_trip", rt, 1e-12)
        pv = max(abs(tf.energy_spatial(p) - tf.energy_spectral(tf.forward(p))) / tf.energy_spatial(p) for p in images)
        record("parseval_relative", pv, 1e-10)

    cov = 0.0
    p = images[0]
    base = tf.forward(p, cfg.convention)
    for delta in range(grid.n_theta):
        shifted = tf.forward(p.shift_rows(delta), cfg.convention)
        expect = tf.rotate_coefficients(base, 2 * np.pi * delta / grid.n_theta)
        cov = max(cov, float(np.max(np.abs(shifted.values - expect.values))))
    record("rotation_covariance", cov, 1e-12)
    run.time(("all",), (time.perf_counter() - t0) * 1e3)

    failed = any(c["status"] == "fail" for c in checks)
    report = {
        "grid": {"n_r": n_r, "n_theta": n_theta, "r_max": cfg.r_max},
        "convention": cfg.convention,
        "checks": checks,
        "passed": not failed,
    }
    (run.out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    run.write_results(
        ["check", "status", "measured", "tolerance"],
        [[c["check"], c["status"], c["measured"], c["tolerance"]] for c in checks],
    )
    for c in checks:
        print(f"{c['check']:28s} {c['status']:20s} {c['measured']}")
    run.close(["stage"])
    return 1 if failed else 0


def cmd_transform(cfg: RunConfig) -> int:
    run = Run(cfg)
    rows = []
    for source in cfg.inputs:
        name, _, img = _load_input(source)
        grid = _grid_for(cfg, img)
        t0 = time.perf_counter()
        polar = pg.cart_to_polar(img, grid)
        coeffs = tf.forward(polar, cfg.convention)
        run.time((name,), (time.perf_counter() - t0) * 1e3)
        stem = _stem(source)
        tf.save_coefficients(coeffs, run.out / f"{stem}.psept")
        tf.coefficients_to_csv(coeffs, run.out / f"{stem}_coeffs.csv")
        spectral = tf.energy_spectral(coeffs) if cfg.convention == tf.ORTHONORMAL else None
        rows.append([name, grid.n_r, grid.n_theta, cfg.convention, tf.energy_spatial(polar), spectral, f"{stem}.psept"])
    run.write_results(["image", "n_r", "n_theta", "convention", "energy_spatial", "energy_spectral", "coefficients"], rows)
    run.close(["image"])
    return 0


def cmd_reconstruct(cfg: RunConfig) -> int:
    run = Run(cfg)
    (run.out / "images").mkdir(exist_ok=True)
    rule = ft.SelectionRule(cfg.rule, cfg.C)
    rows = []
    for source in cfg.inputs:
        original = None
        if source.endswith(".psept"):
            coeffs = tf.load_coefficients(source)
            width = height = cfg.size
        else:
            _, _, original = _load_input(source)
            coeffs = tf.forward(pg.cart_to_polar(original, _grid_for(cfg, original)))
            width, height = original.width, original.height
        if coeffs.convention != tf.ORTHONORMAL:
            raise ConfigError(f"{source}: cannot reconstruct from {coeffs.convention} coefficients")
        keep = ft.selection_mask(coeffs.grid, rule, cfg.include_nyquist)
        t0 = time.perf_counter()
        rec = _psept_reconstruct(coeffs, keep, width, height)
        run.time((source,), (time.perf_counter() - t0) * 1e3)
        out_name = f"images/{_stem(source)}_{rule.kind}_C{rule.C}.pgm"
        iio.save_image(iio.GrayImage(np.clip(rec.pixels, 0, 1), (0.0, 1.0)), run.out / out_name, bit_depth=16)
        if original is not None:
            q = mt.quality_report(original, rec, peak=cfg.peak, disk_only=True)
            rows.append([source, rule.kind, rule.C, int(keep.sum()), q.rmse, q.psnr, q.max_abs, q.n_pixels, out_name])
        else:
            rows.append([source, rule.kind, rule.C, int(keep.sum()), None, None, None, None, out_name])
    run.write_results(["input", "rule", "C", "n_coeffs", "rmse", "psnr_db", "max_abs", "n_pixels", "image"], rows)
    run.close(["input"])
    return 0


def kernel_samples(grid: pg.PolarGrid, n: int, m: int) -> np.ndarray:
    """``K_{n,m}`` on the lattice as an (n_theta, n_r) complex array."""
    phi = radial_matrix(grid.n_r)[n]
    psi = angular_matrix(grid.n_theta)[m + grid.n_theta // 2]
    return psi[:, np.newaxis] * phi[np.newaxis, :]


def cmd_kernels(cfg: RunConfig) -> int:
    grid = pg.build_grid(cfg.n_r or 64, cfg.n_theta or 256, cfg.r_max)
    run = Run(cfg)
    index = {}
    rows = []
    for n in cfg.kernel_n:
        for m in cfg.kernel_m:
            if not (0 <= n < grid.n_r and -grid.n_theta // 2 <= m < grid.n_theta // 2):
                raise ConfigError(f"kernel index ({n}, {m}) outside the grid")
            k = kernel_samples(grid, n, m)
            for part, arr in (("re", k.real), ("im", k.imag)):
                polar = pg.PolarImage(grid, arr)
                img = pg.polar_to_cart(polar, cfg.size, cfg.size, fill=0.0)
                amp = float(np.max(np.abs(arr)))
                amp = amp if amp > 0 else 1.0
                name = f"K_{n}_{m}_{part}.pgm"
                iio.save_image(iio.GrayImage(img.pixels, (-amp, amp)), run.out / name, bit_depth=16)
                index[name] = {"n": n, "m": m, "part": part, "range": [-amp, amp]}
                angular_var = float(np.max(np.var(arr, axis=0)))
                rows.append([name, n, m, part, -amp, amp, angular_var])
    (run.out / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    run.write_results(["file", "n", "m", "part", "lo", "hi", "max_variance_over_angle"], rows)
    run.close()
    return 0


def _method_features(method: str, img: iio.GrayImage, cfg: RunConfig, kind: str):
    """Feature vector of one image for one method."""
    if method == "psept":
        grid = _grid_for(cfg, img)
        coeffs = tf.forward(pg.cart_to_polar(img, grid))
        if kind == "magnitude":
            return ft.magnitude_invariants(coeffs, min(cfg.n_max, grid.n_r - 1), cfg.k_max)
        rule = ft.SelectionRule(cfg.rule, cfg.C)
        sel = [(i, c) for i, c in _select_quiet(coeffs, rule, cfg.include_nyquist)]
        return ft.complex_parts(sel, {"rule": rule.kind, "C": rule.C})
    family = bl.MomentFamily(_METHOD_FAMILY[method])
    moments = bl.compute_moments(img, family, cfg.C)
    if kind == "magnitude":
        return ft.magnitude_vector(moments, {"family": family.kind, "C": cfg.C})
    return ft.complex_parts(moments, {"family": family.kind, "C": cfg.C})


def _select_quiet(coeffs, rule, include_nyquist):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ft.select(coeffs, rule, include_nyquist)


def _feature_meta(method: str, cfg: RunConfig, kind: str) -> dict:
    meta = {"method": method, "kind": "magnitude_invariant" if kind == "magnitude" and method == "psept" else kind}
    if method == "psept":
        if kind == "magnitude":
            meta.update(n_max=cfg.n_max, k_max=cfg.k_max, ordering="k-major, n ascending")
        else:
            meta.update(rule=ft.SelectionRule(cfg.rule, cfg.C).kind, C=cfg.C, ordering="n asc, m asc; (re, im) pairs",
                        include_nyquist=cfg.include_nyquist)
    else:
        meta.update(rule=bl.MomentFamily(_METHOD_FAMILY[method]).rule(cfg.C).kind, C=cfg.C, ordering="n asc, m asc")
    return meta


def cmd_features(cfg: RunConfig) -> int:
    run = Run(cfg)
    methods = cfg.methods if cfg.methods != list(METHODS) else ["psept"]
    loaded = [_load_input(s) for s in cfg.inputs]
    rows = []
    for method in methods:
        feats = []
        for name, label, img in loaded:
            t0 = time.perf_counter()
            vec = _method_features(method, img, cfg, cfg.feature_kind)
            run.time((method, name), (time.perf_counter() - t0) * 1e3)
            feats.append((name, label, vec))
        fname = f"features_{method}.csv"
        ft.write_feature_csv(run.out / fname, feats, _feature_meta(method, cfg, cfg.feature_kind))
        rows.append([method, cfg.feature_kind, len(feats), len(feats[0][2]) if feats else 0, fname])
    run.write_results(["method", "kind", "n_images", "n_features", "file"], rows)
    run.close(["method", "image"])
    return 0


def _recon_item(args):
    source, cfg_dict = args
    cfg = RunConfig.from_dict(cfg_dict)
    name, _, img = _load_input(source)
    rows, times, images = [], [], []
    for method in cfg.methods:
        if method == "psept":
            grid = _grid_for(cfg, img)
            t0 = time.perf_counter()
            coeffs = tf.forward(pg.cart_to_polar(img, grid))
            base_ms = (time.perf_counter() - t0) * 1e3
            plan = [(t, _largest_psept_C(grid, "pyramidal", t)) for t in cfg.feature_targets]
            plan += [("ref", c) for c in cfg.reference_C]
            for target, C in plan:
                if C is None:
                    rows.append([name, method, target, None, 0, None, None, "target_too_small"])
                    continue
                rule = ft.SelectionRule("pyramidal", C)
                keep = ft.selection_mask(grid, rule)
                t0 = time.perf_counter()
                rec = _psept_reconstruct(coeffs, keep, img.width, img.height)
                times.append([name, method, target, C, base_ms + (time.perf_counter() - t0) * 1e3])
                q = mt.quality_report(img, rec, peak=cfg.peak, disk_only=True)
                rows.append([name, method, target, C, int(keep.sum()), q.rmse, q.psnr, "ok"])
                images.append((f"{_stem(source)}_{method}_C{C}.pgm", rec))
            continue
        family = bl.MomentFamily(_METHOD_FAMILY[method])
        plan = [(t, bl.largest_C_for_count(family, t)) for t in cfg.feature_targets]
        plan += [("ref", c) for c in cfg.reference_C]
        t0 = time.perf_counter()
        recs = bl.reconstruction_sweep(img, family, [c for _, c in plan if c is not None])
        sweep_ms = (time.perf_counter() - t0) * 1e3
        for target, C in plan:
            if C is None:
                rows.append([name, method, target, None, 0, None, None, "target_too_small"])
                continue
            rec = recs.get(C)
            if rec is None:
                rows.append([name, method, target, C, family.count(C), None, None, "overflow"])
                continue
            q = mt.quality_report(img, rec, peak=cfg.peak, disk_only=True)
            status = "ok" if math.isfinite(q.rmse) else "nonfinite"
            rows.append([name, method, target, C, family.count(C), q.rmse, q.psnr, status])
            images.append((f"{_stem(source)}_{method}_C{C}.pgm", rec))
        times.append([name, method, "sweep", None, sweep_ms])
    return rows, times, images if cfg.write_images else []


def cmd_bench_reconstruction(cfg: RunConfig) -> int:
    run = Run(cfg)
    results = _pool_map(_recon_item, [(s, cfg.to_dict()) for s in cfg.inputs], cfg.workers)
    rows, times = [], []
    method_rank = {m: i for i, m in enumerate(METHODS)}
    for r, t, images in results:
        rows.extend(r)
        times.extend(t)
        if images:
            (run.out / "images").mkdir(exist_ok=True)
            for fname, img in images:
                iio.save_image(iio.GrayImage(np.clip(np.nan_to_num(img.pixels), 0, 1)), run.out / "images" / fname)
    order = {t: i for i, t in enumerate(cfg.feature_targets)}
    rows.sort(key=lambda r: (r[0], method_rank[r[1]], order.get(r[2], len(order)), r[3] if r[3] is not None else -1))
    run.write_results(["image", "method", "target", "C", "feature_count", "rmse", "psnr_db", "status"], rows)
    for t in times:
        run.time(tuple(t[:-1]), t[-1])
    run.close(["image", "method", "target", "C"])
    return 0


def _rotation_item(args):
    source, cfg_dict = args
    cfg = RunConfig.from_dict(cfg_dict)
    name, _, img = _load_input(source)
    out = {}
    times = []
    for method in cfg.methods:
        t0 = time.perf_counter()
        base = _method_features(method, img, cfg, "magnitude")
        dists = []
        for angle in cfg.angles:
            rotated = iio.rotate_image(img, angle, fill=0.0) if angle != 0 else img
            dists.append(mt.euclidean_distance(base, _method_features(method, rotated, cfg, "magnitude"), normalize=True))
        out[method] = dists
        times.append([name, method, (time.perf_counter() - t0) * 1e3])
    return out, times


def cmd_bench_rotation(cfg: RunConfig) -> int:
    run = Run(cfg)
    results = _pool_map(_rotation_item, [(s, cfg.to_dict()) for s in cfg.inputs], cfg.workers)
    rows = []
    for method in cfg.methods:
        per_image = np.array([res[method] for res, _ in results])
        for a_idx, angle in enumerate(cfg.angles):
            col = per_image[:, a_idx]
            rows.append([method, float(angle), float(col.mean()), float(col.max())])
    for _, t in results:
        for item in t:
            run.time(tuple(item[:-1]), item[-1])
    run.write_results(["method", "angle_deg", "mean_feature_distance", "max_feature_distance"], rows)
    run.close(["image", "method"])
    return 0


def _noise_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def cmd_bench_noise(cfg: RunConfig) -> int:
    run = Run(cfg)
    (run.out / "features").mkdir(exist_ok=True)
    loaded = [_load_input(s) for s in cfg.inputs]
    rows = []
    for method in cfg.methods:
        clean = [_method_features(method, img, cfg, "complex") for _, _, img in loaded]
        meta = _feature_meta(method, cfg, "complex")
        for sigma in cfg.sigmas:
            for seed in cfg.seeds:
                t0 = time.perf_counter()
                feats = []
                for i, (name, label, img) in enumerate(loaded):
                    noisy = iio.add_gaussian_noise(img, sigma, _noise_seed(seed, i))
                    vec = clean[i] if sigma == 0 else _method_features(method, noisy, cfg, "complex")
                    feats.append((name, label, vec))
                fname = f"features/{method}_sigma{sigma:g}_seed{seed}.csv"
                ft.write_feature_csv(run.out / fname, feats, dict(meta, sigma=sigma))
                run.time((method, sigma, seed), (time.perf_counter() - t0) * 1e3)
                dist = float(np.mean([mt.euclidean_distance(c, f[2]) for c, f in zip(clean, feats)]))
                rows.append([method, float(sigma), int(seed), fname, len(feats[0][2]) if feats else 0, dist])
    run.write_results(["method", "sigma", "seed", "feature_csv", "n_features", "mean_distance_to_clean"], rows)
    run.close(["method", "sigma", "seed"])
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    run = Run(cfg)
    loaded = [_load_input(s) for s in cfg.inputs]
    rows = []
    for method in cfg.methods:
        for C in cfg.c_values:
            rmses, psnrs = [], []
            count = None
            t0 = time.perf_counter()
            status = "ok"
            for _, _, img in loaded:
                if method == "psept":
                    grid = _grid_for(cfg, img)
                    rule = ft.SelectionRule(cfg.rule, C)
                    keep = ft.selection_mask(grid, rule, cfg.include_nyquist)
                    count = int(keep.sum())
                    rec = _psept_reconstruct(tf.forward(pg.cart_to_polar(img, grid)), keep, img.width, img.height)
                else:
                    family = bl.MomentFamily(_METHOD_FAMILY[method])
                    count = family.count(C)
                    try:
                        rec = bl.reconstruct_from_moments(bl.compute_moments(img, family, C), family, img.width)
                    except bl.PrecisionLossError:
                        status = "overflow"
                        break
                q = mt.quality_report(img, rec, peak=cfg.peak, disk_only=True)
                rmses.append(q.rmse)
                psnrs.append(q.psnr)
            run.time((method, C), (time.perf_counter() - t0) * 1e3)
            rule_kind = ft.SelectionRule(cfg.rule, C).kind if method == "psept" else bl.MomentFamily(_METHOD_FAMILY[method]).rule(C).kind
            if status != "ok" or not rmses:
                rows.append([method, rule_kind, C, count, None, None, status])
            else:
                rows.append([method, rule_kind, C, count, float(np.mean(rmses)), float(np.mean(psnrs)), status])
    run.write_results(["method", "rule", "C", "feature_count", "mean_rmse", "mean_psnr_db", "status"], rows)
    run.close(["method", "C"])
    return 0


HANDLERS = {
    "validate": cmd_validate,
    "transform": cmd_transform,
    "reconstruct": cmd_reconstruct,
    "kernels": cmd_kernels,
    "features": cmd_features,
    "bench-reconstruction": cmd_bench_reconstruction,
    "bench-rotation": cmd_bench_rotation,
    "bench-noise": cmd_bench_noise,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        return HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"psept: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
