"""Grayscale raster I/O and pixel-level preprocessing.

PGM (P2 ASCII and P5 binary, 8 or 16 bit) is read and written by hand so
that fixtures are bit-exact; PNG is read through Pillow.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _accel

__all__ = [
    "GrayImage",
    "ImageReadError",
    "UnreadableImageError",
    "HeaderParseError",
    "UnsupportedBitDepthError",
    "TruncatedDataError",
    "DegenerateRangeWarning",
    "load_image",
    "save_image",
    "read_pgm",
    "write_pgm",
    "luminance_grayscale",
    "clamp_warning_count",
    "normalize",
    "add_gaussian_noise",
    "rotate_image",
]


class ImageReadError(Exception):
    """Base class for failures while decoding an image file."""


class UnreadableImageError(ImageReadError):
    pass


class HeaderParseError(ImageReadError):
    pass


class UnsupportedBitDepthError(ImageReadError):
    pass


class TruncatedDataError(ImageReadError):
    pass


class DegenerateRangeWarning(UserWarning):
    """Raised (as a warning) when normalizing from a zero-width range."""


@dataclass(frozen=True, eq=False)
class GrayImage:
    """A 2-D real raster with a declared value interval.

    ``pixels`` is stored as a read-only float64 array of shape
    ``(height, width)``; ``pixels.ravel()`` is the row-major sample list.
    """

    pixels: np.ndarray
    value_range: tuple[float, float] = (0.0, 1.0)
    flags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64, order="C", copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"pixels must be a non-empty 2-D array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)
        lo, hi = self.value_range
        object.__setattr__(self, "value_range", (float(lo), float(hi)))
        object.__setattr__(self, "flags", frozenset(self.flags))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def with_pixels(self, pixels, value_range=None) -> "GrayImage":
        return GrayImage(pixels, self.value_range if value_range is None else value_range)

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.value_range == other.value_range and np.array_equal(self.pixels, other.pixels)

    __hash__ = None


# ---------------------------------------------------------------- PGM codec


def _pgm_tokens(data: bytes, count: int, start: int) -> tuple[list[bytes], int, list[str]]:
    """Pull ``count`` whitespace-separated header tokens, skipping comments."""
    tokens: list[bytes] = []
    comments: list[str] = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i >= n:
            raise HeaderParseError("unexpected end of file in PGM header")
        if data[i : i + 1] == b"#":
            j = data.find(b"\n", i)
            j = n if j < 0 else j
            comments.append(data[i + 1 : j].decode("utf-8", "replace").strip())
            i = j
            continue
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        tokens.append(data[i:j])
        i = j
    return tokens, i, comments


def read_pgm(data: bytes) -> tuple[np.ndarray, int, list[str]]:
    """Decode a P2/P5 payload into (integer samples, maxval, header comments)."""
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise HeaderParseError(f"not a PGM file (magic {magic!r})")
    tokens, pos, comments = _pgm_tokens(data, 3, 2)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise HeaderParseError(f"bad PGM header fields {tokens!r}") from exc
    if width <= 0 or height <= 0:
        raise HeaderParseError(f"bad PGM dimensions {width}x{height}")
    if not 0 < maxval <= 65535:
        raise UnsupportedBitDepthError(f"PGM maxval {maxval} outside 1..65535")
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates header from raster
        pos += 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        nbytes = count * dtype.itemsize
        raw = data[pos : pos + nbytes]
        if len(raw) < nbytes:
            raise TruncatedDataError(f"expected {nbytes} raster bytes, found {len(raw)}")
        samples = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    else:
        body = data[pos:]
        lines = [ln.split(b"#", 1)[0] for ln in body.splitlines()]
        try:
            values = [int(t) for t in b" ".join(lines).split()]
        except ValueError as exc:
            raise HeaderParseError("non-integer sample in P2 raster") from exc
        if len(values) < count:
            raise TruncatedDataError(f"expected {count} samples, found {len(values)}")
        samples = np.asarray(values[:count], dtype=np.int64)

    if samples.size and samples.max() > maxval:
        raise HeaderParseError("sample value exceeds maxval")
    return samples.reshape(height, width), maxval, comments


def write_pgm(path, samples: np.ndarray, maxval: int, ascii: bool = False, comments=()) -> None:
    samples = np.asarray(samples)
    if samples.ndim != 2:
        raise ValueError("PGM raster must be 2-D")
    if not 0 < maxval <= 65535:
        raise UnsupportedBitDepthError(f"maxval {maxval} outside 1..65535")
    height, width = samples.shape
    header = [b"P2" if ascii else b"P5"]
    for c in comments:
        header.append(b"# " + str(c).encode("utf-8"))
    header.append(f"{width} {height}".encode())
    header.append(str(maxval).encode())
    head = b"\n".join(header) + b"\n"
    if ascii:
        rows = [" ".join(str(int(v)) for v in row) for row in samples]
        body = ("\n".join(rows) + "\n").encode()
    else:
        dtype = ">u2" if maxval > 255 else "u1"
        body = samples.astype(dtype).tobytes()
    Path(path).write_bytes(head + body)


def _quantize(img: GrayImage, maxval: int) -> np.ndarray:
    lo, hi = img.value_range
    span = hi - lo if hi > lo else 1.0
    scaled = (np.asarray(img.pixels) - lo) / span * maxval
    return np.clip(np.rint(scaled), 0, maxval).astype(np.int64)


def load_image(path, format: str | None = None) -> GrayImage:
    """Read a grayscale (or RGB) PGM/PNG file into a [0, 1] image.

    Samples are divided by the file's maximum sample value; RGB input is
    reduced with :func:`luminance_grayscale`.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise UnreadableImageError(f"cannot read {path}: {exc}") from exc

    if fmt in ("pgm", "pnm") or data[:2] in (b"P2", b"P5"):
        samples, maxval, _ = read_pgm(data)
        return GrayImage(samples / float(maxval), (0.0, 1.0))
    if fmt == "png" or data[:8] == b"\x89PNG\r\n\x1a\n":
        return _load_png(path)
    raise UnreadableImageError(f"unsupported image format {fmt!r}")


def _load_png(path: Path) -> GrayImage:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "P":
                im = im.convert("RGBA" if "transparency" in im.info else "RGB")
                mode = im.mode
            arr = np.asarray(im)
    except UnidentifiedImageError as exc:
        raise HeaderParseError(f"{path}: {exc}") from exc
    except (OSError, SyntaxError) as exc:
        raise TruncatedDataError(f"{path}: {exc}") from exc

    if mode in ("L", "LA"):
        gray = (arr[..., 0] if arr.ndim == 3 else arr) / 255.0
    elif mode in ("I;16", "I;16B", "I;16L", "I"):
        # Pillow exposes 16-bit PNGs as "I" or "I;16"
        gray = arr.astype(np.float64) / 65535.0
    elif mode in ("RGB", "RGBA"):
        rgb = arr[..., :3] / 255.0
        gray = luminance_grayscale(rgb[..., 0], rgb[..., 1], rgb[..., 2])
    else:
        raise UnsupportedBitDepthError(f"{path}: unsupported PNG mode {mode!r}")
    return GrayImage(gray, (0.0, 1.0))


def save_image(img: GrayImage, path, bit_depth: int = 8, ascii: bool = False, comments=()) -> None:
    """Write ``img`` as PGM, mapping its declared range onto 0..maxval."""
    if bit_depth not in (8, 16):
        raise UnsupportedBitDepthError(f"bit depth {bit_depth} not supported")
    maxval = 255 if bit_depth == 8 else 65535
    write_pgm(os.fspath(path), _quantize(img, maxval), maxval, ascii=ascii, comments=comments)


# ------------------------------------------------------------ pixel ops

_clamp_events = 0


def clamp_warning_count() -> int:
    """Number of luminance conversions that had to clamp an input channel."""
    return _clamp_events


def luminance_grayscale(r, g, b):
    """``0.299 r + 0.587 g + 0.114 b`` with channels clamped to [0, 1].

    Works on scalars and arrays alike.
    """
    global _clamp_events
    r, g, b = (np.asarray(c, dtype=np.float64) for c in (r, g, b))
    if any(((c < 0) | (c > 1)).any() for c in (r, g, b)):
        _clamp_events += 1
        r, g, b = (np.clip(c, 0.0, 1.0) for c in (r, g, b))
    y = 0.299 * r + 0.587 * g + 0.114 * b
    return float(y) if y.ndim == 0 else y


def normalize(img: GrayImage, target=(0.0, 1.0)) -> GrayImage:
    lo, hi = img.value_range
    tlo, thi = float(target[0]), float(target[1])
    if hi == lo:
        warnings.warn("degenerate source range; returning constant image", DegenerateRangeWarning, stacklevel=2)
        mid = np.full(img.shape, 0.5 * (tlo + thi))
        return GrayImage(mid, (tlo, thi), flags={"degenerate_range"})
    if (lo, hi) == (tlo, thi):
        return img
    out = tlo + (np.asarray(img.pixels) - lo) * ((thi - tlo) / (hi - lo))
    return GrayImage(np.clip(out, min(tlo, thi), max(tlo, thi)), (tlo, thi))


def add_gaussian_noise(img: GrayImage, sigma: float, seed: int) -> GrayImage:
    """Add i.i.d. N(0, sigma^2) noise and clamp to [0, 1].

    Draws come from numpy's PCG64 generator seeded with ``seed``, so output
    is reproducible across platforms.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    if sigma > 0.5:
        raise ValueError(f"sigma must be at most 0.5, got {sigma}")
    if sigma == 0:
        return img
    rng = np.random.Generator(np.random.PCG64(seed))
    noisy = np.asarray(img.pixels) + rng.normal(0.0, sigma, size=img.shape)
    return GrayImage(np.clip(noisy, 0.0, 1.0), img.value_range)


def rotate_image(img: GrayImage, angle_deg: float, fill: float = 0.0) -> GrayImage:
    """Rotate counterclockwise about the raster center with bilinear sampling.

    Angles are measured with the y axis pointing up the screen, so 90 degrees
    agrees with ``np.rot90``. Output pixels whose source falls outside the
    raster get ``fill``.
    """
    h, w = img.shape
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    a = np.deg2rad(angle_deg)
    ca, sa = np.cos(a), np.sin(a)
    rows, cols = np.mgrid[0:h, 0:w].astype(np.float64)
    x = cols - cx
    y = cy - rows
    # inverse map: output point rotated by -angle gives the source point
    xs = ca * x + sa * y
    ys = -sa * x + ca * y
    out = _accel.bilinear_sample(img.pixels, xs + cx, cy - ys, fill)
    return GrayImage(out, img.value_range)
