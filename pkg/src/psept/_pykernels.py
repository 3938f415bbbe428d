"""Pure-numpy twins of the routines in ``_kernels.pyx``.

Arithmetic order matches the compiled versions term for term.
"""

import numpy as np

EDGE_TOL = 1e-9


def bilinear_sample(img, xs, ys, fill):
    h, w = img.shape
    xmax = float(w - 1)
    ymax = float(h - 1)
    outside = (xs < -EDGE_TOL) | (ys < -EDGE_TOL) | (xs > xmax + EDGE_TOL) | (ys > ymax + EDGE_TOL)
    x = np.clip(xs, 0.0, xmax)
    y = np.clip(ys, 0.0, ymax)
    x0 = np.minimum(np.floor(x).astype(np.intp), w - 2)
    y0 = np.minimum(np.floor(y).astype(np.intp), h - 2)
    fx = x - x0
    fy = y - y0
    top = (1.0 - fx) * img[y0, x0] + fx * img[y0, x0 + 1]
    bot = (1.0 - fx) * img[y0 + 1, x0] + fx * img[y0 + 1, x0 + 1]
    out = (1.0 - fy) * top + fy * bot
    out[outside] = fill
    return out


def bilinear_sample_polar(samples, jf, kf):
    nt, nr = samples.shape
    k = np.clip(kf, 0.0, float(nr - 1))
    k0 = np.minimum(np.floor(k).astype(np.intp), nr - 2)
    fk = k - k0
    j = jf - nt * np.floor(jf / nt)
    j0 = np.minimum(np.floor(j).astype(np.intp), nt - 1)
    fj = j - j0
    j1 = j0 + 1
    j1[j1 == nt] = 0
    a = (1.0 - fk) * samples[j0, k0] + fk * samples[j0, k0 + 1]
    b = (1.0 - fk) * samples[j1, k0] + fk * samples[j1, k0 + 1]
    return (1.0 - fj) * a + fj * b


def horner(coeffs, x):
    if len(coeffs) == 0:
        return np.zeros_like(x)
    acc = np.full_like(x, coeffs[0])
    for c in coeffs[1:]:
        acc = acc * x + c
    return acc
