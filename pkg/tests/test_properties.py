"""Randomized invariants of the transform, features and metrics."""

import json

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from psept import features as ft
from psept import metrics as mt
from psept import transform as tf
from psept.bases import KernelIndex, build_kernel_matrix, full_index_set, kernel
from psept.cli import RunConfig
from psept.polar_grid import PolarGrid, PolarImage

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def polar_images(draw, max_r=12, max_half_theta=10, complex_=False):
    n_r = draw(st.integers(2, max_r))
    n_theta = 2 * draw(st.integers(1, max_half_theta))
    grid = PolarGrid(n_r, n_theta, draw(st.floats(0.1, 1.0)))
    g = draw(arrays(np.float64, grid.shape, elements=finite))
    if complex_:
        g = g + 1j * draw(arrays(np.float64, grid.shape, elements=finite))
    return PolarImage(grid, g)


def _scale(p):
    return max(1.0, float(np.max(np.abs(p.samples))))


@settings(max_examples=60, deadline=None)
@given(polar_images(complex_=True))
def test_round_trip(p):
    back = tf.inverse(tf.forward(p))
    assert np.max(np.abs(back.samples - p.samples)) <= 1e-12 * _scale(p) * 10


@settings(max_examples=60, deadline=None)
@given(polar_images())
def test_parseval(p):
    e = tf.energy_spatial(p)
    diff = abs(e - tf.energy_spectral(tf.forward(p)))
    assert diff <= 1e-10 * max(e, 1e-300) or e == 0


@settings(max_examples=40, deadline=None)
@given(polar_images(max_r=8, max_half_theta=8, complex_=True))
def test_fast_path_matches_kernel_matrix(p):
    M = build_kernel_matrix(p.grid, full_index_set(p.grid))
    direct = M.conj() @ p.samples.ravel()
    assert np.max(np.abs(tf.forward(p).values.ravel() - direct)) <= 1e-12 * _scale(p) * p.grid.n_r * 4


@settings(max_examples=60, deadline=None)
@given(polar_images(), st.data())
def test_shift_is_phase(p, data):
    delta = data.draw(st.integers(0, p.grid.n_theta - 1))
    c = tf.forward(p)
    s = tf.forward(p.shift_rows(delta))
    tol = 1e-12 * _scale(p) * 10
    assert np.max(np.abs(np.abs(s.values) - np.abs(c.values))) <= tol
    expect = tf.rotate_coefficients(c, 2 * np.pi * delta / p.grid.n_theta)
    assert np.max(np.abs(s.values - expect.values)) <= tol
    n_max = p.grid.n_r - 1
    a = ft.magnitude_invariants(c, n_max, 3).values
    b = ft.magnitude_invariants(s, n_max, 3).values
    assert np.max(np.abs(a - b)) <= tol


@settings(max_examples=60, deadline=None)
@given(polar_images())
def test_real_input_gives_conjugate_symmetric_table(p):
    c = tf.forward(p)
    half = p.grid.n_theta // 2
    for m in range(1, half):
        np.testing.assert_allclose(c.values[:, half - m], np.conj(c.values[:, half + m]), atol=1e-12 * _scale(p) * 10)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(1, 5), st.data())
def test_kernel_conjugate_symmetry(n_r, half, data):
    grid = PolarGrid(n_r, 2 * half)
    n = data.draw(st.integers(0, n_r - 1))
    m = data.draw(st.integers(-half + 1, half - 1))
    for k in range(n_r):
        for j in range(grid.n_theta):
            assert abs(kernel(KernelIndex(n, -m), k, j, grid) - np.conj(kernel(KernelIndex(n, m), k, j, grid))) <= 1e-15


@settings(max_examples=40, deadline=None)
@given(polar_images(max_r=10, max_half_theta=8), st.data())
def test_truncation_energy_non_increasing(p, data):
    c = tf.forward(p)
    n_star = data.draw(st.integers(0, p.grid.n_r - 1))
    m_star = data.draw(st.integers(0, p.grid.n_theta // 2 - 1))
    assert tf.energy_spectral(tf.truncate(c, n_star, m_star)) <= tf.energy_spectral(c) * (1 + 1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_rmse_is_a_metric(h, w, data):
    a, b, c = (data.draw(arrays(np.float64, (h, w), elements=st.floats(-10, 10))) for _ in range(3))
    assert mt.rmse(a, a) == 0
    assert mt.rmse(a, b) == mt.rmse(b, a)
    assert mt.rmse(a, c) <= mt.rmse(a, b) + mt.rmse(b, c) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_condition_number_unitary_invariance(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    k = mt.condition_number(A)
    if np.isfinite(k) and k < 1e6:
        assert abs(mt.condition_number(Q @ A) - k) <= 1e-8 * k


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["pyramidal", "radial_with_parity", "radial"]), st.integers(0, 30))
def test_selection_counts_closed_form(kind, C):
    rule = ft.SelectionRule(kind, C)
    brute = sum(rule.admits(n, m) for n in range(C + 1) for m in range(-C, C + 1))
    assert rule.count() == brute == len(rule.indices())


@settings(max_examples=40, deadline=None)
@given(
    st.builds(
        RunConfig,
        command=st.sampled_from(["validate", "compare", "bench-noise"]),
        inputs=st.lists(st.text(min_size=1, max_size=8), max_size=3),
        n_r=st.one_of(st.none(), st.integers(2, 64)),
        n_theta=st.one_of(st.none(), st.integers(1, 32).map(lambda x: 2 * x)),
        r_max=st.floats(0.01, 1.0),
        C=st.integers(0, 30),
        seeds=st.lists(st.integers(0, 2**31), max_size=4),
        sigmas=st.lists(st.floats(0, 0.5), max_size=4),
        angles=st.lists(st.floats(-360, 360), max_size=4),
        workers=st.integers(1, 8),
    )
)
def test_run_config_json_round_trip(cfg):
    assert RunConfig.from_json(cfg.to_json()) == cfg
    assert json.loads(cfg.to_json())["C"] == cfg.C
