import numpy as np
import pytest

from conftest import random_polar
from psept import transform as tf
from psept.bases import KernelIndex, build_kernel_matrix, full_index_set, kernel, radial_matrix
from psept.polar_grid import PolarImage, build_grid


def _kernel_image(grid, n, m):
    return np.array([[kernel(KernelIndex(n, m), k, j, grid) for k in range(grid.n_r)] for j in range(grid.n_theta)])


class TestForward:
    def test_constant(self):
        grid = build_grid(8, 8)
        c = tf.forward(PolarImage(grid, np.ones(grid.shape)))
        assert c[0, 0] == pytest.approx(8.0, abs=1e-12)
        rest = c.values.copy()
        rest[0, c.column(0)] = 0
        assert np.max(np.abs(rest)) <= 1e-12

    def test_real_kernel_projection(self):
        grid = build_grid(8, 8)
        # K_{1,0} is real, so it is its own real part
        c = tf.forward(PolarImage(grid, _kernel_image(grid, 1, 0).real))
        assert c[1, 0] == pytest.approx(1.0, abs=1e-12)
        rest = c.values.copy()
        rest[1, c.column(0)] = 0
        assert np.max(np.abs(rest)) <= 1e-12

    @pytest.mark.parametrize("n_r, n_theta", [(4, 8), (5, 6), (16, 32), (32, 32)])
    def test_matches_kernel_matrix(self, rng, n_r, n_theta):
        p = random_polar(rng, n_r, n_theta)
        grid = p.grid
        M = build_kernel_matrix(grid, full_index_set(grid))
        direct = M.conj() @ p.samples.ravel()
        assert np.max(np.abs(tf.forward(p).values.ravel() - direct)) <= 1e-12

    def test_matches_direct_sums(self, rng):
        p = random_polar(rng, 6, 10, complex_=True)
        assert np.max(np.abs(tf.forward(p).values - tf.forward_direct(p).values)) <= 1e-12

    def test_paper_literal_weights(self, rng):
        p = random_polar(rng, 4, 8)
        grid = p.grid
        M = build_kernel_matrix(grid, full_index_set(grid))
        g = p.samples * grid.weights[None, :]
        direct = (M.conj() @ g.ravel()) / 32
        lit = tf.forward(p, tf.PAPER_LITERAL)
        assert lit.convention == tf.PAPER_LITERAL
        assert np.max(np.abs(lit.values.ravel() - direct)) <= 1e-14
        with pytest.raises(ValueError):
            tf.inverse(lit)
        with pytest.raises(ValueError):
            tf.energy_spectral(lit)

    def test_rejects_non_finite(self):
        grid = build_grid(2, 2)
        with pytest.raises(ValueError):
            tf.forward(PolarImage(grid, [[np.nan, 0], [0, 0]]))

    def test_unknown_convention(self, rng):
        with pytest.raises(ValueError):
            tf.forward(random_polar(rng, 2, 2), "bogus")


class TestInverse:
    def test_constant(self):
        grid = build_grid(8, 8)
        vals = np.zeros((8, 8), complex)
        vals[0, 4] = 8.0
        out = tf.inverse(tf.CoefficientTable(grid, vals))
        assert np.max(np.abs(out.samples - 1.0)) <= 1e-12

    def test_round_trip(self, rng):
        p = random_polar(rng, 16, 32)
        assert np.max(np.abs(tf.inverse(tf.forward(p)).samples - p.samples)) <= 1e-12

    def test_structured_round_trip(self):
        grid = build_grid(12, 16)
        g = PolarImage(grid, _kernel_image(grid, 3, 2).real)
        assert np.max(np.abs(tf.inverse(tf.forward(g)).samples - g.samples)) <= 1e-12

    def test_matches_direct(self, rng):
        p = random_polar(rng, 5, 8, complex_=True)
        c = tf.forward(p)
        assert np.max(np.abs(tf.inverse(c).samples - tf.inverse_direct(c).samples)) <= 1e-12


class TestTruncate:
    def test_full_caps_drop_only_nyquist(self, rng):
        c = tf.forward(random_polar(rng, 4, 8))
        t = tf.truncate(c, 3, 3)
        np.testing.assert_array_equal(t.values[:, 1:], c.values[:, 1:])
        assert np.all(t.values[:, 0] == 0)

    def test_constant_unchanged(self):
        grid = build_grid(4, 8)
        c = tf.forward(PolarImage(grid, np.full(grid.shape, 2.0)))
        c = c.replace(np.where(np.abs(c.values) > 1e-13, c.values, 0))
        np.testing.assert_array_equal(tf.truncate(c, 0, 0).values, c.values)

    def test_energy_drops(self, rng):
        c = tf.forward(random_polar(rng, 6, 8))
        t = tf.truncate(c, 2, 1)
        assert tf.energy_spectral(t) < tf.energy_spectral(c)

    def test_caps_validated(self, rng):
        c = tf.forward(random_polar(rng, 4, 8))
        with pytest.raises(ValueError):
            tf.truncate(c, 4, 0)
        with pytest.raises(ValueError):
            tf.truncate(c, 0, 4)

    def test_error_non_increasing_in_caps(self):
        grid = build_grid(24, 48)
        x = grid.radii[None, :] * np.cos(grid.thetas[:, None])
        y = grid.radii[None, :] * np.sin(grid.thetas[:, None])
        g = PolarImage(grid, np.exp(-((x - 0.3) ** 2 + (y + 0.1) ** 2) / 0.1))
        c = tf.forward(g)
        errs = [np.linalg.norm(tf.inverse(tf.truncate(c, n, 12)).samples - g.samples) for n in range(24)]
        assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))
        errs = [np.linalg.norm(tf.inverse(tf.truncate(c, 23, m)).samples - g.samples) for m in range(24)]
        assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))


class TestRotation:
    def test_zero(self, rng):
        c = tf.forward(random_polar(rng, 4, 8))
        np.testing.assert_array_equal(tf.rotate_coefficients(c, 0.0).values, c.values)

    def test_half_turn(self, rng):
        c = tf.forward(random_polar(rng, 4, 8))
        r = tf.rotate_coefficients(c, np.pi)
        sign = (-1.0) ** np.arange(-4, 4)
        assert np.max(np.abs(r.values - c.values * sign)) <= 1e-14

    @pytest.mark.parametrize("delta", range(8))
    def test_grid_rotation_is_row_shift(self, rng, delta):
        p = random_polar(rng, 5, 8)
        c = tf.forward(p)
        rotated = tf.inverse(tf.rotate_coefficients(c, 2 * np.pi * delta / 8))
        assert np.max(np.abs(rotated.samples - p.shift_rows(delta).samples)) <= 1e-12


class TestEnergy:
    def test_constant(self):
        grid = build_grid(8, 8)
        p = PolarImage(grid, np.ones(grid.shape))
        assert tf.energy_spatial(p) == 64
        assert tf.energy_spectral(tf.forward(p)) == pytest.approx(64, rel=1e-14)

    def test_zero(self):
        grid = build_grid(3, 4)
        p = PolarImage(grid, np.zeros(grid.shape))
        assert tf.energy_spatial(p) == 0 == tf.energy_spectral(tf.forward(p))

    def test_parseval(self, rng):
        p = random_polar(rng, 16, 32)
        e = tf.energy_spatial(p)
        assert abs(e - tf.energy_spectral(tf.forward(p))) / e <= 1e-12

    def test_weighted(self):
        grid = build_grid(3, 2, 1.0)
        p = PolarImage(grid, np.ones(grid.shape))
        assert tf.weighted_energy(p) == pytest.approx(2 * (0 + 0.5 + 1.0))


class TestSerialization:
    def test_binary_round_trip(self, tmp_path, rng):
        c = tf.forward(random_polar(rng, 5, 6), tf.PAPER_LITERAL)
        tf.save_coefficients(c, tmp_path / "c.psept")
        back = tf.load_coefficients(tmp_path / "c.psept")
        assert back.grid == c.grid and back.convention == c.convention
        np.testing.assert_array_equal(back.values, c.values)

    def test_layout(self, tmp_path):
        grid = build_grid(2, 2, 0.5)
        vals = np.array([[1 + 2j, 3 + 4j], [5 + 6j, 7 + 8j]])
        tf.save_coefficients(tf.CoefficientTable(grid, vals), tmp_path / "c.psept")
        data = (tmp_path / "c.psept").read_bytes()
        assert data.startswith(b"PSEPT1\x02\x00\x00\x00\x02\x00\x00\x00\x03\x000.5\x0b\x00orthonormal")
        np.testing.assert_array_equal(np.frombuffer(data[-64:], "<f8"), np.arange(1, 9))

    def test_truncated_file(self, tmp_path, rng):
        c = tf.forward(random_polar(rng, 3, 4))
        tf.save_coefficients(c, tmp_path / "c.psept")
        (tmp_path / "d.psept").write_bytes((tmp_path / "c.psept").read_bytes()[:-5])
        with pytest.raises(ValueError):
            tf.load_coefficients(tmp_path / "d.psept")

    def test_csv(self, tmp_path):
        grid = build_grid(2, 2)
        tf.coefficients_to_csv(tf.CoefficientTable(grid, [[1, 2j], [3, 4]]), tmp_path / "c.csv")
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert lines[0] == "n,m,re,im"
        assert lines[1:3] == ["0,-1,1.0,0.0", "0,0,0.0,2.0"]


def test_radial_stage_uses_orthonormal_dct():
    # independent check of the first stage: scipy's DCT against the basis matrix
    import scipy.fft

    x = np.linspace(-1, 2, 9)
    np.testing.assert_allclose(scipy.fft.dct(x, type=2, norm="ortho"), radial_matrix(9) @ x, atol=1e-14)
