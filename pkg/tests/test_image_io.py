import warnings

import numpy as np
import pytest
from PIL import Image

from psept import image_io as iio
from psept.image_io import GrayImage
from psept.polar_grid import disk_mask
from psept.synthetic import smooth_blobs


def _p5(w, h, maxval, samples):
    dtype = ">u2" if maxval > 255 else "u1"
    return f"P5\n{w} {h}\n{maxval}\n".encode() + np.asarray(samples, dtype=dtype).tobytes()


class TestPgmDecode:
    def test_endpoints_scale_linearly(self, tmp_path):
        p = tmp_path / "a.pgm"
        p.write_bytes(_p5(2, 2, 255, [0, 255, 255, 0]))
        img = iio.load_image(p)
        np.testing.assert_array_equal(img.pixels, [[0, 1], [1, 0]])
        assert img.value_range == (0.0, 1.0)

    def test_single_pixel_division(self, tmp_path):
        p = tmp_path / "b.pgm"
        p.write_bytes(_p5(1, 1, 255, [128]))
        img = iio.load_image(p)
        assert img.pixels[0, 0] == 128 / 255
        # survives a save/load round trip at the same depth
        iio.save_image(img, tmp_path / "c.pgm")
        assert iio.load_image(tmp_path / "c.pgm").pixels[0, 0] == 128 / 255

    def test_ascii_with_comments(self):
        data = b"P2\n# made by hand\n3 1\n# another\n10\n0 5 10\n"
        samples, maxval, comments = iio.read_pgm(data)
        assert maxval == 10
        np.testing.assert_array_equal(samples, [[0, 5, 10]])
        assert comments == ["made by hand", "another"]

    def test_sixteen_bit_big_endian(self, tmp_path):
        p = tmp_path / "d.pgm"
        p.write_bytes(_p5(2, 1, 65535, [1, 65535]))
        np.testing.assert_array_equal(iio.load_image(p).pixels, [[1 / 65535, 1.0]])

    @pytest.mark.parametrize(
        "data, exc",
        [
            (b"P7\n2 2\n255\n", iio.HeaderParseError),
            (b"P5\n2 x\n255\n", iio.HeaderParseError),
            (b"P5\n2 2\n70000\n" + bytes(8), iio.UnsupportedBitDepthError),
            (b"P5\n2 2\n255\n\x00\x01", iio.TruncatedDataError),
        ],
    )
    def test_error_paths(self, data, exc):
        with pytest.raises(exc):
            iio.read_pgm(data)

    def test_missing_file(self, tmp_path):
        with pytest.raises(iio.UnreadableImageError):
            iio.load_image(tmp_path / "nope.pgm")


class TestPng:
    def test_gray_png(self, tmp_path):
        arr = np.array([[0, 51], [204, 255]], dtype=np.uint8)
        Image.fromarray(arr, mode="L").save(tmp_path / "g.png")
        np.testing.assert_allclose(iio.load_image(tmp_path / "g.png").pixels, arr / 255.0)

    def test_rgb_png_uses_luminance(self, tmp_path):
        arr = np.zeros((1, 3, 3), dtype=np.uint8)
        arr[0, 0, 0] = arr[0, 1, 1] = arr[0, 2, 2] = 255
        Image.fromarray(arr, mode="RGB").save(tmp_path / "c.png")
        np.testing.assert_allclose(iio.load_image(tmp_path / "c.png").pixels, [[0.299, 0.587, 0.114]])


class TestSaveRoundTrip:
    @pytest.mark.parametrize("bits, ascii", [(8, False), (16, False), (8, True), (16, True)])
    def test_within_one_quantization_step(self, tmp_path, rng, bits, ascii):
        img = GrayImage(rng.random((7, 5)))
        iio.save_image(img, tmp_path / "x.pgm", bit_depth=bits, ascii=ascii)
        back = iio.load_image(tmp_path / "x.pgm")
        assert np.max(np.abs(back.pixels - img.pixels)) <= 1.0 / (2**bits - 1)

    def test_rejects_other_depths(self, tmp_path):
        with pytest.raises(iio.UnsupportedBitDepthError):
            iio.save_image(GrayImage(np.zeros((2, 2))), tmp_path / "x.pgm", bit_depth=12)


class TestLuminance:
    @pytest.mark.parametrize("rgb, y", [((1, 1, 1), 1.0), ((1, 0, 0), 0.299), ((0, 0, 1), 0.114)])
    def test_values(self, rgb, y):
        assert iio.luminance_grayscale(*rgb) == pytest.approx(y, abs=1e-15)

    def test_out_of_range_is_clamped_and_counted(self):
        before = iio.clamp_warning_count()
        assert iio.luminance_grayscale(2.0, 0.0, -1.0) == pytest.approx(0.299)
        assert iio.clamp_warning_count() == before + 1


class TestNormalize:
    def test_midpoint(self):
        out = iio.normalize(GrayImage([[0.5]]), (-1.0, 1.0))
        assert out.pixels[0, 0] == 0.0
        assert out.value_range == (-1.0, 1.0)

    def test_identity(self, rng):
        img = GrayImage(rng.random((3, 3)))
        assert iio.normalize(img, (0.0, 1.0)) == img

    def test_endpoint(self):
        img = GrayImage([[0.0, 255.0]], (0.0, 255.0))
        np.testing.assert_array_equal(iio.normalize(img).pixels, [[0.0, 1.0]])

    def test_degenerate_range(self):
        with pytest.warns(iio.DegenerateRangeWarning):
            out = iio.normalize(GrayImage([[3.0]], (3.0, 3.0)), (0.0, 1.0))
        assert out.pixels[0, 0] == 0.5
        assert "degenerate_range" in out.flags


class TestNoise:
    def test_zero_sigma_is_identity(self, rng):
        img = GrayImage(rng.random((4, 4)))
        assert iio.add_gaussian_noise(img, 0.0, 1) == img

    def test_seeded(self):
        img = GrayImage(np.full((8, 8), 0.5))
        assert iio.add_gaussian_noise(img, 0.1, 5) == iio.add_gaussian_noise(img, 0.1, 5)
        assert iio.add_gaussian_noise(img, 0.1, 5) != iio.add_gaussian_noise(img, 0.1, 6)

    def test_sample_std(self):
        out = iio.add_gaussian_noise(GrayImage(np.full((64, 64), 0.5)), 0.05, 42)
        assert 0.045 <= out.pixels.std(ddof=1) <= 0.055

    def test_clamped(self):
        out = iio.add_gaussian_noise(GrayImage(np.ones((16, 16))), 0.3, 0)
        assert out.pixels.max() <= 1.0 and out.pixels.min() >= 0.0

    @pytest.mark.parametrize("sigma", [-0.1, 0.6])
    def test_bad_sigma(self, sigma):
        with pytest.raises(ValueError):
            iio.add_gaussian_noise(GrayImage(np.zeros((2, 2))), sigma, 0)


class TestRotate:
    def test_zero(self, rng):
        img = GrayImage(rng.random((9, 9)))
        assert iio.rotate_image(img, 0.0) == img

    def test_full_turn(self, rng):
        img = GrayImage(rng.random((9, 9)))
        assert np.max(np.abs(iio.rotate_image(img, 360.0).pixels - img.pixels)) < 1e-12

    def test_quarter_turn_is_index_permutation(self):
        img = smooth_blobs(32)
        out = iio.rotate_image(img, 90.0)
        # counterclockwise on screen, same as numpy's rot90
        assert np.max(np.abs(out.pixels - np.rot90(img.pixels))) <= 1e-10

    def test_there_and_back(self):
        img = smooth_blobs(64)
        back = iio.rotate_image(iio.rotate_image(img, 23.0), -23.0)
        m = disk_mask(64, 64)
        assert np.max(np.abs(back.pixels - img.pixels)[m]) <= 0.02

    def test_fill(self):
        out = iio.rotate_image(GrayImage(np.ones((8, 8))), 45.0, fill=-1.0)
        assert out.pixels[0, 0] == -1.0


def test_gray_image_is_read_only():
    img = GrayImage(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 1.0
    with pytest.raises(ValueError):
        GrayImage(np.zeros(3))
