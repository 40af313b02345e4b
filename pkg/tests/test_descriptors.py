import numpy as np
import pytest

from lumpkit.descriptors import (
    Descriptor,
    GistExtractor,
    RGBHistogramExtractor,
    gist_descriptor,
    rgb_histogram,
)
from lumpkit.errors import ValidationError


class TestRGBHistogram:
    def test_all_black(self):
        h = rgb_histogram(np.zeros((2, 2, 3), dtype=np.uint8))
        assert h.values[0] == 4
        assert h.values.sum() == 4
        assert len(h) == 512
        assert h.kind == "rgb-hist-512"

    def test_white_pixel_lands_in_last_cell(self):
        img = np.full((1, 1, 3), 255, dtype=np.uint8)
        h = rgb_histogram(img, bins_per_channel=8)
        # (7, 7, 7) flattened R-major
        assert h.values[(7 * 8 + 7) * 8 + 7] == 1
        assert h.values.sum() == 1

    def test_bin_rule_floor_v_times_bins_over_256(self):
        # hand-applied: 0 -> bin 0, 32 -> floor(32*8/256) = 1
        img = np.zeros((2, 1, 3), dtype=np.uint8)
        img[1, 0, 0] = 32
        h = rgb_histogram(img)
        assert h.values[0] == 1
        assert h.values[1 * 64] == 1

    def test_marginal_variant(self):
        h = rgb_histogram(np.zeros((2, 2, 3), dtype=np.uint8), marginal=True)
        assert len(h) == 24
        assert h.values.sum() == 12  # 4 pixels x 3 channels

    def test_zero_pixel_image_rejected(self):
        with pytest.raises(ValidationError):
            rgb_histogram(np.zeros((0, 4, 3), dtype=np.uint8))

    def test_extractor_matches_function(self):
        rng = np.random.default_rng(0)
        imgs = [rng.integers(0, 256, (5, 7, 3)).astype(np.uint8) for _ in range(3)]
        rows = RGBHistogramExtractor().fit(imgs).transform(imgs)
        for row, img in zip(rows, imgs):
            assert np.array_equal(row, rgb_histogram(img).values)


class TestGistDescriptor:
    def test_constant_gray_is_all_zero(self):
        # band-pass filters kill DC
        img = np.full((64, 64, 3), 137, dtype=np.uint8)
        d = gist_descriptor(img)
        assert np.linalg.norm(d.values) == 0.0

    def test_shape_and_normalization(self):
        rng = np.random.default_rng(1)
        img = rng.integers(0, 256, (50, 90, 3)).astype(np.uint8)
        d = gist_descriptor(img)
        assert len(d) == 512
        assert d.kind == "gist-512"
        assert abs(np.linalg.norm(d.values) - 1.0) < 1e-6

    def test_stripes_rotation_permutes_orientation_axis(self):
        stripe = np.zeros((64, 64, 3), dtype=np.uint8)
        stripe[:, ::8] = 255
        d1 = gist_descriptor(stripe).values.reshape(4, 8, 4, 4)
        d2 = gist_descriptor(np.rot90(stripe, 1).copy()).values.reshape(4, 8, 4, 4)
        permuted = np.rot90(np.roll(d1, 4, axis=1), 1, axes=(2, 3))
        assert np.linalg.norm(permuted - d2) < 1e-6

    def test_deterministic_bit_identical(self):
        rng = np.random.default_rng(2)
        img = rng.integers(0, 256, (40, 40, 3)).astype(np.uint8)
        a = gist_descriptor(img).values
        b = gist_descriptor(img).values
        assert np.array_equal(a, b)

    def test_too_small_image_rejected(self):
        with pytest.raises(ValidationError, match="below minimum"):
            gist_descriptor(np.zeros((16, 64, 3), dtype=np.uint8))

    def test_batch_path_matches_single(self):
        rng = np.random.default_rng(3)
        imgs = [rng.integers(0, 256, (64, 64, 3)).astype(np.uint8) for _ in range(5)]
        batch = GistExtractor(batch_size=2).transform(imgs)
        for row, img in zip(batch, imgs):
            assert np.array_equal(row, gist_descriptor(img).values)


def test_descriptor_values_are_readonly():
    d = Descriptor("rgb-hist-4", [1.0, 2.0, 3.0, 4.0])
    with pytest.raises(ValueError):
        d.values[0] = 9.0
