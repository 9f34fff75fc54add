import numpy as np
import pytest

from modefuse.errors import DomainError, FormatError
from modefuse.image import (
    AugmentationConfig,
    RasterImage,
    augment,
    load_image,
    resize,
    rng_stream,
    save_png,
    to_rgb,
)

IDENTITY_AUG = AugmentationConfig(
    reflect_probability=0.0, translate_range=(0.0, 0.0), scale_range=(1.0, 1.0), seed=0
)


def gray(arr):
    return RasterImage(np.asarray(arr, dtype=np.uint8)[:, :, None])


class TestResize:
    def test_identity_at_target_size(self):
        rng = np.random.default_rng(0)
        img = RasterImage(rng.integers(0, 256, size=(8, 6, 3), dtype=np.uint8))
        out = resize(img, 6, 8)
        assert out.pixels.tobytes() == img.pixels.tobytes()

    def test_checkerboard_center_blend(self):
        # golden pinned from hand-computed bilinear weights (round half-to-even)
        img = gray([[0, 255], [255, 0]])
        assert resize(img, 1, 1).pixels.ravel().tolist() == [128]

    def test_constant_invariance_on_halving(self):
        img = RasterImage(np.full((448, 448, 1), 77, dtype=np.uint8))
        out = resize(img, 224, 224)
        assert np.all(out.pixels == 77)
        assert (out.width, out.height) == (224, 224)

    def test_idempotent_at_target(self):
        rng = np.random.default_rng(1)
        img = RasterImage(rng.integers(0, 256, size=(10, 10, 1), dtype=np.uint8))
        once = resize(img, 5, 5)
        twice = resize(once, 5, 5)
        assert once.pixels.tobytes() == twice.pixels.tobytes()

    def test_bad_target(self):
        with pytest.raises(DomainError):
            resize(gray([[1]]), 0, 4)


class TestToRgb:
    def test_gray_replication(self):
        out = to_rgb(gray([[100]]))
        assert out.pixels.ravel().tolist() == [100, 100, 100]

    def test_rgb_passthrough(self):
        img = RasterImage(np.arange(12, dtype=np.uint8).reshape(2, 2, 3))
        assert to_rgb(img) is img

    def test_zero_gray(self):
        assert to_rgb(gray([[0]])).pixels.ravel().tolist() == [0, 0, 0]

    def test_bad_channel_count(self):
        with pytest.raises(FormatError):
            RasterImage(np.zeros((2, 2, 2), dtype=np.uint8))


class TestAugment:
    def test_identity_config(self):
        rng = np.random.default_rng(3)
        img = RasterImage(rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8))
        out = augment(img, IDENTITY_AUG, rng_stream(0, 0))
        assert out.pixels.tobytes() == img.pixels.tobytes()

    def test_vertical_flip_is_involution(self):
        cfg = AugmentationConfig(
            reflect_probability=1.0, translate_range=(0.0, 0.0), scale_range=(1.0, 1.0), seed=0
        )
        rng = np.random.default_rng(4)
        img = RasterImage(rng.integers(0, 256, size=(9, 5, 1), dtype=np.uint8))
        once = augment(img, cfg, rng_stream(0, 0))
        assert once.pixels.tobytes() == img.pixels[::-1].tobytes()
        twice = augment(once, cfg, rng_stream(0, 1))
        assert twice.pixels.tobytes() == img.pixels.tobytes()

    def test_dimension_preservation(self):
        cfg = AugmentationConfig(seed=5)
        rng = np.random.default_rng(5)
        img = RasterImage(rng.integers(0, 256, size=(20, 14, 3), dtype=np.uint8))
        for i in range(10):
            out = augment(img, cfg, rng_stream(cfg.seed, i))
            assert (out.height, out.width, out.channels) == (20, 14, 3)

    def test_determinism_per_stream(self):
        cfg = AugmentationConfig(seed=6)
        img = RasterImage(np.random.default_rng(6).integers(0, 256, size=(12, 12, 1), dtype=np.uint8))
        a = augment(img, cfg, rng_stream(cfg.seed, 3))
        b = augment(img, cfg, rng_stream(cfg.seed, 3))
        assert a.pixels.tobytes() == b.pixels.tobytes()

    def test_translation_fills_black(self):
        cfg = AugmentationConfig(
            reflect_probability=0.0, translate_range=(3.0, 3.0), scale_range=(1.0, 1.0), seed=0
        )
        img = RasterImage(np.full((6, 6, 1), 200, dtype=np.uint8))
        out = augment(img, cfg, rng_stream(0, 0))
        assert np.all(out.pixels[:, :2] == 0)  # shifted right by 3, left strip black
        assert np.all(out.pixels[3:, 3:] == 200)

    def test_reflection_frequency(self):
        cfg = AugmentationConfig(
            reflect_probability=0.5, translate_range=(0.0, 0.0), scale_range=(1.0, 1.0), seed=99
        )
        probe = gray([[0], [255]])
        flips = sum(
            augment(probe, cfg, rng_stream(cfg.seed, i)).pixels[0, 0, 0] == 255
            for i in range(10_000)
        )
        assert 0.48 <= flips / 10_000 <= 0.52

    def test_bad_config(self):
        with pytest.raises(DomainError):
            AugmentationConfig(reflect_probability=1.5)
        with pytest.raises(DomainError):
            AugmentationConfig(scale_range=(0.0, 1.0))


class TestIo:
    def test_png_roundtrip(self, tmp_path):
        rng = np.random.default_rng(7)
        img = RasterImage(rng.integers(0, 256, size=(10, 8, 3), dtype=np.uint8))
        path = tmp_path / "x.png"
        save_png(img, path)
        back = load_image(path)
        assert back.pixels.tobytes() == img.pixels.tobytes()

    def test_grayscale_roundtrip(self, tmp_path):
        img = gray([[0, 128], [255, 64]])
        path = tmp_path / "g.png"
        save_png(img, path)
        back = load_image(path)
        assert back.channels == 1
        assert back.pixels.tobytes() == img.pixels.tobytes()
