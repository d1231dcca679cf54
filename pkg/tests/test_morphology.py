import numpy as np
import pytest

from hsad.morphology import area_closing, area_opening
from oracles import area_closing_oracle, area_opening_oracle


def test_flat_image_is_fixed_point():
    img = np.full((8, 8), 0.4)
    assert np.array_equal(area_opening(img, 4), img)
    assert np.array_equal(area_closing(img, 4), img)


def test_single_bright_pixel_removed():
    img = np.zeros((7, 7))
    img[3, 3] = 1.0
    opened = area_opening(img, 4)
    assert np.array_equal(opened, area_opening_oracle(img, 4))
    assert opened[3, 3] == 0.0
    assert np.all(opened == 0.0)
    # closing leaves a bright point untouched
    assert np.array_equal(area_closing(img, 4), img)


def test_dark_blob_filled_by_closing():
    img = np.full((8, 8), 0.8)
    img[2:4, 2:4] = 0.1  # 4-pixel dark blob
    closed = area_closing(img, 8)
    assert np.array_equal(closed, area_closing_oracle(img, 8))
    assert np.all(closed[2:4, 2:4] == 0.8)
    # opening does not touch small dark structures
    assert np.array_equal(area_opening(img, 8), img)


def test_large_component_survives():
    img = np.zeros((10, 10))
    img[2:7, 2:7] = 1.0  # 25 pixels
    assert np.array_equal(area_opening(img, 9), img)
    assert np.array_equal(area_opening(img, 26), np.zeros_like(img))


def test_eight_connectivity_diagonal_chain():
    img = np.zeros((6, 6))
    for i in range(4):
        img[i + 1, i + 1] = 1.0  # 4 diagonal pixels form one 8-connected component
    assert np.array_equal(area_opening(img, 4), img)
    assert np.array_equal(area_opening(img, 5), np.zeros_like(img))


def test_threshold_validation():
    with pytest.raises(ValueError):
        area_opening(np.zeros((4, 4)), 0)
    with pytest.raises(ValueError):
        area_opening(np.zeros(4), 2)


@pytest.mark.parametrize("seed", range(6))
def test_matches_threshold_decomposition_oracle(seed):
    rng = np.random.default_rng(seed)
    img = rng.uniform(0, 1, size=(16, 16))
    for a in (2, 5, 20):
        assert np.allclose(area_opening(img, a), area_opening_oracle(img, a), atol=1e-12)
        assert np.allclose(area_closing(img, a), area_closing_oracle(img, a), atol=1e-12)


def test_matches_oracle_on_quantized_plateaus(rng):
    # coarse quantization creates plateaus, exercising canonicalization
    img = np.round(rng.uniform(0, 1, size=(16, 16)) * 4) / 4
    for a in (3, 10):
        assert np.allclose(area_opening(img, a), area_opening_oracle(img, a), atol=1e-12)
        assert np.allclose(area_closing(img, a), area_closing_oracle(img, a), atol=1e-12)


def test_opening_is_anti_extensive_and_idempotent(rng):
    img = rng.uniform(0, 1, size=(12, 12))
    opened = area_opening(img, 6)
    assert np.all(opened <= img + 1e-12)
    assert np.allclose(area_opening(opened, 6), opened, atol=1e-12)
