import numpy as np
import pytest

from labelforge_adapter.crops import extract_crop
from labelforge_adapter.errors import InputError


def scene():
    img = np.zeros((4, 6, 3), np.uint8)
    img[:, :] = (10, 20, 30)
    img[1:3, 2:5] = (200, 100, 50)
    mask = np.zeros((4, 6), bool)
    mask[1:3, 2:5] = True
    return img, mask


def test_tight_bbox_crops_to_extents():
    img, mask = scene()
    crop = extract_crop(img, mask, "tight-bbox")
    assert crop.shape == (2, 3, 3)
    assert (crop == (200, 100, 50)).all()


def test_tight_bbox_zeroes_outside_mask():
    img, mask = scene()
    mask[1, 3] = False  # hole inside the bbox
    crop = extract_crop(img, mask, "tight-bbox")
    assert (crop[0, 1] == 0).all()
    assert (crop[0, 0] == (200, 100, 50)).all()


def test_masked_frame_keeps_geometry():
    img, mask = scene()
    crop = extract_crop(img, mask, "masked-frame")
    assert crop.shape == img.shape
    assert (crop[mask] == (200, 100, 50)).all()
    assert (crop[~mask] == 0).all()


def test_input_image_is_not_mutated():
    img, mask = scene()
    before = img.copy()
    extract_crop(img, mask, "masked-frame")
    assert (img == before).all()


def test_rejects_empty_mask_and_bad_shapes():
    img, mask = scene()
    with pytest.raises(InputError):
        extract_crop(img, np.zeros_like(mask), "tight-bbox")
    with pytest.raises(InputError):
        extract_crop(img, mask[:3], "tight-bbox")
    with pytest.raises(InputError):
        extract_crop(img[:, :, 0], mask, "tight-bbox")
    with pytest.raises(InputError):
        extract_crop(img, mask, "mosaic")
