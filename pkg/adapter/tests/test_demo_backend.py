import os

import numpy as np
import pytest
from PIL import Image

from labelforge_adapter.backends import demo
from labelforge_adapter.crops import extract_crop
from labelforge_adapter.errors import BackendError

CLASSES = ("drivable area", "vehicle", "building", "vegetation", "sidewalk", "sky")


def load_fixture_image(fixtures_dir, image_id):
    path = os.path.join(fixtures_dir, "images", f"{image_id}.png")
    return np.asarray(Image.open(path).convert("RGB"), np.uint8)


def test_segmenter_finds_all_flat_regions(fixtures_dir):
    img = load_fixture_image(fixtures_dir, "fix-000")
    masks = demo.make_segmenter(max_regions=32, min_area=8)(img)
    # sky band, grass, road, and the two rectangles
    assert len(masks) == 5
    areas = [int(m.sum()) for m in masks]
    assert areas == sorted(areas, reverse=True)
    # regions are pairwise disjoint and cover the whole frame
    stack = np.stack(masks).sum(axis=0)
    assert stack.max() == 1 and stack.min() == 1


def test_segmenter_is_deterministic(fixtures_dir):
    img = load_fixture_image(fixtures_dir, "fix-001")
    seg = demo.make_segmenter(max_regions=32, min_area=8)
    first = seg(img)
    second = seg(img)
    assert len(first) == len(second)
    for a, b in zip(first, second):
        assert (a == b).all()


def test_segmenter_respects_caps(fixtures_dir):
    img = load_fixture_image(fixtures_dir, "fix-000")
    assert len(demo.make_segmenter(max_regions=2, min_area=8)(img)) == 2
    # a huge min_area keeps only the dominant regions
    big_only = demo.make_segmenter(max_regions=32, min_area=200)(img)
    assert 1 <= len(big_only) < 5


def test_classifier_scores_are_a_distribution(fixtures_dir):
    img = load_fixture_image(fixtures_dir, "fix-000")
    masks = demo.make_segmenter(max_regions=32, min_area=8)(img)
    crops = [extract_crop(img, m, "tight-bbox") for m in masks]
    for scores in demo.make_classifier()(crops, CLASSES):
        assert set(scores) == set(CLASSES)
        assert all(0.0 <= v <= 1.0 for v in scores.values())
        assert sum(scores.values()) == pytest.approx(1.0)


def test_classifier_matches_reference_colors():
    def flat(color):
        crop = np.zeros((4, 4, 3), np.uint8)
        crop[:, :] = color
        return crop

    classify = demo.make_classifier()
    for label, color in demo.REFERENCE_COLORS.items():
        scores = classify([flat(color)], CLASSES)[0]
        assert max(scores, key=scores.get) == label


def test_centroid_fit_and_classify():
    red = np.full((3, 3, 3), (200, 30, 30), np.uint8)
    blue = np.full((3, 3, 3), (30, 30, 200), np.uint8)
    ckpt = {"classes": demo.fit_centroids([(red, "stop"), (blue, "water")])}
    assert ckpt["classes"]["stop"] == [200.0, 30.0, 30.0]

    scores = demo.make_centroid_classifier(ckpt)([red], ("stop", "water", "other"))[0]
    assert max(scores, key=scores.get) == "stop"
    # a class the checkpoint never saw gets only the fallback similarity
    assert scores["other"] < scores["water"]


def test_centroid_fit_averages_within_class():
    a = np.full((2, 2, 3), (100, 0, 0), np.uint8)
    b = np.full((2, 2, 3), (200, 0, 0), np.uint8)
    fitted = demo.fit_centroids([(a, "x"), (b, "x")])
    assert fitted["x"] == [150.0, 0.0, 0.0]


def test_fit_requires_examples():
    with pytest.raises(BackendError):
        demo.fit_centroids([])
    with pytest.raises(BackendError):
        demo.make_centroid_classifier({"classes": {}})
