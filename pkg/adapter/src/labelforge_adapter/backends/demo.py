"""Deterministic CPU reference backends.

These stand in for the real models during tests and offline runs: the
segmenter proposes connected regions of similar color, and the classifier
scores crops by mean-color distance to per-class reference colors.  Both are
pure functions of their inputs, so repeated runs are byte-identical.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import ndimage

from labelforge_adapter.errors import BackendError, InputError

# Mean-color anchors for zero-shot scoring.  Crops are matched against these
# before any fine-tuning; a fine-tuned checkpoint replaces them with fitted
# centroids.
REFERENCE_COLORS = {
    "drivable area": (100, 100, 100),
    "vehicle": (200, 40, 40),
    "building": (150, 110, 80),
    "vegetation": (60, 160, 60),
    "sidewalk": (180, 180, 180),
    "sky": (110, 160, 230),
}

QUANT_STEP = 32  # color bucket width used when grouping pixels into regions
FALLBACK_SIMILARITY = 0.01  # score for classes with no anchor at all


def make_segmenter(max_regions: int, min_area: int):
    def segment(image: np.ndarray) -> list[np.ndarray]:
        if image.ndim != 3 or image.shape[2] != 3:
            raise InputError(f"expected (h, w, 3) image, got {image.shape}")
        quant = (image.astype(np.int32) // QUANT_STEP).astype(np.int32)
        # Pack the quantized channels into one label per pixel.
        packed = quant[:, :, 0] * 64 * 64 + quant[:, :, 1] * 64 + quant[:, :, 2]
        regions = []
        for color in np.unique(packed):
            components, count = ndimage.label(packed == color)
            for idx in range(1, count + 1):
                mask = components == idx
                area = int(mask.sum())
                if area >= min_area:
                    rows = np.flatnonzero(mask.any(axis=1))
                    cols = np.flatnonzero(mask.any(axis=0))
                    regions.append((area, int(rows[0]), int(cols[0]), mask))
        # Largest first; top-left position breaks area ties deterministically.
        regions.sort(key=lambda r: (-r[0], r[1], r[2]))
        return [mask for _, _, _, mask in regions[:max_regions]]

    return segment


def _mean_color(crop: np.ndarray) -> np.ndarray:
    """Mean RGB over the visible (non-zeroed) pixels of a crop."""
    if crop.ndim != 3 or crop.shape[2] != 3:
        raise InputError(f"expected (h, w, 3) crop, got {crop.shape}")
    visible = crop.reshape(-1, 3)
    lit = visible[(visible != 0).any(axis=1)]
    if lit.size == 0:
        lit = visible  # an all-black crop scores against black itself
    return lit.astype(np.float64).mean(axis=0)


def _score(colors: dict, crop: np.ndarray, classes: Sequence[str]) -> dict:
    mean = _mean_color(crop)
    sims = {}
    for name in classes:
        anchor = colors.get(name)
        if anchor is None:
            sims[name] = FALLBACK_SIMILARITY
        else:
            dist = float(np.linalg.norm(mean - np.asarray(anchor, dtype=np.float64)))
            sims[name] = 1.0 / (1.0 + dist / 32.0)
    total = sum(sims.values())
    return {name: sims[name] / total for name in classes}


def make_classifier():
    def classify(crops: Sequence[np.ndarray], classes: Sequence[str]) -> list[dict]:
        return [_score(REFERENCE_COLORS, crop, classes) for crop in crops]

    return classify


def fit_centroids(examples: Sequence[tuple[np.ndarray, str]]) -> dict:
    """Fit per-class mean-color centroids from (crop, label) examples."""
    if not examples:
        raise BackendError("no training examples to fit centroids from")
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    for crop, label in examples:
        mean = _mean_color(crop)
        sums[label] = sums.get(label, np.zeros(3)) + mean
        counts[label] = counts.get(label, 0) + 1
    return {
        label: [float(v) for v in (sums[label] / counts[label])]
        for label in sorted(sums)
    }


def make_centroid_classifier(ckpt: dict):
    centroids = {
        str(name): tuple(float(v) for v in rgb)
        for name, rgb in ckpt.get("classes", {}).items()
    }
    if not centroids:
        raise BackendError("checkpoint has no fitted classes")

    def classify(crops: Sequence[np.ndarray], classes: Sequence[str]) -> list[dict]:
        return [_score(centroids, crop, classes) for crop in crops]

    return classify
