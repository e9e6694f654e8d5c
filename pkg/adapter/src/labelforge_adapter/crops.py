"""Crop extraction: turn (image, mask) into the pixels a classifier sees."""

from __future__ import annotations

import numpy as np

from labelforge_adapter.errors import InputError


def extract_crop(image: np.ndarray, mask: np.ndarray, strategy: str) -> np.ndarray:
    """Cut the masked region out of ``image`` according to ``strategy``.

    ``tight-bbox``  — crop to the mask's bounding box; pixels inside the box
    but outside the mask are zeroed so the classifier never sees context.
    ``masked-frame`` — keep the full frame and zero everything outside the
    mask, preserving the region's position and scale.
    """
    if image.ndim != 3 or image.shape[2] != 3:
        raise InputError(f"expected an (h, w, 3) image, got shape {image.shape}")
    if mask.shape != image.shape[:2]:
        raise InputError(
            f"mask shape {mask.shape} does not match image {image.shape[:2]}"
        )
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise InputError("mask is empty, nothing to crop")

    masked = np.where(mask[:, :, None], image, 0).astype(image.dtype)
    if strategy == "masked-frame":
        return masked
    if strategy == "tight-bbox":
        rows = np.flatnonzero(mask.any(axis=1))
        cols = np.flatnonzero(mask.any(axis=0))
        return masked[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1]
    raise InputError(f"unknown crop strategy {strategy!r}")
