"""Qualitative comparison images.

Pixels are painted by agreement between prediction and ground truth:
green where both agree on foreground (true positive), red where ground
truth was missed (false negative), blue where the prediction overshoots
(false positive). Everything else shows the base image, or black.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import DimensionMismatch
from .mask import MaskRaster

__all__ = ["TP_COLOR", "FN_COLOR", "FP_COLOR", "render_overlay"]

TP_COLOR = (0, 255, 0)
FN_COLOR = (255, 0, 0)
FP_COLOR = (0, 0, 255)


def render_overlay(
    pred: MaskRaster,
    gt: MaskRaster,
    image: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Paint the agreement map over an optional base image.

    image, when given, must be (height, width, 3) uint8; it shows through
    wherever both masks are background. Returns a new (height, width, 3)
    uint8 array.
    """
    if pred.shape != gt.shape:
        raise DimensionMismatch(f"mask shapes differ: {pred.shape} vs {gt.shape}")
    h, w = pred.shape
    if image is None:
        canvas = np.zeros((h, w, 3), dtype=np.uint8)
    else:
        base = np.asarray(image)
        if base.shape != (h, w, 3):
            raise DimensionMismatch(
                f"base image is {base.shape}, masks are {h}x{w}"
            )
        canvas = base.astype(np.uint8).copy()
    p = pred.pixels
    g = gt.pixels
    canvas[p & g] = TP_COLOR
    canvas[~p & g] = FN_COLOR
    canvas[p & ~g] = FP_COLOR
    return canvas
