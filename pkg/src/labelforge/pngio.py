"""Mask and image PNG files.

Masks are written as single-channel 8-bit PNGs, 0 for background and 255
for foreground. On read, any nonzero value counts as foreground, and color
inputs are collapsed to a single channel first.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np
from PIL import Image

from .errors import MissingArtifact, ParseError
from .mask import MaskRaster

__all__ = ["read_mask_png", "write_mask_png", "read_rgb_png", "write_rgb_png"]


def read_mask_png(path: str) -> MaskRaster:
    if not os.path.exists(path):
        raise MissingArtifact(f"mask file not found: {path}")
    try:
        with Image.open(path) as img:
            gray = img.convert("L")
            arr = np.asarray(gray)
    except Exception as exc:  # Pillow raises a small zoo of types here
        raise ParseError(f"cannot read mask PNG {path}: {exc}") from exc
    return MaskRaster(arr != 0)


def _atomic_save(img: Image.Image, path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".png")
    os.close(fd)
    try:
        img.save(tmp, format="PNG")
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_mask_png(mask: MaskRaster, path: str) -> None:
    data = np.where(mask.pixels, 255, 0).astype(np.uint8)
    _atomic_save(Image.fromarray(data, mode="L"), path)


def read_rgb_png(path: str) -> np.ndarray:
    if not os.path.exists(path):
        raise MissingArtifact(f"image file not found: {path}")
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except Exception as exc:
        raise ParseError(f"cannot read image {path}: {exc}") from exc


def write_rgb_png(array: np.ndarray, path: str) -> None:
    arr = np.asarray(array, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) array, got {arr.shape}")
    _atomic_save(Image.fromarray(arr, mode="RGB"), path)
