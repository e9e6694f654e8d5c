"""Image loading helpers shared by the emit commands."""

from __future__ import annotations

import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from labelforge_adapter.errors import InputError

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")


def load_rgb(path: str) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except FileNotFoundError as exc:
        raise InputError(f"missing image: {path}") from exc
    except (OSError, UnidentifiedImageError) as exc:
        raise InputError(f"unreadable image at {path}: {exc}") from exc


def list_images(images_dir: str) -> list[tuple[str, str]]:
    """All (image_id, path) pairs under ``images_dir``, sorted by id."""
    if not os.path.isdir(images_dir):
        raise InputError(f"not a directory: {images_dir}")
    found = []
    for name in sorted(os.listdir(images_dir)):
        stem, ext = os.path.splitext(name)
        if ext.lower() in IMAGE_EXTENSIONS:
            found.append((stem, os.path.join(images_dir, name)))
    if not found:
        raise InputError(f"no images (png/jpg) found in {images_dir}")
    return found


def find_image(images_dir: str, image_id: str) -> str:
    for ext in IMAGE_EXTENSIONS:
        candidate = os.path.join(images_dir, image_id + ext)
        if os.path.isfile(candidate):
            return candidate
    raise InputError(f"no image file for id {image_id!r} in {images_dir}")
