"""Run the segmenter over a directory of images and emit proposal documents."""

from __future__ import annotations

import os

from labelforge_adapter import images, wire
from labelforge_adapter.backends import resolve_segmenter
from labelforge_adapter.config import AdapterConfig
from labelforge_adapter.errors import AdapterError


def emit_proposals(
    images_dir: str, out_root: str, config: AdapterConfig
) -> tuple[int, list[dict]]:
    """Write ``<out_root>/proposals/<image_id>.json`` per input image.

    Returns (images written, error records).  A failure on one image is
    recorded and the run continues; ids are ``m00``, ``m01``, ... in the
    segmenter's largest-first order.
    """
    segment = resolve_segmenter(config)
    out_dir = os.path.join(out_root, "proposals")
    written = 0
    errors: list[dict] = []
    for image_id, path in images.list_images(images_dir):
        try:
            frame = images.load_rgb(path)
            masks = segment(frame)
            if not masks:
                raise AdapterError(f"segmenter produced no regions for {image_id}")
            doc = wire.proposals_document(
                image_id,
                width=frame.shape[1],
                height=frame.shape[0],
                generator=config.segmenter_descriptor(),
                masks=masks,
                ids=[f"m{i:02d}" for i in range(len(masks))],
            )
            wire.write_json(os.path.join(out_dir, f"{image_id}.json"), doc)
            written += 1
        except AdapterError as exc:
            errors.append({"image": image_id, "error": exc.code, "detail": exc.detail})
    return written, errors
