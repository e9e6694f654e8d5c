"""Score proposal crops against the class list and emit classification documents."""

from __future__ import annotations

import glob
import os

from labelforge_adapter import images, wire
from labelforge_adapter.backends import resolve_classifier
from labelforge_adapter.config import AdapterConfig
from labelforge_adapter.crops import extract_crop
from labelforge_adapter.errors import AdapterError, InputError


def _load_proposals(path: str) -> tuple[str, int, int, list[dict]]:
    doc = wire.read_json(path)
    try:
        image_id = str(doc["image"])
        width, height = (int(v) for v in doc["image_size"])
        entries = list(doc["proposals"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed proposals document {path}: {exc}") from exc
    return image_id, width, height, entries


def emit_classifications(
    proposals_root: str,
    images_dir: str,
    out_root: str,
    config: AdapterConfig,
) -> tuple[int, list[dict]]:
    """Write ``<out_root>/classifications/<image_id>.json`` per proposals doc.

    Proposal-level failures (undecodable mask, empty crop) drop only that
    proposal; document-level failures drop the image.  Both are returned as
    error records and the run continues either way.
    """
    classify = resolve_classifier(config)
    doc_paths = sorted(glob.glob(os.path.join(proposals_root, "*.json")))
    if not doc_paths:
        raise InputError(f"no proposal documents found in {proposals_root}")
    out_dir = os.path.join(out_root, "classifications")
    written = 0
    errors: list[dict] = []
    for path in doc_paths:
        try:
            image_id, width, height, entries = _load_proposals(path)
            frame = images.load_rgb(images.find_image(images_dir, image_id))
            if frame.shape[:2] != (height, width):
                raise InputError(
                    f"image {image_id} is {frame.shape[1]}x{frame.shape[0]} "
                    f"but its document says {width}x{height}"
                )
            kept_ids: list[str] = []
            kept_crops = []
            for entry in entries:
                pid = str(entry.get("id"))
                try:
                    m = entry["mask"]
                    mask = wire.runs_to_mask(
                        int(m["w"]), int(m["h"]), list(m["runs"])
                    )
                    if mask.shape != (height, width):
                        raise InputError(
                            f"mask is {mask.shape[1]}x{mask.shape[0]}, "
                            f"image is {width}x{height}"
                        )
                    kept_crops.append(extract_crop(frame, mask, config.crop_strategy))
                    kept_ids.append(pid)
                except (AdapterError, KeyError, TypeError, ValueError) as exc:
                    errors.append(
                        {
                            "image": image_id,
                            "proposal": pid,
                            "error": "proposal-error",
                            "detail": str(exc),
                        }
                    )
            scores = []
            for start in range(0, len(kept_crops), config.batch_size):
                scores.extend(
                    classify(
                        kept_crops[start : start + config.batch_size], config.classes
                    )
                )
            results = []
            for pid, class_scores in zip(kept_ids, scores):
                label = min(class_scores, key=lambda k: (-class_scores[k], k))
                results.append(
                    {
                        "proposal_id": pid,
                        "class_label": label,
                        "class_scores": class_scores,
                    }
                )
            doc = wire.classifications_document(
                image_id, config.classifier_descriptor(), results
            )
            wire.write_json(os.path.join(out_dir, f"{image_id}.json"), doc)
            written += 1
        except AdapterError as exc:
            errors.append(
                {
                    "image": os.path.splitext(os.path.basename(path))[0],
                    "error": exc.code,
                    "detail": exc.detail,
                }
            )
    return written, errors
