"""Wire format for the documents the adapter exchanges with the pipeline.

Masks travel as run-length encodings: row-major scan, alternating
background/foreground run lengths, starting with background (the first run
may be zero when the mask begins with foreground).  Documents are JSON with
a fixed field order so repeated runs produce byte-identical files.

This module is deliberately self-contained — the adapter communicates with
the labeling pipeline only through these files, never through imports.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Sequence

import numpy as np

from labelforge_adapter.errors import InputError


def mask_to_runs(mask: np.ndarray) -> list[int]:
    """Encode a boolean (h, w) array as alternating bg/fg run lengths."""
    flat = np.asarray(mask, dtype=bool).ravel()
    if flat.size == 0:
        raise InputError("cannot encode an empty mask")
    # Boundaries between runs are the positions where the value changes.
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    edges = np.concatenate(([0], changes, [flat.size]))
    runs = np.diff(edges).tolist()
    if flat[0]:
        runs.insert(0, 0)  # encoding starts with a background run
    return [int(r) for r in runs]


def runs_to_mask(width: int, height: int, runs: Sequence[int]) -> np.ndarray:
    """Decode run lengths back into a boolean (height, width) array."""
    if width <= 0 or height <= 0:
        raise InputError(f"bad mask dimensions {width}x{height}")
    total = 0
    for i, run in enumerate(runs):
        if not isinstance(run, int) or isinstance(run, bool):
            raise InputError(f"run #{i} is not an integer: {run!r}")
        if run < 0 or (run == 0 and i > 0):
            raise InputError(f"run #{i} must be positive (got {run})")
        total += run
    if total != width * height:
        raise InputError(
            f"runs sum to {total}, expected {width * height} for {width}x{height}"
        )
    flat = np.zeros(width * height, dtype=bool)
    pos = 0
    value = False
    for run in runs:
        if value:
            flat[pos : pos + run] = True
        pos += run
        value = not value
    return flat.reshape(height, width)


def mask_json(mask: np.ndarray) -> dict:
    h, w = mask.shape
    return {"w": int(w), "h": int(h), "runs": mask_to_runs(mask)}


def proposals_document(
    image_id: str,
    width: int,
    height: int,
    generator: str,
    masks: Sequence[np.ndarray],
    ids: Sequence[str],
) -> dict:
    """Build a proposals document in canonical field order."""
    if len(masks) != len(ids):
        raise InputError(f"{len(masks)} masks but {len(ids)} ids")
    entries = []
    for pid, mask in zip(ids, masks):
        if mask.shape != (height, width):
            raise InputError(
                f"proposal {pid}: mask shape {mask.shape[1]}x{mask.shape[0]} "
                f"does not match image {width}x{height}"
            )
        entries.append({"id": pid, "mask": mask_json(mask)})
    return {
        "image": image_id,
        "image_size": [int(width), int(height)],
        "generator": generator,
        "proposals": entries,
    }


def classifications_document(
    image_id: str,
    classifier: str,
    results: Sequence[dict],
) -> dict:
    """Build a classifications document.

    Each result must carry ``proposal_id``, ``class_label``, and
    ``class_scores``; the label must be the arg-max of the scores (ties broken
    by taking the lexicographically smallest label), which is enforced here
    rather than trusted from the backend.
    """
    out = []
    for res in results:
        scores = {str(k): float(v) for k, v in res["class_scores"].items()}
        best = min(scores, key=lambda k: (-scores[k], k))
        if res["class_label"] != best:
            raise InputError(
                f"proposal {res['proposal_id']}: label {res['class_label']!r} "
                f"is not the arg-max of its scores ({best!r})"
            )
        out.append(
            {
                "proposal_id": str(res["proposal_id"]),
                "class_label": str(res["class_label"]),
                "class_scores": {k: scores[k] for k in sorted(scores)},
            }
        )
    return {"image": image_id, "classifier": classifier, "results": out}


def write_json(path: str, obj: dict) -> None:
    """Serialize ``obj`` and atomically replace ``path``.

    A temp file in the destination directory plus ``os.replace`` keeps
    concurrent readers from ever seeing a partial document.
    """
    data = (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"missing file: {path}") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"unreadable JSON at {path}: {exc}") from exc
