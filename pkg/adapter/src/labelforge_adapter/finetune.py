"""Fine-tune the crop classifier on labeled-pair records.

Input records pair each region mask with the category it should be labeled
as (the drivable region carries its corrected ground-truth label).  Every
(mask, category) pair becomes one training crop; the fitted checkpoint is a
JSON document that ``adapter-clip`` can load back via ``ckpt:<path>``.
"""

from __future__ import annotations

import glob
import os

from labelforge_adapter import images, wire
from labelforge_adapter.config import AdapterConfig, FinetuneParams
from labelforge_adapter.crops import extract_crop
from labelforge_adapter.errors import AdapterError, BackendError, InputError


def _collect_examples(
    records_root: str, images_dir: str, config: AdapterConfig
) -> tuple[list, int, list[dict]]:
    paths = sorted(glob.glob(os.path.join(records_root, "*.json")))
    if not paths:
        raise InputError(f"no pair records found in {records_root}")
    examples = []
    used_records = 0
    errors: list[dict] = []
    for path in paths:
        record_id = os.path.splitext(os.path.basename(path))[0]
        try:
            record = wire.read_json(path)
            image_id = str(record["image"])
            frame = images.load_rgb(images.find_image(images_dir, image_id))
            for i, pair in enumerate(record["pairs"]):
                m = pair["mask"]
                mask = wire.runs_to_mask(int(m["w"]), int(m["h"]), list(m["runs"]))
                if mask.shape != frame.shape[:2]:
                    raise InputError(
                        f"pair #{i} mask is {mask.shape[1]}x{mask.shape[0]} but "
                        f"image {image_id} is {frame.shape[1]}x{frame.shape[0]}"
                    )
                crop = extract_crop(frame, mask, config.crop_strategy)
                examples.append((crop, str(pair["category"])))
            used_records += 1
        except (AdapterError, KeyError, TypeError, ValueError) as exc:
            errors.append(
                {"record": record_id, "error": "record-error", "detail": str(exc)}
            )
    return examples, used_records, errors


def finetune_classifier(
    records_root: str,
    images_dir: str,
    out_path: str,
    config: AdapterConfig,
    params: FinetuneParams,
) -> tuple[dict, list[dict]]:
    """Fit a classifier on every pair in ``records_root`` and write a checkpoint.

    Returns (summary, error records).  The base model comes from
    ``config.classifier`` and must be a ``demo:`` or ``hf:`` identifier.
    """
    examples, used_records, errors = _collect_examples(
        records_root, images_dir, config
    )
    if not examples:
        raise BackendError("no usable training pairs; every record failed")

    if config.classifier.startswith("demo:"):
        from labelforge_adapter.backends import demo

        ckpt = {"kind": "color-centroid", "classes": demo.fit_centroids(examples)}
    elif config.classifier.startswith("hf:"):
        from labelforge_adapter.backends import hf

        ckpt = hf.fit_linear_probe(
            config.classifier[len("hf:") :],
            device=config.device,
            examples=examples,
            batch_size=config.batch_size,
            epochs=params.epochs,
            learning_rate=params.learning_rate,
        )
    else:
        raise BackendError(
            f"fine-tuning starts from a demo: or hf: classifier, "
            f"got {config.classifier!r}"
        )

    # The probe checkpoint already records its raw model id; for demo
    # checkpoints the configured identifier is the most useful provenance.
    ckpt.setdefault("base_model", config.classifier)
    ckpt["crop_strategy"] = config.crop_strategy
    ckpt["prompt_template"] = config.prompt_template
    ckpt["hyperparameters"] = params.as_dict()
    ckpt["trained_on"] = {"records": used_records, "pairs": len(examples)}
    wire.write_json(out_path, ckpt)

    summary = {
        "records": used_records,
        "pairs": len(examples),
        "classes": sorted({label for _, label in examples}),
        "checkpoint": out_path,
    }
    return summary, errors
