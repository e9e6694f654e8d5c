"""Fine-tuning pair generation with ground-truth replacement.

For an annotated image, every proposal keeps its zero-shot label except the
single proposal that overlaps ground truth best: that one is replaced by the
ground-truth mask itself, labeled as the drivable class. The replacement is
unconditional; even when the best overlap is 0.0 the argmax proposal is
swapped out, so every annotated image contributes exactly one positive pair.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    DimensionMismatch,
    LabelForgeError,
    MissingArtifact,
    NoProposals,
)
from .mask import MaskRaster, RleMask, iou, rle_decode, rle_encode, rle_to_json
from .proposals import DRIVABLE_CLASS, Proposal, rank_by_area

__all__ = [
    "LabeledPair",
    "ScefRecord",
    "PROVENANCE_ZERO_SHOT",
    "PROVENANCE_REPLACED",
    "generate_finetune_pairs",
    "record_to_json",
    "record_from_json",
    "batch_generate",
]

PROVENANCE_ZERO_SHOT = "clip-zero-shot"
PROVENANCE_REPLACED = "gt-replacement"


@dataclass(frozen=True)
class LabeledPair:
    """One (mask, category) training pair with its provenance."""

    mask: RleMask
    category: str
    provenance: str  # PROVENANCE_ZERO_SHOT or PROVENANCE_REPLACED
    iou_vs_gt: float


@dataclass(frozen=True)
class ScefRecord:
    """All pairs generated from one annotated image.

    pairs[argmax_index] is the replaced pair; scores[i] is the overlap of the
    original i-th proposal against ground truth (the replaced slot keeps the
    score of the proposal it displaced).
    """

    image: str
    pairs: tuple[LabeledPair, ...]
    argmax_index: int
    scores: tuple[float, ...]


def generate_finetune_pairs(
    proposals: Sequence[Proposal],
    gt: MaskRaster,
    drivable_class: str = DRIVABLE_CLASS,
) -> ScefRecord:
    """Apply the replacement rule to one image's proposals.

    The argmax over overlap scores breaks ties toward the larger-area
    proposal and then the ascending id, mirroring the selection tie chain.
    Raises NoProposals for an empty list and DimensionMismatch when any
    proposal's size disagrees with the ground truth raster.
    """
    if not proposals:
        raise NoProposals("cannot generate pairs without proposals")
    image = proposals[0].source_image
    for p in proposals:
        if p.source_image != image:
            raise ValueError(
                f"proposals mix images {image!r} and {p.source_image!r}"
            )
        if (p.mask.height, p.mask.width) != gt.shape:
            raise DimensionMismatch(
                f"proposal {p.id} is {p.mask.width}x{p.mask.height}, "
                f"ground truth is {gt.width}x{gt.height}"
            )

    scores = [iou(rle_decode(p.mask), gt) for p in proposals]
    order = sorted(
        range(len(proposals)),
        key=lambda i: (-scores[i], -proposals[i].area, proposals[i].id),
    )
    argmax = order[0]

    gt_rle = rle_encode(gt)
    pairs = []
    for i, p in enumerate(proposals):
        if i == argmax:
            pairs.append(
                LabeledPair(
                    mask=gt_rle,
                    category=drivable_class,
                    provenance=PROVENANCE_REPLACED,
                    iou_vs_gt=scores[i],
                )
            )
        else:
            pairs.append(
                LabeledPair(
                    mask=p.mask,
                    category=p.class_label,
                    provenance=PROVENANCE_ZERO_SHOT,
                    iou_vs_gt=scores[i],
                )
            )
    return ScefRecord(
        image=image,
        pairs=tuple(pairs),
        argmax_index=argmax,
        scores=tuple(scores),
    )


def record_to_json(record: ScefRecord) -> dict:
    return {
        "image": record.image,
        "argmax_index": record.argmax_index,
        "scores": list(record.scores),
        "pairs": [
            {
                "mask": rle_to_json(p.mask),
                "category": p.category,
                "provenance": p.provenance,
                "iou_vs_gt": p.iou_vs_gt,
            }
            for p in record.pairs
        ],
    }


def record_from_json(obj: dict) -> ScefRecord:
    from .mask import rle_from_json

    pairs = tuple(
        LabeledPair(
            mask=rle_from_json(p["mask"]),
            category=p["category"],
            provenance=p["provenance"],
            iou_vs_gt=float(p["iou_vs_gt"]),
        )
        for p in obj["pairs"]
    )
    return ScefRecord(
        image=obj["image"],
        pairs=pairs,
        argmax_index=int(obj["argmax_index"]),
        scores=tuple(float(s) for s in obj["scores"]),
    )


LABELED_SPLITS = ("train", "val", "test")


def batch_generate(
    manifest,
    proposals_root: str,
    classifications_root: str,
    gt_root: str,
    out_root: str,
    drivable_class: str = DRIVABLE_CLASS,
    top_k: int = 10,
    splits: Sequence[str] = LABELED_SPLITS,
) -> tuple[list[ScefRecord], dict]:
    """Generate pair records for every annotated manifest entry.

    Reads per-image proposals and classifications documents plus a ground
    truth PNG, writes one record JSON per image under <out_root>/scef/, and
    returns the records with a summary. Per-image failures are collected in
    the summary's "errors" list; the batch keeps going.
    """
    from .manifest import DatasetManifest
    from .pngio import read_mask_png
    from .protocol import join_classifications, load_classifications, load_proposals
    from .storage import atomic_write_json

    assert isinstance(manifest, DatasetManifest)
    records: list[ScefRecord] = []
    errors: list[dict] = []
    zero_overlap_images = 0
    pair_count = 0
    out_dir = os.path.join(out_root, "scef")
    os.makedirs(out_dir, exist_ok=True)

    for entry in manifest.entries:
        if entry.split not in splits:
            continue
        try:
            pdoc_path = entry.proposals_path or os.path.join(
                proposals_root, f"{entry.id}.json"
            )
            cdoc_path = os.path.join(classifications_root, f"{entry.id}.json")
            gt_path = entry.gt_path or os.path.join(gt_root, f"{entry.id}.png")
            for path, what in (
                (pdoc_path, "proposals document"),
                (cdoc_path, "classifications document"),
                (gt_path, "ground truth mask"),
            ):
                if not os.path.exists(path):
                    raise MissingArtifact(f"{what} not found: {path}")

            pdoc = load_proposals(pdoc_path)
            cdoc = load_classifications(cdoc_path)
            gt = read_mask_png(gt_path)
            proposals, missing = join_classifications(pdoc, cdoc)
            for pid in missing:
                errors.append(
                    {
                        "image": entry.id,
                        "error": "MissingClassification",
                        "detail": f"proposal {pid} has no classification result",
                    }
                )
            ranked = rank_by_area(proposals, top_k=top_k)
            if not ranked:
                raise NoProposals(f"image {entry.id}: no nonzero-area proposals")
            record = generate_finetune_pairs(ranked, gt, drivable_class)
            atomic_write_json(
                os.path.join(out_dir, f"{entry.id}.json"), record_to_json(record)
            )
            records.append(record)
            pair_count += len(record.pairs)
            if max(record.scores) == 0.0:
                zero_overlap_images += 1
        except LabelForgeError as exc:
            errors.append(
                {"image": entry.id, "error": type(exc).__name__, "detail": str(exc)}
            )

    summary = {
        "images": len(records),
        "pairs": pair_count,
        "replaced_pairs": len(records),
        "zero_overlap_images": zero_overlap_images,
        "errors": errors,
    }
    return records, summary
