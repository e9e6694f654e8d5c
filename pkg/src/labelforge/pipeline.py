"""Batch orchestration: pseudo-label generation, evaluation, corpus synthesis.

Per-image work is independent, so batches optionally fan out over a thread
pool; results are collated back in manifest order and all per-image errors
are collected rather than aborting the batch. Outputs are byte-stable:
rerunning a command over identical inputs rewrites identical files.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, TypeVar

from .config import PipelineConfig
from .errors import LabelForgeError, MissingArtifact, MissingPair, NoProposals, ParseError
from .manifest import DatasetManifest, ManifestEntry
from .mask import MaskRaster, confusion, rle_decode, rle_from_json, rle_to_json
from .metrics import (
    MetricReport,
    aggregate_global,
    compute_metrics,
    report_to_json,
)
from .pngio import read_mask_png, write_mask_png
from .proposals import rank_by_area, select_drivable
from .protocol import join_classifications, load_classifications, load_proposals
from .scef import batch_generate
from .storage import atomic_write_json, atomic_write_text
from .synth import NoiseSpec, perturb_and_classify, random_scene, render_scene

__all__ = [
    "ImageError",
    "run_labelgen",
    "run_evaluate",
    "run_scef",
    "emit_corpus",
    "sweep_rows_to_csv",
]

T = TypeVar("T")


@dataclass(frozen=True)
class ImageError:
    """One per-image failure inside a batch."""

    image: str
    error: str
    detail: str

    def to_json(self) -> dict:
        return {"image": self.image, "error": self.error, "detail": self.detail}


def _map_ordered(
    fn: Callable[[T], object], items: Sequence[T], workers: int
) -> list[object]:
    """Apply fn to items, preserving order; exceptions are returned in place."""
    def guarded(item: T) -> object:
        try:
            return fn(item)
        except Exception as exc:  # collected, classified by the caller
            return exc

    if workers <= 1 or len(items) <= 1:
        return [guarded(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(guarded, items))


def run_labelgen(
    manifest: DatasetManifest,
    proposals_root: str,
    classifications_root: str,
    out_root: str,
    config: PipelineConfig,
    splits: Sequence[str] = ("pretrain-pool",),
) -> tuple[dict, list[ImageError]]:
    """Generate one pseudo-label per manifest entry in the given splits.

    For each image: load its proposals and classification documents, keep
    the top-k proposals by area (unless disabled), pick the drivable one,
    and write <out>/pseudolabels/<id>.json plus a PNG of the same mask.
    Returns a summary (image and selection-reason counts) plus per-image
    errors.
    """
    entries = manifest.in_splits(splits)
    out_dir = os.path.join(out_root, "pseudolabels")
    os.makedirs(out_dir, exist_ok=True)

    def one(entry: ManifestEntry) -> str:
        pdoc_path = entry.proposals_path or os.path.join(proposals_root, f"{entry.id}.json")
        cdoc_path = os.path.join(classifications_root, f"{entry.id}.json")
        for path, what in ((pdoc_path, "proposals document"), (cdoc_path, "classifications document")):
            if not os.path.exists(path):
                raise MissingArtifact(f"{what} not found: {path}")
        pdoc = load_proposals(pdoc_path)
        cdoc = load_classifications(cdoc_path)
        if pdoc.image != entry.id or cdoc.image != entry.id:
            raise ParseError(
                f"document image id {pdoc.image!r}/{cdoc.image!r} does not match entry {entry.id!r}"
            )
        joined, _missing = join_classifications(pdoc, cdoc)
        if config.apply_topk_at_inference:
            joined = rank_by_area(joined, top_k=config.top_k)
        else:
            joined = [p for p in joined if p.area > 0]
        if not joined:
            raise NoProposals(f"image {entry.id}: no nonzero-area proposals")
        selection = select_drivable(joined, drivable_class=config.drivable_class)
        chosen = next(p for p in joined if p.id == selection.chosen)
        record = {
            "image": entry.id,
            "mask": rle_to_json(chosen.mask),
            "chosen": selection.chosen,
            "reason": selection.reason,
            "drivable_score": selection.drivable_score,
        }
        atomic_write_json(os.path.join(out_dir, f"{entry.id}.json"), record)
        write_mask_png(rle_decode(chosen.mask), os.path.join(out_dir, f"{entry.id}.png"))
        return selection.reason

    results = _map_ordered(one, entries, config.workers)
    errors: list[ImageError] = []
    reasons: dict[str, int] = {}
    done = 0
    for entry, res in zip(entries, results):
        if isinstance(res, LabelForgeError):
            errors.append(ImageError(entry.id, type(res).__name__, str(res)))
        elif isinstance(res, Exception):
            raise res
        else:
            done += 1
            reasons[res] = reasons.get(res, 0) + 1  # type: ignore[index]
    summary = {
        "images": done,
        "labeled_drivable": reasons.get("labeled-drivable", 0),
        "fallback_best_score": reasons.get("fallback-best-score", 0),
    }
    return summary, errors


def _read_any_mask(path_json: str, path_png: str, what: str) -> MaskRaster:
    """A mask stored either as a pseudo-label JSON or as a PNG."""
    if os.path.exists(path_json):
        import json

        with open(path_json, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"cannot read {path_json}: {exc}") from exc
        if isinstance(obj, dict) and "mask" in obj:
            return rle_decode(rle_from_json(obj["mask"]))
        return rle_decode(rle_from_json(obj))
    if os.path.exists(path_png):
        return read_mask_png(path_png)
    raise MissingPair(f"no {what} mask found: {path_json} / {path_png}")


def _mask_ids(root: str) -> set[str]:
    try:
        names = os.listdir(root)
    except FileNotFoundError as exc:
        raise MissingArtifact(f"directory not found: {root}") from exc
    out = set()
    for n in names:
        stem, ext = os.path.splitext(n)
        if ext in (".json", ".png") and stem and not n.startswith("."):
            out.add(stem)
    return out


def run_evaluate(
    pred_root: str,
    gt_root: str,
    out_root: Optional[str] = None,
    workers: int = 1,
) -> tuple[Optional[MetricReport], list[tuple[str, MetricReport]], list[ImageError]]:
    """Score predictions against ground truth, id by id.

    Ids come from the union of both directories; an id present on only one
    side is reported as a MissingPair error. Returns the globally
    accumulated report (None when nothing matched), per-image reports, and
    errors. When out_root is given, writes report.json and per_image.csv.
    """
    ids = sorted(_mask_ids(pred_root) | _mask_ids(gt_root))

    def one(image_id: str) -> tuple[str, MetricReport]:
        pred = _read_any_mask(
            os.path.join(pred_root, f"{image_id}.json"),
            os.path.join(pred_root, f"{image_id}.png"),
            "prediction",
        )
        gt = _read_any_mask(
            os.path.join(gt_root, f"{image_id}.json"),
            os.path.join(gt_root, f"{image_id}.png"),
            "ground truth",
        )
        return image_id, compute_metrics(confusion(pred, gt))

    results = _map_ordered(one, ids, workers)
    per_image: list[tuple[str, MetricReport]] = []
    errors: list[ImageError] = []
    for image_id, res in zip(ids, results):
        if isinstance(res, LabelForgeError):
            errors.append(ImageError(image_id, type(res).__name__, str(res)))
        elif isinstance(res, Exception):
            raise res
        else:
            per_image.append(res)  # type: ignore[arg-type]

    report: Optional[MetricReport] = None
    if per_image:
        report = aggregate_global(r.source_counts for _, r in per_image)

    if out_root is not None and report is not None:
        os.makedirs(out_root, exist_ok=True)
        atomic_write_json(os.path.join(out_root, "report.json"), report_to_json(report))
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["image", "accuracy", "precision", "recall", "f1", "iou"])
        for image_id, r in per_image:
            writer.writerow(
                [
                    image_id,
                    f"{r.accuracy:.6f}",
                    f"{r.precision:.6f}",
                    f"{r.recall:.6f}",
                    f"{r.f1:.6f}",
                    f"{r.iou:.6f}",
                ]
            )
        atomic_write_text(os.path.join(out_root, "per_image.csv"), buf.getvalue())
    return report, per_image, errors


def run_scef(
    manifest: DatasetManifest,
    proposals_root: str,
    classifications_root: str,
    gt_root: str,
    out_root: str,
    config: PipelineConfig,
    splits: Sequence[str] = ("train", "val", "test"),
) -> dict:
    """Wrapper over the pair generator returning just the batch summary."""
    _records, summary = batch_generate(
        manifest,
        proposals_root=proposals_root,
        classifications_root=classifications_root,
        gt_root=gt_root,
        out_root=out_root,
        drivable_class=config.drivable_class,
        top_k=config.top_k,
        splits=splits,
    )
    return summary


def emit_corpus(
    out_root: str,
    n_scenes: int,
    noise: NoiseSpec,
    seed: int = 0,
    width: int = 64,
    height: int = 64,
    distractors: int = 3,
) -> DatasetManifest:
    """Materialize a synthetic corpus in the pipeline's exchange layout.

    Writes <out>/proposals/<id>.json, <out>/classifications/<id>.json,
    <out>/gt/<id>.png, and <out>/manifest.json with every scene in the
    pretrain-pool split (gt attached so the corpus can also be evaluated or
    fed to pair generation). Scene ids are scene-0000, scene-0001, ...
    """
    from .manifest import save_manifest
    from .protocol import save_classifications, save_proposals

    entries = []
    for i in range(n_scenes):
        image_id = f"scene-{i:04d}"
        scene = random_scene(width, height, distractors, seed=_scene_seed(seed, i))
        gt, regions = render_scene(scene)
        pdoc, cdoc = perturb_and_classify(
            gt, regions, noise, seed=_scene_seed(seed, i) ^ 0x5EED, image_id=image_id
        )
        save_proposals(pdoc, os.path.join(out_root, "proposals", f"{image_id}.json"))
        save_classifications(cdoc, os.path.join(out_root, "classifications", f"{image_id}.json"))
        gt_rel = os.path.join("gt", f"{image_id}.png")
        write_mask_png(gt, os.path.join(out_root, gt_rel))
        entries.append(
            ManifestEntry(
                id=image_id,
                split="pretrain-pool",
                gt_path=gt_rel,
                proposals_path=os.path.join("proposals", f"{image_id}.json"),
            )
        )
    manifest = DatasetManifest(entries=tuple(entries), split_seed=seed)
    save_manifest(manifest, os.path.join(out_root, "manifest.json"))
    return manifest


def _scene_seed(master: int, index: int) -> int:
    import numpy as np

    ss = np.random.SeedSequence(entropy=(master, index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sweep_rows_to_csv(rows) -> str:
    """Render quality-sweep rows as CSV (ratios, not percentages)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "boundary_jitter",
            "split_prob",
            "drop_prob",
            "classifier_confusion",
            "accuracy",
            "precision",
            "recall",
            "f1",
            "miou",
            "n_images",
        ]
    )
    for row in rows:
        n = row.noise
        if row.report is None:
            metrics = [""] * 5
        else:
            r = row.report
            metrics = [
                f"{r.accuracy:.6f}",
                f"{r.precision:.6f}",
                f"{r.recall:.6f}",
                f"{r.f1:.6f}",
                f"{r.iou:.6f}",
            ]
        writer.writerow(
            [
                _num(n.boundary_jitter),
                _num(n.split_prob),
                _num(n.drop_prob),
                _num(n.classifier_confusion),
                *metrics,
                row.n_images,
            ]
        )
    return buf.getvalue()


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:g}"
