"""File-based exchange with segmentation and classification backends.

The heavy models run elsewhere; they communicate with this pipeline purely
through per-image JSON documents on disk:

    <root>/proposals/<image-id>.json        masks proposed for one image
    <root>/classifications/<image-id>.json  labels + scores per proposal

A streaming or HTTP transport is deliberately out of scope: documents are
written atomically, validated strictly on load, and joined by proposal id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Optional

from .errors import (
    DimensionMismatch,
    DuplicateId,
    ImageIdMismatch,
    ParseError,
)
from .mask import RleMask, rle_from_json, rle_to_json
from .proposals import Proposal
from .storage import atomic_write_json

__all__ = [
    "ProposalEntry",
    "ProposalsDocument",
    "ClassificationResult",
    "ClassificationDocument",
    "proposals_to_json",
    "proposals_from_json",
    "classifications_to_json",
    "classifications_from_json",
    "save_proposals",
    "load_proposals",
    "save_classifications",
    "load_classifications",
    "join_classifications",
    "mock_backend",
]


@dataclass(frozen=True)
class ProposalEntry:
    """One proposed mask as the segmentation backend reported it."""

    id: str
    mask: RleMask
    raw_score: Optional[float] = None


@dataclass(frozen=True)
class ProposalsDocument:
    image: str
    image_size: tuple[int, int]  # (width, height)
    generator: str
    proposals: tuple[ProposalEntry, ...]


@dataclass(frozen=True)
class ClassificationResult:
    proposal_id: str
    class_label: str
    class_scores: dict[str, float]


@dataclass(frozen=True)
class ClassificationDocument:
    image: str
    classifier: str
    results: tuple[ClassificationResult, ...]


def proposals_to_json(doc: ProposalsDocument) -> dict:
    out: dict = {
        "image": doc.image,
        "image_size": [doc.image_size[0], doc.image_size[1]],
        "generator": doc.generator,
        "proposals": [],
    }
    for p in doc.proposals:
        entry: dict = {"id": p.id, "mask": rle_to_json(p.mask)}
        if p.raw_score is not None:
            entry["raw_score"] = p.raw_score
        out["proposals"].append(entry)
    return out


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise ParseError(message)


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def proposals_from_json(obj: Any) -> ProposalsDocument:
    """Parse and validate a proposals document.

    Field errors raise ParseError; a mask whose run sum disagrees with the
    declared size raises the dimension family; duplicated proposal ids raise
    DuplicateId.
    """
    _expect(isinstance(obj, dict), "proposals document must be an object")
    for name in ("image", "image_size", "generator", "proposals"):
        _expect(name in obj, f"proposals document missing field {name!r}")
    _expect(isinstance(obj["image"], str) and obj["image"] != "", "image must be a non-empty string")
    _expect(isinstance(obj["generator"], str), "generator must be a string")
    size = obj["image_size"]
    _expect(
        isinstance(size, (list, tuple))
        and len(size) == 2
        and all(isinstance(v, int) and not isinstance(v, bool) for v in size),
        "image_size must be [width, height] integers",
    )
    w, h = int(size[0]), int(size[1])
    _expect(w >= 1 and h >= 1, f"image_size must be positive, got {w}x{h}")
    _expect(isinstance(obj["proposals"], list), "proposals must be a list")

    entries: list[ProposalEntry] = []
    seen: set[str] = set()
    for raw in obj["proposals"]:
        _expect(isinstance(raw, dict), "each proposal must be an object")
        _expect("id" in raw and "mask" in raw, "proposal needs id and mask")
        pid = raw["id"]
        _expect(isinstance(pid, str) and pid != "", "proposal id must be a non-empty string")
        if pid in seen:
            raise DuplicateId(f"duplicate proposal id {pid!r}")
        seen.add(pid)
        mask = rle_from_json(raw["mask"])  # RunSumMismatch / NonCanonical surface here
        if (mask.width, mask.height) != (w, h):
            raise DimensionMismatch(
                f"proposal {pid}: mask is {mask.width}x{mask.height}, "
                f"document declares {w}x{h}"
            )
        raw_score = raw.get("raw_score")
        if raw_score is not None:
            _expect(_is_number(raw_score), f"proposal {pid}: raw_score must be a number")
            raw_score = float(raw_score)
        entries.append(ProposalEntry(id=pid, mask=mask, raw_score=raw_score))
    return ProposalsDocument(
        image=obj["image"],
        image_size=(w, h),
        generator=obj["generator"],
        proposals=tuple(entries),
    )


def classifications_to_json(doc: ClassificationDocument) -> dict:
    return {
        "image": doc.image,
        "classifier": doc.classifier,
        "results": [
            {
                "proposal_id": r.proposal_id,
                "class_label": r.class_label,
                # sorted keys keep the bytes stable across runs
                "class_scores": {k: r.class_scores[k] for k in sorted(r.class_scores)},
            }
            for r in doc.results
        ],
    }


def classifications_from_json(obj: Any) -> ClassificationDocument:
    _expect(isinstance(obj, dict), "classifications document must be an object")
    for name in ("image", "classifier", "results"):
        _expect(name in obj, f"classifications document missing field {name!r}")
    _expect(isinstance(obj["image"], str) and obj["image"] != "", "image must be a non-empty string")
    _expect(isinstance(obj["classifier"], str), "classifier must be a string")
    _expect(isinstance(obj["results"], list), "results must be a list")
    results: list[ClassificationResult] = []
    seen: set[str] = set()
    for raw in obj["results"]:
        _expect(isinstance(raw, dict), "each result must be an object")
        for name in ("proposal_id", "class_label", "class_scores"):
            _expect(name in raw, f"classification result missing field {name!r}")
        pid = raw["proposal_id"]
        _expect(isinstance(pid, str) and pid != "", "proposal_id must be a non-empty string")
        if pid in seen:
            raise DuplicateId(f"duplicate classification for proposal {pid!r}")
        seen.add(pid)
        label = raw["class_label"]
        _expect(isinstance(label, str), f"result {pid}: class_label must be a string")
        scores = raw["class_scores"]
        _expect(isinstance(scores, dict) and scores, f"result {pid}: class_scores must be a non-empty object")
        clean: dict[str, float] = {}
        for k, v in scores.items():
            _expect(isinstance(k, str), f"result {pid}: score keys must be strings")
            _expect(_is_number(v), f"result {pid}: score for {k!r} must be a number")
            v = float(v)
            _expect(0.0 <= v <= 1.0, f"result {pid}: score for {k!r} out of [0, 1]: {v}")
            clean[k] = v
        results.append(
            ClassificationResult(proposal_id=pid, class_label=label, class_scores=clean)
        )
    return ClassificationDocument(
        image=obj["image"], classifier=obj["classifier"], results=tuple(results)
    )


def _load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def save_proposals(doc: ProposalsDocument, path: str) -> None:
    atomic_write_json(path, proposals_to_json(doc))


def load_proposals(path: str) -> ProposalsDocument:
    return proposals_from_json(_load_json(path))


def save_classifications(doc: ClassificationDocument, path: str) -> None:
    atomic_write_json(path, classifications_to_json(doc))


def load_classifications(path: str) -> ClassificationDocument:
    return classifications_from_json(_load_json(path))


def join_classifications(
    pdoc: ProposalsDocument, cdoc: ClassificationDocument
) -> tuple[list[Proposal], list[str]]:
    """Merge the two documents into classified Proposal objects.

    Returns (proposals, missing): proposals in document order, one per
    proposal that has a classification result; missing lists proposal ids
    without one (the caller decides whether that is fatal). A result whose
    proposal_id matches nothing in the proposals document is an error, as is
    a class_label that is not the argmax of its own scores.
    """
    if pdoc.image != cdoc.image:
        raise ImageIdMismatch(
            f"proposals are for {pdoc.image!r}, classifications for {cdoc.image!r}"
        )
    by_id = {r.proposal_id: r for r in cdoc.results}
    known = {p.id for p in pdoc.proposals}
    orphans = sorted(set(by_id) - known)
    if orphans:
        raise ParseError(
            f"classification results reference unknown proposal ids: {orphans[:5]}"
        )
    joined: list[Proposal] = []
    missing: list[str] = []
    for entry in pdoc.proposals:
        result = by_id.get(entry.id)
        if result is None:
            missing.append(entry.id)
            continue
        try:
            joined.append(
                Proposal(
                    id=entry.id,
                    mask=entry.mask,
                    source_image=pdoc.image,
                    class_label=result.class_label,
                    class_scores=dict(result.class_scores),
                    raw_score=entry.raw_score,
                )
            )
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
    return joined, missing


def mock_backend(scene, noise, seed: int = 0, image_id: str = "scene"):
    """Run the synthetic backend stand-in for one scene.

    Convenience wrapper so protocol consumers can produce valid document
    pairs without touching the synthesis module directly.
    """
    from .synth import perturb_and_classify, render_scene

    gt, regions = render_scene(scene)
    return perturb_and_classify(gt, regions, noise, seed=seed, image_id=image_id)
