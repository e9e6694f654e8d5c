"""Dataset manifest: which image is in which split, and where its files live.

The manifest is a single JSON file:

    {"schema_version": 1, "split_seed": <int>, "entries": [...]}

Each entry carries an id, a split name, and optional artifact paths. Entries
are kept sorted by id so saving the same manifest always produces the same
bytes. Splitting is a seeded permutation: same ids + same seed = same file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DuplicateId,
    InsufficientCandidates,
    InsufficientIds,
    ParseError,
    SchemaVersionMismatch,
    UnknownId,
    UnknownKind,
)
from .storage import atomic_write_text, canonical_json

__all__ = [
    "ManifestEntry",
    "DatasetManifest",
    "SPLITS",
    "LABELED_SPLITS",
    "ARTIFACT_KINDS",
    "DEFAULT_SPLIT_SIZES",
    "split_dataset",
    "build_pretrain_pool",
    "attach_artifacts",
    "save_manifest",
    "load_manifest",
    "rebase_paths",
    "validate_manifest",
]

SCHEMA_VERSION = 1
SPLITS = ("train", "val", "test", "pretrain-pool", "unassigned")
LABELED_SPLITS = ("train", "val", "test")
DEFAULT_SPLIT_SIZES = (173, 58, 58)

# artifact kind -> entry attribute
ARTIFACT_KINDS = {
    "image": "image_path",
    "gt": "gt_path",
    "proposals": "proposals_path",
    "pseudolabel": "pseudolabel_path",
}

_ENTRY_FIELD_ORDER = (
    "id",
    "split",
    "image_path",
    "gt_path",
    "proposals_path",
    "pseudolabel_path",
    "category_hint",
)


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    split: str = "unassigned"
    image_path: Optional[str] = None
    gt_path: Optional[str] = None
    proposals_path: Optional[str] = None
    pseudolabel_path: Optional[str] = None
    category_hint: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("entry id must be non-empty")
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}; expected one of {SPLITS}")


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    split_seed: int
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "entries", tuple(sorted(self.entries, key=lambda e: e.id))
        )
        seen: set[str] = set()
        for e in self.entries:
            if e.id in seen:
                raise DuplicateId(f"duplicate manifest entry id {e.id!r}")
            seen.add(e.id)

    def by_id(self, entry_id: str) -> ManifestEntry:
        for e in self.entries:
            if e.id == entry_id:
                return e
        raise UnknownId(f"no manifest entry with id {entry_id!r}")

    def split_counts(self) -> dict[str, int]:
        counts = {s: 0 for s in SPLITS}
        for e in self.entries:
            counts[e.split] += 1
        return counts

    def in_splits(self, splits: Iterable[str]) -> list[ManifestEntry]:
        wanted = set(splits)
        return [e for e in self.entries if e.split in wanted]


def split_dataset(
    ids: Sequence[str],
    sizes: tuple[int, int, int] = DEFAULT_SPLIT_SIZES,
    seed: int = 0,
) -> DatasetManifest:
    """Assign ids to train/val/test by a seeded permutation.

    Ids are sorted before permuting, so the caller's ordering is irrelevant:
    the (id set, sizes, seed) triple fully determines the result. Ids beyond
    the three sizes are kept with split "unassigned".
    """
    id_list = sorted(ids)
    seen: set[str] = set()
    for i in id_list:
        if i in seen:
            raise DuplicateId(f"duplicate id in split input: {i!r}")
        seen.add(i)
    n_train, n_val, n_test = sizes
    if min(sizes) < 0:
        raise ValueError(f"split sizes must be non-negative, got {sizes}")
    needed = n_train + n_val + n_test
    if len(id_list) < needed:
        raise InsufficientIds(
            f"need {needed} ids for sizes {sizes}, got {len(id_list)}"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(id_list))
    shuffled = [id_list[i] for i in perm]
    assignment: dict[str, str] = {}
    cursor = 0
    for split_name, count in (("train", n_train), ("val", n_val), ("test", n_test)):
        for i in shuffled[cursor : cursor + count]:
            assignment[i] = split_name
        cursor += count
    entries = tuple(
        ManifestEntry(id=i, split=assignment.get(i, "unassigned")) for i in id_list
    )
    return DatasetManifest(entries=entries, split_seed=seed)


def build_pretrain_pool(
    manifest: DatasetManifest,
    candidate_ids: Sequence[str],
    multiplier: int = 5,
    seed: int = 0,
) -> DatasetManifest:
    """Add multiplier * (labeled entry count) unlabeled entries to the manifest.

    Candidates are sampled uniformly without replacement using the given
    seed (candidates are sorted first, so ordering does not matter). A
    candidate that collides with an existing entry id is an error, as is a
    duplicate within the candidate list itself.
    """
    if multiplier < 1:
        raise ValueError(f"multiplier must be >= 1, got {multiplier}")
    cand = sorted(candidate_ids)
    seen: set[str] = set()
    for c in cand:
        if c in seen:
            raise DuplicateId(f"duplicate candidate id {c!r}")
        seen.add(c)
    existing = {e.id for e in manifest.entries}
    clash = seen & existing
    if clash:
        raise DuplicateId(
            f"candidate ids already present in manifest: {sorted(clash)[:5]}"
        )
    labeled = len(manifest.in_splits(LABELED_SPLITS))
    need = multiplier * labeled
    if len(cand) < need:
        raise InsufficientCandidates(
            f"pool needs {need} candidates ({multiplier} x {labeled} labeled), "
            f"got {len(cand)}"
        )
    rng = np.random.default_rng(seed)
    picked = [cand[i] for i in rng.permutation(len(cand))[:need]]
    pool_entries = tuple(ManifestEntry(id=i, split="pretrain-pool") for i in picked)
    return DatasetManifest(
        entries=manifest.entries + pool_entries,
        split_seed=manifest.split_seed,
        schema_version=manifest.schema_version,
    )


def attach_artifacts(
    manifest: DatasetManifest, entry_id: str, kind: str, path: str
) -> DatasetManifest:
    """Return a new manifest with one entry's artifact path set."""
    if kind not in ARTIFACT_KINDS:
        raise UnknownKind(
            f"unknown artifact kind {kind!r}; expected one of {sorted(ARTIFACT_KINDS)}"
        )
    target = manifest.by_id(entry_id)  # raises UnknownId
    updated = replace(target, **{ARTIFACT_KINDS[kind]: path})
    entries = tuple(updated if e.id == entry_id else e for e in manifest.entries)
    return DatasetManifest(
        entries=entries,
        split_seed=manifest.split_seed,
        schema_version=manifest.schema_version,
    )


def rebase_paths(manifest: DatasetManifest, base_dir: str) -> DatasetManifest:
    """Resolve relative artifact paths against base_dir.

    Manifest files record paths relative to their own location so a corpus
    directory can be moved wholesale; consumers call this after loading.
    """
    def fix(p: Optional[str]) -> Optional[str]:
        if p is None or os.path.isabs(p):
            return p
        return os.path.join(base_dir, p)

    entries = tuple(
        replace(
            e,
            image_path=fix(e.image_path),
            gt_path=fix(e.gt_path),
            proposals_path=fix(e.proposals_path),
            pseudolabel_path=fix(e.pseudolabel_path),
        )
        for e in manifest.entries
    )
    return DatasetManifest(
        entries=entries,
        split_seed=manifest.split_seed,
        schema_version=manifest.schema_version,
    )


def _entry_to_json(e: ManifestEntry) -> dict:
    obj: dict = {}
    for name in _ENTRY_FIELD_ORDER:
        value = getattr(e, name)
        if value is not None:
            obj[name] = value
    return obj


def save_manifest(manifest: DatasetManifest, path: str) -> None:
    """Write the manifest atomically with a canonical field order."""
    obj = {
        "schema_version": manifest.schema_version,
        "split_seed": manifest.split_seed,
        "entries": [_entry_to_json(e) for e in manifest.entries],
    }
    atomic_write_text(path, canonical_json(obj))


def load_manifest(path: str) -> DatasetManifest:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read manifest {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError("manifest root must be an object")
    version = obj.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"manifest schema_version {version!r}, supported: {SCHEMA_VERSION}"
        )
    if not isinstance(obj.get("split_seed"), int):
        raise ParseError("manifest split_seed must be an integer")
    raw_entries = obj.get("entries")
    if not isinstance(raw_entries, list):
        raise ParseError("manifest entries must be a list")
    entries = []
    for raw in raw_entries:
        if not isinstance(raw, dict) or "id" not in raw:
            raise ParseError(f"bad manifest entry: {raw!r}")
        kwargs = {}
        for name in _ENTRY_FIELD_ORDER:
            if name in raw:
                kwargs[name] = raw[name]
        try:
            entries.append(ManifestEntry(**kwargs))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad manifest entry {raw.get('id')!r}: {exc}") from exc
    return DatasetManifest(
        entries=tuple(entries),
        split_seed=obj["split_seed"],
        schema_version=version,
    )


def validate_manifest(
    manifest: DatasetManifest,
    require_gt_for_labeled: bool = True,
    check_files: bool = False,
    base_dir: str = ".",
) -> list[str]:
    """Structural checks; returns human-readable violations (empty = valid).

    Uniqueness and legal split names are enforced at construction, so this
    focuses on completeness: labeled entries need a gt_path, and optionally
    every referenced path must exist on disk.
    """
    problems: list[str] = []
    for e in manifest.entries:
        if require_gt_for_labeled and e.split in LABELED_SPLITS and not e.gt_path:
            problems.append(f"{e.id}: split {e.split} requires gt_path")
        if check_files:
            for name in ("image_path", "gt_path", "proposals_path", "pseudolabel_path"):
                p = getattr(e, name)
                if p is not None:
                    full = p if os.path.isabs(p) else os.path.join(base_dir, p)
                    if not os.path.exists(full):
                        problems.append(f"{e.id}: {name} missing on disk: {p}")
    return problems
