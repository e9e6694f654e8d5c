"""Proposal ranking and drivable-mask selection.

A segmentation backend proposes many candidate masks per image; a zero-shot
classifier assigns each a label and per-class scores. This module keeps the
top candidates by pixel area and picks the one that will become the image's
pseudo-label.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import NoProposals
from .mask import RleMask, rle_area

__all__ = [
    "Proposal",
    "SelectionResult",
    "DRIVABLE_CLASS",
    "REASON_LABELED",
    "REASON_FALLBACK",
    "rank_by_area",
    "select_drivable",
]

DRIVABLE_CLASS = "drivable area"

REASON_LABELED = "labeled-drivable"
REASON_FALLBACK = "fallback-best-score"


@dataclass
class Proposal:
    """One candidate mask with its (optional) classification.

    class_scores maps label -> score in [0, 1]. When scores are present,
    class_label must equal the argmax of class_scores (ties broken by
    lexicographically smallest label). raw_score is whatever confidence the
    segmentation backend attached; it is carried through but never used for
    ranking or selection.
    """

    id: str
    mask: RleMask
    source_image: str
    class_label: str = ""
    class_scores: Optional[dict[str, float]] = None
    raw_score: Optional[float] = None

    def __post_init__(self) -> None:
        if self.class_scores is not None:
            if not self.class_scores:
                raise ValueError(f"proposal {self.id}: class_scores present but empty")
            for label, s in self.class_scores.items():
                if not (0.0 <= s <= 1.0):
                    raise ValueError(
                        f"proposal {self.id}: score for {label!r} out of [0, 1]: {s}"
                    )
            best = min(self.class_scores.items(), key=lambda kv: (-kv[1], kv[0]))[0]
            if self.class_label != best:
                raise ValueError(
                    f"proposal {self.id}: class_label {self.class_label!r} is not the "
                    f"argmax of class_scores ({best!r})"
                )

    @property
    def area(self) -> int:
        return rle_area(self.mask)

    def drivable_score(self, drivable_class: str = DRIVABLE_CLASS) -> Optional[float]:
        if self.class_scores is None:
            return None
        return self.class_scores.get(drivable_class)


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of select_drivable: which proposal and why."""

    chosen: str
    reason: str  # REASON_LABELED or REASON_FALLBACK
    drivable_score: Optional[float]


def rank_by_area(proposals: Sequence[Proposal], top_k: int = 10) -> list[Proposal]:
    """Top-k proposals by foreground area, descending.

    Zero-area proposals are dropped before ranking. Equal areas order by
    ascending id so the result is fully deterministic.
    """
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    alive = [p for p in proposals if p.area > 0]
    alive.sort(key=lambda p: (-p.area, p.id))
    return alive[:top_k]


def select_drivable(
    proposals: Sequence[Proposal], drivable_class: str = DRIVABLE_CLASS
) -> SelectionResult:
    """Pick the proposal to use as the drivable-area pseudo-label.

    Preference order:
      1. proposals whose class_label is the drivable class; best drivable
         score wins, ties by larger area, then ascending id;
      2. otherwise, if any proposal carries scores, the best drivable score
         overall (same tie chain), reported as a fallback;
      3. otherwise the largest area, ties by ascending id, also a fallback.
    """
    if not proposals:
        raise NoProposals("no proposals to select from")

    def score_key(p: Proposal) -> tuple:
        s = p.drivable_score(drivable_class)
        return (-(s if s is not None else float("-inf")), -p.area, p.id)

    labeled = [p for p in proposals if p.class_label == drivable_class]
    if labeled:
        best = min(labeled, key=score_key)
        return SelectionResult(
            chosen=best.id,
            reason=REASON_LABELED,
            drivable_score=best.drivable_score(drivable_class),
        )

    if any(p.class_scores is not None for p in proposals):
        best = min(proposals, key=score_key)
        return SelectionResult(
            chosen=best.id,
            reason=REASON_FALLBACK,
            drivable_score=best.drivable_score(drivable_class),
        )

    best = min(proposals, key=lambda p: (-p.area, p.id))
    return SelectionResult(chosen=best.id, reason=REASON_FALLBACK, drivable_score=None)
