"""Synthetic road scenes for exercising the pipeline without real models.

A scene is a convex road polygon (ground truth) plus axis-aligned rectangle
distractors, all pairwise disjoint. A noise model then corrupts the regions
into "proposals" and fakes a classifier over them, so the full pipeline can
be measured against known ground truth at controlled noise levels.

All randomness flows through numpy's default_rng (PCG64); a (scene, noise,
seed) triple fully determines every output byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateRoad, LabelForgeError
from .mask import MaskRaster, area, confusion, rle_decode, rle_encode
from .metrics import MetricReport, aggregate_global
from .proposals import DRIVABLE_CLASS, rank_by_area, select_drivable
from .protocol import (
    ClassificationDocument,
    ClassificationResult,
    ProposalEntry,
    ProposalsDocument,
    join_classifications,
)

__all__ = [
    "SceneSpec",
    "NoiseSpec",
    "SweepRow",
    "trapezoid_road",
    "random_scene",
    "rasterize_polygon",
    "render_scene",
    "perturb_and_classify",
    "run_quality_sweep",
    "DISTRACTOR_LABELS",
]

# labels the fake zero-shot classifier hands to non-road proposals
DISTRACTOR_LABELS = ("vehicle", "building", "vegetation", "sidewalk", "sky")

_PLACEMENT_ATTEMPTS = 200


@dataclass(frozen=True)
class SceneSpec:
    """Geometry of one synthetic scene.

    road is a convex polygon in pixel coordinates (x right, y down), given
    as (x, y) vertex tuples. Distractors are rejection-sampled axis-aligned
    rectangles disjoint from the road and from each other; their side
    lengths are drawn from distractor_size (inclusive bounds).
    """

    width: int
    height: int
    road: tuple[tuple[float, float], ...]
    distractor_count: int = 0
    distractor_size: tuple[int, int] = (4, 10)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"scene must be at least 1x1, got {self.width}x{self.height}")
        road = tuple((float(x), float(y)) for x, y in self.road)
        object.__setattr__(self, "road", road)
        if len(road) < 3:
            raise DegenerateRoad(f"road polygon needs >= 3 vertices, got {len(road)}")
        for x, y in road:
            if not (0.0 <= x <= self.width and 0.0 <= y <= self.height):
                raise DegenerateRoad(
                    f"road vertex ({x}, {y}) outside {self.width}x{self.height} image"
                )
        if self.distractor_count < 0:
            raise ValueError("distractor_count must be >= 0")
        lo, hi = self.distractor_size
        if not (1 <= lo <= hi):
            raise ValueError(f"bad distractor_size range: {self.distractor_size}")


@dataclass(frozen=True)
class NoiseSpec:
    """Corruption levels applied between ground truth and 'proposals'.

    boundary_jitter: max per-vertex displacement in pixels when the region
        outlines are re-drawn (0 reproduces the regions bit for bit).
    split_prob: chance the road proposal arrives as two fragments.
    drop_prob: chance the road proposal is missing entirely.
    classifier_confusion: chance the drivable label lands on a random
        distractor instead of the road.
    """

    boundary_jitter: float = 0.0
    split_prob: float = 0.0
    drop_prob: float = 0.0
    classifier_confusion: float = 0.0

    def __post_init__(self) -> None:
        if self.boundary_jitter < 0:
            raise ValueError("boundary_jitter must be >= 0")
        for name in ("split_prob", "drop_prob", "classifier_confusion"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {v}")


def trapezoid_road(
    width: int,
    height: int,
    top_width_frac: float = 0.25,
    bottom_width_frac: float = 0.8,
    top_y_frac: float = 0.45,
) -> tuple[tuple[float, float], ...]:
    """A road-like trapezoid: narrow at the horizon, wide at the bottom edge."""
    cx = width / 2.0
    top_y = height * top_y_frac
    top_half = width * top_width_frac / 2.0
    bot_half = width * bottom_width_frac / 2.0
    return (
        (cx - top_half, top_y),
        (cx + top_half, top_y),
        (cx + bot_half, float(height)),
        (cx - bot_half, float(height)),
    )


def random_scene(
    width: int,
    height: int,
    distractor_count: int,
    seed: int,
    distractor_size: tuple[int, int] = (4, 10),
) -> SceneSpec:
    """A randomized trapezoid road; geometry drawn from the seed."""
    rng = np.random.default_rng(seed)
    road = trapezoid_road(
        width,
        height,
        top_width_frac=float(rng.uniform(0.15, 0.35)),
        bottom_width_frac=float(rng.uniform(0.6, 0.95)),
        top_y_frac=float(rng.uniform(0.35, 0.55)),
    )
    return SceneSpec(
        width=width,
        height=height,
        road=road,
        distractor_count=distractor_count,
        distractor_size=distractor_size,
        seed=seed,
    )


def rasterize_polygon(
    vertices: Sequence[tuple[float, float]], width: int, height: int
) -> MaskRaster:
    """Even-odd fill: a pixel is foreground when its center is inside."""
    vx = np.asarray([v[0] for v in vertices], dtype=np.float64)
    vy = np.asarray([v[1] for v in vertices], dtype=np.float64)
    xs = np.arange(width, dtype=np.float64) + 0.5
    ys = np.arange(height, dtype=np.float64) + 0.5
    X, Y = np.meshgrid(xs, ys)
    inside = np.zeros((height, width), dtype=bool)
    n = len(vertices)
    for i in range(n):
        x1, y1 = vx[i], vy[i]
        x2, y2 = vx[(i + 1) % n], vy[(i + 1) % n]
        if y1 == y2:
            continue  # horizontal edges never cross a horizontal ray test line
        crosses = (y1 <= Y) != (y2 <= Y)
        x_at = x1 + (Y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (X < x_at)
    return MaskRaster(inside)


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; points is (n, 2), returns hull vertices CCW."""
    pts = np.unique(points, axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.asarray(lower[:-1] + upper[:-1], dtype=np.float64)


def render_scene(spec: SceneSpec) -> tuple[MaskRaster, list[MaskRaster]]:
    """Rasterize a scene into (ground truth road, all regions).

    regions[0] is always the road; the rest are distractor rectangles,
    pairwise disjoint from the road and each other. A distractor that cannot
    be placed after a bounded number of rejection-sampling attempts is
    skipped, so the list may be shorter than requested on crowded scenes.
    """
    road = rasterize_polygon(spec.road, spec.width, spec.height)
    if area(road) == 0:
        raise DegenerateRoad("road polygon rasterizes to zero pixels")
    rng = np.random.default_rng(spec.seed)
    occupied = road.pixels.copy()
    regions: list[MaskRaster] = [road]
    lo, hi = spec.distractor_size
    for _ in range(spec.distractor_count):
        placed = False
        for _attempt in range(_PLACEMENT_ATTEMPTS):
            rw = int(rng.integers(lo, hi + 1))
            rh = int(rng.integers(lo, hi + 1))
            if rw > spec.width or rh > spec.height:
                continue
            x0 = int(rng.integers(0, spec.width - rw + 1))
            y0 = int(rng.integers(0, spec.height - rh + 1))
            window = occupied[y0 : y0 + rh, x0 : x0 + rw]
            if window.any():
                continue
            rect = np.zeros_like(occupied)
            rect[y0 : y0 + rh, x0 : x0 + rw] = True
            occupied |= rect
            regions.append(MaskRaster(rect))
            placed = True
            break
        if not placed:
            continue
    return road, regions


def _jitter_mask(mask: MaskRaster, jitter: float, rng: np.random.Generator) -> MaskRaster:
    """Displace the region outline and re-rasterize.

    The outline is the convex hull of the foreground pixel centers (exact
    for rectangles and convex roads). Each hull vertex moves by integer
    offsets in [-jitter, jitter]. Regions too small to carry a polygon are
    translated instead, and a jitter that rasterizes to nothing falls back
    to the original mask so proposals never vanish by accident.
    """
    j = int(round(jitter))
    if j <= 0:
        return mask
    ys, xs = np.nonzero(mask.pixels)
    pts = np.stack([xs + 0.5, ys + 0.5], axis=1)
    hull = _convex_hull(pts)
    if len(hull) < 3:
        dx = int(rng.integers(-j, j + 1))
        dy = int(rng.integers(-j, j + 1))
        shifted = np.zeros_like(mask.pixels)
        src = mask.pixels
        h, w = src.shape
        ys2, xs2 = np.nonzero(src)
        ys2 = ys2 + dy
        xs2 = xs2 + dx
        keep = (ys2 >= 0) & (ys2 < h) & (xs2 >= 0) & (xs2 < w)
        shifted[ys2[keep], xs2[keep]] = True
        if not shifted.any():
            return mask
        return MaskRaster(shifted)
    offsets = rng.integers(-j, j + 1, size=hull.shape)
    moved = hull + offsets
    out = rasterize_polygon([(float(x), float(y)) for x, y in moved], mask.width, mask.height)
    if area(out) == 0:
        return mask
    return out


def _split_road(road: MaskRaster, rng: np.random.Generator) -> list[MaskRaster]:
    """Cut the road at a random interior column into two fragments."""
    cols = np.nonzero(road.pixels.any(axis=0))[0]
    if len(cols) < 2:
        return [road]
    cut = int(rng.integers(cols[0] + 1, cols[-1] + 1))
    left = road.pixels.copy()
    left[:, cut:] = False
    right = road.pixels.copy()
    right[:, :cut] = False
    parts = [MaskRaster(left), MaskRaster(right)]
    return [p for p in parts if area(p) > 0] or [road]


def perturb_and_classify(
    gt: MaskRaster,
    regions: Sequence[MaskRaster],
    noise: NoiseSpec,
    seed: int = 0,
    image_id: str = "scene",
    drivable_class: str = DRIVABLE_CLASS,
) -> tuple[ProposalsDocument, ClassificationDocument]:
    """Corrupt regions into proposals and fake a classifier pass over them.

    regions[0] must be the true road (as render_scene returns). With all
    noise at zero the proposal masks equal the regions bit for bit, the road
    proposal is labeled with the drivable class at score 1.0, and every
    distractor gets a non-drivable label.
    """
    if not regions:
        raise LabelForgeError("need at least the road region")
    if regions[0] != gt:
        raise ValueError("regions[0] must be the ground-truth road")
    rng = np.random.default_rng(seed)

    road_masks: list[MaskRaster]
    if noise.drop_prob > 0 and rng.random() < noise.drop_prob:
        road_masks = []
    elif noise.split_prob > 0 and rng.random() < noise.split_prob:
        road_masks = _split_road(regions[0], rng)
    else:
        road_masks = [regions[0]]

    named: list[tuple[str, MaskRaster, bool]] = []  # (id, mask, is_road_piece)
    if len(road_masks) == 1:
        named.append(("r00", road_masks[0], True))
    else:
        for k, m in enumerate(road_masks):
            named.append((f"r00{chr(ord('a') + k)}", m, True))
    for idx, m in enumerate(regions[1:], start=1):
        named.append((f"d{idx:02d}", m, False))

    if noise.boundary_jitter > 0:
        named = [(pid, _jitter_mask(m, noise.boundary_jitter, rng), road) for pid, m, road in named]

    # decide which proposal the classifier calls drivable
    road_ids = [pid for pid, _, is_road in named if is_road]
    distractor_ids = [pid for pid, _, is_road in named if not is_road]
    drivable_id: Optional[str] = None
    if road_ids:
        by_id = {pid: m for pid, m, _ in named}
        best_road = max(road_ids, key=lambda pid: (area(by_id[pid]), pid))
        confused = noise.classifier_confusion > 0 and rng.random() < noise.classifier_confusion
        if confused and distractor_ids:
            drivable_id = distractor_ids[int(rng.integers(0, len(distractor_ids)))]
        else:
            drivable_id = best_road

    proposals = tuple(ProposalEntry(id=pid, mask=rle_encode(m)) for pid, m, _ in named)
    results = []
    for pid, _m, _is_road in named:
        if pid == drivable_id:
            results.append(
                ClassificationResult(
                    proposal_id=pid,
                    class_label=drivable_class,
                    class_scores={drivable_class: 1.0},
                )
            )
        else:
            s = float(rng.uniform(0.0, 0.5))
            label = DISTRACTOR_LABELS[int(rng.integers(0, len(DISTRACTOR_LABELS)))]
            results.append(
                ClassificationResult(
                    proposal_id=pid,
                    class_label=label,
                    class_scores={drivable_class: round(s, 6), label: round(1.0 - s, 6)},
                )
            )

    pdoc = ProposalsDocument(
        image=image_id,
        image_size=(gt.width, gt.height),
        generator="synth-harness",
        proposals=proposals,
    )
    cdoc = ClassificationDocument(
        image=image_id, classifier="synth-harness", results=tuple(results)
    )
    return pdoc, cdoc


@dataclass(frozen=True)
class SweepRow:
    """Aggregate pipeline quality at one noise level."""

    noise: NoiseSpec
    report: Optional[MetricReport]
    n_images: int
    n_errors: int


def _cell_seed(master_seed: int, noise_index: int, scene_index: int) -> int:
    ss = np.random.SeedSequence(entropy=(master_seed, noise_index, scene_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_quality_sweep(
    noise_grid: Sequence[NoiseSpec],
    scenes: Sequence[SceneSpec],
    seed: int = 0,
    top_k: int = 10,
    drivable_class: str = DRIVABLE_CLASS,
) -> list[SweepRow]:
    """Measure end-to-end selection quality across a noise grid.

    For every (noise, scene) cell: render, corrupt, rank by area, select the
    drivable proposal, and score it against the known road. Confusion counts
    accumulate globally per noise level. Per-cell failures (for example the
    road proposal dropped and nothing else survives ranking) count as errors
    and the sweep moves on; a level where every cell failed reports no
    metrics. Each cell's randomness comes from a child seed derived from
    (seed, noise index, scene index), so rows are independent of iteration
    order.
    """
    rows: list[SweepRow] = []
    for ni, noise in enumerate(noise_grid):
        counts = []
        errors = 0
        for si, scene in enumerate(scenes):
            try:
                gt, regions = render_scene(scene)
                pdoc, cdoc = perturb_and_classify(
                    gt,
                    regions,
                    noise,
                    seed=_cell_seed(seed, ni, si),
                    image_id=f"scene-{si:04d}",
                    drivable_class=drivable_class,
                )
                joined, _missing = join_classifications(pdoc, cdoc)
                ranked = rank_by_area(joined, top_k=top_k)
                selection = select_drivable(ranked, drivable_class=drivable_class)
                chosen = next(p for p in ranked if p.id == selection.chosen)
                counts.append(confusion(rle_decode(chosen.mask), gt))
            except LabelForgeError:
                errors += 1
        report = aggregate_global(counts) if counts else None
        rows.append(SweepRow(noise=noise, report=report, n_images=len(counts), n_errors=errors))
    return rows
