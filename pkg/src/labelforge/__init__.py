"""labelforge: pseudo-label generation and evaluation for drivable-area masks.

The package turns raw mask proposals plus zero-shot classifications into
per-image pseudo-labels, swaps ground truth into fine-tuning pairs for
annotated images, tracks dataset splits in a manifest, and measures mask
quality with pixel-level metrics. A synthetic scene harness exercises the
whole pipeline at controlled noise levels.
"""

__version__ = "0.1.0"

from .errors import LabelForgeError
from .mask import (
    ConfusionCounts,
    MaskRaster,
    RleMask,
    area,
    confusion,
    iou,
    rle_decode,
    rle_encode,
)
from .metrics import (
    MetricReport,
    aggregate_global,
    aggregate_per_image_mean,
    compute_metrics,
)
from .proposals import Proposal, SelectionResult, rank_by_area, select_drivable
from .scef import LabeledPair, ScefRecord, generate_finetune_pairs

__all__ = [
    "__version__",
    "LabelForgeError",
    "MaskRaster",
    "RleMask",
    "ConfusionCounts",
    "area",
    "iou",
    "confusion",
    "rle_encode",
    "rle_decode",
    "MetricReport",
    "compute_metrics",
    "aggregate_global",
    "aggregate_per_image_mean",
    "Proposal",
    "SelectionResult",
    "rank_by_area",
    "select_drivable",
    "LabeledPair",
    "ScefRecord",
    "generate_finetune_pairs",
]
