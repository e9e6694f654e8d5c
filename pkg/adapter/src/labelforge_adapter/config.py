"""Adapter configuration: which models run, and how crops are produced."""

from __future__ import annotations

import os
from dataclasses import dataclass

from labelforge_adapter.errors import ConfigError

CROP_STRATEGIES = ("tight-bbox", "masked-frame")

DEFAULT_CLASSES = (
    "drivable area",
    "vehicle",
    "building",
    "vegetation",
    "sidewalk",
    "sky",
)


@dataclass(frozen=True)
class AdapterConfig:
    """Everything needed to reproduce an adapter run.

    Model identifiers use a scheme prefix:

    - ``demo:...``  deterministic CPU reference backends (no downloads)
    - ``hf:<id>``   Hugging Face pipelines (requires the ``hf`` extra)
    - ``ckpt:<path>`` a fine-tuned classifier checkpoint written by
      ``adapter-clip-finetune``; the file must exist at construction time.
    """

    segmenter: str = "demo:quant"
    classifier: str = "demo:color"
    crop_strategy: str = "tight-bbox"
    prompt_template: str = "a photo of {label}"
    device: str = "cpu"
    batch_size: int = 8
    classes: tuple[str, ...] = DEFAULT_CLASSES
    drivable_class: str = "drivable area"
    max_regions: int = 32
    min_area: int = 8

    def __post_init__(self):
        if self.crop_strategy not in CROP_STRATEGIES:
            raise ConfigError(
                f"crop_strategy must be one of {CROP_STRATEGIES}, "
                f"got {self.crop_strategy!r}"
            )
        if "{label}" not in self.prompt_template:
            raise ConfigError(
                f"prompt_template must contain '{{label}}': {self.prompt_template!r}"
            )
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_regions < 1:
            raise ConfigError(f"max_regions must be >= 1, got {self.max_regions}")
        if self.min_area < 1:
            raise ConfigError(f"min_area must be >= 1, got {self.min_area}")
        if not self.device:
            raise ConfigError("device must be non-empty")
        if not self.classes:
            raise ConfigError("classes must be non-empty")
        if len(set(self.classes)) != len(self.classes):
            raise ConfigError("classes contains duplicates")
        if self.drivable_class not in self.classes:
            raise ConfigError(
                f"drivable_class {self.drivable_class!r} missing from classes"
            )
        for ident in (self.segmenter, self.classifier):
            if ident.startswith("ckpt:"):
                path = ident[len("ckpt:") :]
                if not os.path.isfile(path):
                    raise ConfigError(f"checkpoint does not exist: {path}")

    def segmenter_descriptor(self) -> str:
        """Generator string recorded into every proposals document."""
        return f"{self.segmenter} crop={self.crop_strategy}"

    def classifier_descriptor(self) -> str:
        """Classifier string recorded into every classifications document."""
        return (
            f"{self.classifier} crop={self.crop_strategy} "
            f"prompt={self.prompt_template!r}"
        )


@dataclass(frozen=True)
class FinetuneParams:
    """Hyper-parameters logged alongside every fine-tuned checkpoint."""

    epochs: int = 10
    learning_rate: float = 1e-3

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(
                f"learning_rate must be positive, got {self.learning_rate}"
            )

    def as_dict(self) -> dict:
        return {"epochs": self.epochs, "learning_rate": self.learning_rate}
