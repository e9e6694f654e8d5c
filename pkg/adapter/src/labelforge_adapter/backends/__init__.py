"""Backend resolution: map model identifiers to segment/classify callables.

A segmenter callable takes an (h, w, 3) uint8 image and returns a list of
boolean (h, w) masks.  A classifier callable takes a list of crops plus the
class names and returns, per crop, a dict mapping every class to a score in
[0, 1].
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from labelforge_adapter.config import AdapterConfig
from labelforge_adapter.errors import BackendError
from labelforge_adapter import wire

Segmenter = Callable[[np.ndarray], list[np.ndarray]]
Classifier = Callable[[Sequence[np.ndarray], Sequence[str]], list[dict]]


def resolve_segmenter(config: AdapterConfig) -> Segmenter:
    ident = config.segmenter
    if ident.startswith("demo:"):
        from labelforge_adapter.backends import demo

        return demo.make_segmenter(
            max_regions=config.max_regions, min_area=config.min_area
        )
    if ident.startswith("hf:"):
        from labelforge_adapter.backends import hf

        return hf.make_segmenter(
            ident[len("hf:") :],
            device=config.device,
            max_regions=config.max_regions,
            min_area=config.min_area,
        )
    raise BackendError(f"unknown segmenter identifier {ident!r}")


def resolve_classifier(config: AdapterConfig) -> Classifier:
    ident = config.classifier
    if ident.startswith("demo:"):
        from labelforge_adapter.backends import demo

        return demo.make_classifier()
    if ident.startswith("ckpt:"):
        return _checkpoint_classifier(ident[len("ckpt:") :], config)
    if ident.startswith("hf:"):
        from labelforge_adapter.backends import hf

        return hf.make_classifier(
            ident[len("hf:") :],
            device=config.device,
            prompt_template=config.prompt_template,
            batch_size=config.batch_size,
        )
    raise BackendError(f"unknown classifier identifier {ident!r}")


def _checkpoint_classifier(path: str, config: AdapterConfig) -> Classifier:
    ckpt = wire.read_json(path)
    kind = ckpt.get("kind")
    if kind == "color-centroid":
        from labelforge_adapter.backends import demo

        return demo.make_centroid_classifier(ckpt)
    if kind == "clip-linear-probe":
        from labelforge_adapter.backends import hf

        return hf.make_probe_classifier(
            ckpt, device=config.device, batch_size=config.batch_size
        )
    raise BackendError(f"checkpoint {path} has unknown kind {kind!r}")
