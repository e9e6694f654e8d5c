"""Hugging Face backends: SAM-style mask generation and CLIP-style scoring.

Imports of torch/transformers happen lazily inside each factory so the demo
backends stay usable on machines without the ``hf`` extra installed.  All
factories raise :class:`BackendError` with an actionable message when the
stack or the weights are unavailable.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from labelforge_adapter.errors import BackendError


def available() -> bool:
    """True when torch and transformers can be imported."""
    try:
        import torch  # noqa: F401
        import transformers  # noqa: F401
    except ImportError:
        return False
    return True


def _require_stack():
    try:
        import torch
        import transformers
    except ImportError as exc:
        raise BackendError(
            "hf: backends need the 'hf' extra (pip install 'labelforge-adapter[hf]')"
        ) from exc
    return torch, transformers


def _to_pil(crop: np.ndarray):
    from PIL import Image

    return Image.fromarray(np.asarray(crop, dtype=np.uint8), mode="RGB")


def make_segmenter(model_id: str, device: str, max_regions: int, min_area: int):
    torch, transformers = _require_stack()
    try:
        pipe = transformers.pipeline(
            "mask-generation", model=model_id, device=device
        )
    except Exception as exc:
        raise BackendError(f"could not load segmenter {model_id!r}: {exc}") from exc

    def segment(image: np.ndarray) -> list[np.ndarray]:
        with torch.no_grad():
            out = pipe(_to_pil(image))
        masks = [np.asarray(m, dtype=bool) for m in out["masks"]]
        masks = [m for m in masks if int(m.sum()) >= min_area]
        masks.sort(key=lambda m: -int(m.sum()))
        return masks[:max_regions]

    return segment


def make_classifier(model_id: str, device: str, prompt_template: str, batch_size: int):
    torch, transformers = _require_stack()
    try:
        pipe = transformers.pipeline(
            "zero-shot-image-classification", model=model_id, device=device
        )
    except Exception as exc:
        raise BackendError(f"could not load classifier {model_id!r}: {exc}") from exc

    def classify(crops: Sequence[np.ndarray], classes: Sequence[str]) -> list[dict]:
        images = [_to_pil(c) for c in crops]
        results = []
        with torch.no_grad():
            for start in range(0, len(images), batch_size):
                chunk = images[start : start + batch_size]
                outs = pipe(
                    chunk,
                    candidate_labels=list(classes),
                    hypothesis_template=prompt_template,
                )
                if chunk and isinstance(outs[0], dict):
                    outs = [outs]  # single-image pipelines return a flat list
                for out in outs:
                    results.append(
                        {item["label"]: float(item["score"]) for item in out}
                    )
        return results

    return classify


def _embed(model_id: str, device: str, crops: Sequence[np.ndarray], batch_size: int):
    torch, transformers = _require_stack()
    model = transformers.CLIPModel.from_pretrained(model_id).to(device).eval()
    processor = transformers.CLIPProcessor.from_pretrained(model_id)
    chunks = []
    with torch.no_grad():
        for start in range(0, len(crops), batch_size):
            batch = [_to_pil(c) for c in crops[start : start + batch_size]]
            inputs = processor(images=batch, return_tensors="pt").to(device)
            feats = model.get_image_features(**inputs)
            chunks.append(feats / feats.norm(dim=-1, keepdim=True))
    return torch.cat(chunks, dim=0)


def fit_linear_probe(
    model_id: str,
    device: str,
    examples: Sequence[tuple[np.ndarray, str]],
    batch_size: int,
    epochs: int,
    learning_rate: float,
) -> dict:
    """Train a logistic-regression head on frozen image embeddings."""
    torch, _ = _require_stack()
    if not examples:
        raise BackendError("no training examples to fit a probe from")
    classes = sorted({label for _, label in examples})
    feats = _embed(model_id, device, [crop for crop, _ in examples], batch_size)
    targets = torch.tensor(
        [classes.index(label) for _, label in examples], device=device
    )
    head = torch.nn.Linear(feats.shape[1], len(classes)).to(device)
    opt = torch.optim.AdamW(head.parameters(), lr=learning_rate)
    loss_fn = torch.nn.CrossEntropyLoss()
    for _ in range(epochs):
        opt.zero_grad()
        loss = loss_fn(head(feats), targets)
        loss.backward()
        opt.step()
    return {
        "kind": "clip-linear-probe",
        "base_model": model_id,
        "classes": classes,
        "weight": head.weight.detach().cpu().tolist(),
        "bias": head.bias.detach().cpu().tolist(),
    }


def make_probe_classifier(ckpt: dict, device: str, batch_size: int):
    torch, _ = _require_stack()
    classes = list(ckpt["classes"])
    weight = torch.tensor(ckpt["weight"], device=device)
    bias = torch.tensor(ckpt["bias"], device=device)

    def classify(crops: Sequence[np.ndarray], requested: Sequence[str]) -> list[dict]:
        feats = _embed(ckpt["base_model"], device, list(crops), batch_size)
        with torch.no_grad():
            probs = torch.softmax(feats @ weight.T + bias, dim=-1).cpu().numpy()
        results = []
        for row in probs:
            fitted = dict(zip(classes, (float(p) for p in row)))
            results.append({name: fitted.get(name, 0.0) for name in requested})
        return results

    return classify
