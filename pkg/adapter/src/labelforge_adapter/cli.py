"""Console entry points: adapter-sam, adapter-clip, adapter-clip-finetune.

All three follow the same conventions as the pipeline CLI they feed:
human-readable progress on stdout, one JSON object per error on stderr,
exit status 0 only when every input was processed cleanly.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from labelforge_adapter import __version__
from labelforge_adapter.classify import emit_classifications
from labelforge_adapter.config import CROP_STRATEGIES, AdapterConfig, FinetuneParams
from labelforge_adapter.errors import AdapterError
from labelforge_adapter.finetune import finetune_classifier
from labelforge_adapter.proposals import emit_proposals


def _base_parser(prog: str, description: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=prog,
        description=description,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    parser.add_argument(
        "--crop-strategy",
        choices=CROP_STRATEGIES,
        default="tight-bbox",
        help="how region pixels are presented to the classifier",
    )
    parser.add_argument("--device", default="cpu", help="model device descriptor")
    parser.add_argument(
        "--batch-size", type=int, default=8, help="crops scored per model call"
    )
    return parser


def _emit_errors(errors: Sequence[dict]) -> None:
    for err in errors:
        print(json.dumps(err, sort_keys=True), file=sys.stderr)


def _config_or_usage_error(parser: argparse.ArgumentParser, **kwargs) -> AdapterConfig:
    try:
        return AdapterConfig(**kwargs)
    except AdapterError as exc:
        parser.error(exc.detail)
        raise AssertionError("unreachable")  # parser.error always exits


def sam_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _base_parser(
        "adapter-sam",
        "Propose regions for every image in a directory and write one "
        "proposals document per image.",
    )
    parser.add_argument("--images", required=True, help="directory of input images")
    parser.add_argument(
        "--out", required=True, help="output root (documents go to <out>/proposals/)"
    )
    parser.add_argument(
        "--segmenter", default="demo:quant", help="segmenter identifier"
    )
    parser.add_argument(
        "--max-regions", type=int, default=32, help="keep at most this many regions"
    )
    parser.add_argument(
        "--min-area", type=int, default=8, help="drop regions smaller than this"
    )
    args = parser.parse_args(argv)
    config = _config_or_usage_error(
        parser,
        segmenter=args.segmenter,
        crop_strategy=args.crop_strategy,
        device=args.device,
        batch_size=args.batch_size,
        max_regions=args.max_regions,
        min_area=args.min_area,
    )
    try:
        written, errors = emit_proposals(args.images, args.out, config)
    except AdapterError as exc:
        _emit_errors([{"error": exc.code, "detail": exc.detail}])
        return 1
    _emit_errors(errors)
    print(f"proposals written for {written} image(s)")
    return 0 if not errors else 1


def clip_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _base_parser(
        "adapter-clip",
        "Classify every proposal crop against the class list and write one "
        "classifications document per image.",
    )
    parser.add_argument("--images", required=True, help="directory of input images")
    parser.add_argument(
        "--proposals-root", required=True, help="directory of proposals documents"
    )
    parser.add_argument(
        "--out",
        required=True,
        help="output root (documents go to <out>/classifications/)",
    )
    parser.add_argument(
        "--classifier", default="demo:color", help="classifier identifier"
    )
    parser.add_argument(
        "--classes",
        nargs="+",
        default=list(AdapterConfig().classes),
        help="candidate class names",
    )
    parser.add_argument(
        "--drivable-class",
        default="drivable area",
        help="class name the downstream pipeline selects on",
    )
    parser.add_argument(
        "--prompt-template",
        default="a photo of {label}",
        help="text prompt per class; must contain {label}",
    )
    args = parser.parse_args(argv)
    config = _config_or_usage_error(
        parser,
        classifier=args.classifier,
        crop_strategy=args.crop_strategy,
        prompt_template=args.prompt_template,
        device=args.device,
        batch_size=args.batch_size,
        classes=tuple(args.classes),
        drivable_class=args.drivable_class,
    )
    try:
        written, errors = emit_classifications(
            args.proposals_root, args.images, args.out, config
        )
    except AdapterError as exc:
        _emit_errors([{"error": exc.code, "detail": exc.detail}])
        return 1
    _emit_errors(errors)
    print(f"classifications written for {written} image(s)")
    return 0 if not errors else 1


def finetune_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _base_parser(
        "adapter-clip-finetune",
        "Fit the classifier on labeled-pair records and write a checkpoint "
        "loadable via ckpt:<path>.",
    )
    parser.add_argument("--images", required=True, help="directory of input images")
    parser.add_argument(
        "--records", required=True, help="directory of labeled-pair record documents"
    )
    parser.add_argument("--out", required=True, help="checkpoint output path")
    parser.add_argument(
        "--classifier", default="demo:color", help="base classifier identifier"
    )
    parser.add_argument(
        "--prompt-template",
        default="a photo of {label}",
        help="text prompt per class; must contain {label}",
    )
    parser.add_argument("--epochs", type=int, default=10, help="training epochs")
    parser.add_argument(
        "--learning-rate", type=float, default=1e-3, help="optimizer step size"
    )
    args = parser.parse_args(argv)
    config = _config_or_usage_error(
        parser,
        classifier=args.classifier,
        crop_strategy=args.crop_strategy,
        prompt_template=args.prompt_template,
        device=args.device,
        batch_size=args.batch_size,
    )
    try:
        params = FinetuneParams(epochs=args.epochs, learning_rate=args.learning_rate)
    except AdapterError as exc:
        parser.error(exc.detail)
    try:
        summary, errors = finetune_classifier(
            args.records, args.images, args.out, config, params
        )
    except AdapterError as exc:
        _emit_errors([{"error": exc.code, "detail": exc.detail}])
        return 1
    _emit_errors(errors)
    print(
        f"checkpoint written to {summary['checkpoint']} "
        f"({summary['pairs']} pairs from {summary['records']} record(s), "
        f"classes: {', '.join(summary['classes'])})"
    )
    return 0 if not errors else 1
