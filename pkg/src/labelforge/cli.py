"""Command-line front end.

Exit status is 0 only when every requested item succeeded; per-image
failures are printed as JSON lines on stderr and the batch continues, then
the command exits 1. Commands that write an output directory echo their
effective configuration there as config.json.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .config import build_config, resolve_workers, write_effective_config
from .errors import LabelForgeError
from .manifest import (
    ARTIFACT_KINDS,
    DEFAULT_SPLIT_SIZES,
    attach_artifacts,
    build_pretrain_pool,
    load_manifest,
    rebase_paths,
    save_manifest,
    split_dataset,
    validate_manifest,
)
from .metrics import format_percent_table
from .pipeline import emit_corpus, run_evaluate, run_labelgen, run_scef, sweep_rows_to_csv
from .storage import atomic_write_text

PROG = "labelforge"


def _error_line(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True), file=sys.stderr)


def _read_ids_file(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="TOML or JSON config file; flags override it")
    p.add_argument("--top-k", type=int, default=None, help="keep the K largest proposals (default 10)")
    p.add_argument("--drivable-class", default=None, help='class name to select (default "drivable area")')
    p.add_argument("--workers", type=int, default=None, help="parallel workers; also LABELFORGE_WORKERS (default 1)")


def _build_cfg(args: argparse.Namespace, **extra):
    return build_config(
        file_path=getattr(args, "config", None),
        top_k=getattr(args, "top_k", None),
        drivable_class=getattr(args, "drivable_class", None),
        workers=resolve_workers(getattr(args, "workers", None)),
        manifest=getattr(args, "manifest", None),
        proposals_root=getattr(args, "proposals_root", None),
        classifications_root=getattr(args, "classifications_root", None),
        gt_root=getattr(args, "gt_root", None),
        out_root=getattr(args, "out", None),
        **extra,
    )


# --- manifest subcommands ---


def cmd_manifest_split(args: argparse.Namespace) -> int:
    ids = _read_ids_file(args.ids_file)
    manifest = split_dataset(ids, sizes=tuple(args.sizes), seed=args.seed)
    save_manifest(manifest, args.out)
    counts = manifest.split_counts()
    print(
        f"split {len(ids)} ids -> train {counts['train']}, val {counts['val']}, "
        f"test {counts['test']}, unassigned {counts['unassigned']} ({args.out})"
    )
    return 0


def cmd_manifest_pool(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    candidates = _read_ids_file(args.candidates_file)
    manifest = build_pretrain_pool(
        manifest, candidates, multiplier=args.multiplier, seed=args.seed
    )
    out = args.out or args.manifest
    save_manifest(manifest, out)
    print(f"pool now {manifest.split_counts()['pretrain-pool']} entries ({out})")
    return 0


def cmd_manifest_attach(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    manifest = attach_artifacts(manifest, args.id, args.kind, args.path)
    out = args.out or args.manifest
    save_manifest(manifest, out)
    print(f"attached {args.kind} to {args.id} ({out})")
    return 0


def cmd_manifest_validate(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    problems = validate_manifest(
        manifest,
        require_gt_for_labeled=not args.allow_missing_paths,
        check_files=args.check_files,
        base_dir=os.path.dirname(os.path.abspath(args.manifest)),
    )
    for p in problems:
        _error_line({"error": "ManifestViolation", "detail": p})
    if problems:
        print(f"{len(problems)} problem(s) found")
        return 1
    print("manifest OK")
    return 0


# --- pipeline subcommands ---


def cmd_labelgen(args: argparse.Namespace) -> int:
    cfg = _build_cfg(args, apply_topk_at_inference=not args.no_topk_at_inference)
    cfg.require_paths("manifest", "proposals_root", "classifications_root", "out_root")
    manifest = rebase_paths(load_manifest(cfg.manifest), os.path.dirname(os.path.abspath(cfg.manifest)))
    summary, errors = run_labelgen(
        manifest,
        proposals_root=cfg.proposals_root,
        classifications_root=cfg.classifications_root,
        out_root=cfg.out_root,
        config=cfg,
        splits=args.splits,
    )
    write_effective_config(cfg, cfg.out_root, extra={"command": "labelgen", "splits": list(args.splits)})
    for e in errors:
        _error_line(e.to_json())
    print(
        f"pseudo-labels written for {summary['images']} image(s) "
        f"({summary['labeled_drivable']} labeled drivable, "
        f"{summary['fallback_best_score']} fallback), {len(errors)} error(s)"
    )
    return 1 if errors else 0


def cmd_scef(args: argparse.Namespace) -> int:
    cfg = _build_cfg(args)
    cfg.require_paths(
        "manifest", "proposals_root", "classifications_root", "gt_root", "out_root"
    )
    manifest = rebase_paths(load_manifest(cfg.manifest), os.path.dirname(os.path.abspath(cfg.manifest)))
    summary = run_scef(
        manifest,
        proposals_root=cfg.proposals_root,
        classifications_root=cfg.classifications_root,
        gt_root=cfg.gt_root,
        out_root=cfg.out_root,
        config=cfg,
        splits=args.splits,
    )
    write_effective_config(cfg, cfg.out_root, extra={"command": "scef", "splits": list(args.splits)})
    for e in summary["errors"]:
        _error_line(e)
    print(
        f"pair records for {summary['images']} image(s): {summary['pairs']} pairs, "
        f"{summary['replaced_pairs']} replaced, "
        f"{summary['zero_overlap_images']} with zero best overlap, "
        f"{len(summary['errors'])} error(s)"
    )
    return 1 if summary["errors"] else 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    workers = resolve_workers(args.workers) or 1
    report, per_image, errors = run_evaluate(
        args.pred_root, args.gt_root, out_root=args.out, workers=workers
    )
    for e in errors:
        _error_line(e.to_json())
    if report is None:
        print("nothing evaluated")
        return 1
    print(format_percent_table(report))
    print(f"images: {len(per_image)}")
    return 1 if errors else 0


def cmd_overlay(args: argparse.Namespace) -> int:
    from .mask import rle_decode, rle_from_json
    from .overlay import render_overlay
    from .pngio import read_mask_png, read_rgb_png, write_rgb_png

    def load(path: str):
        if path.endswith(".json"):
            with open(path, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
            return rle_decode(rle_from_json(obj["mask"] if "mask" in obj else obj))
        return read_mask_png(path)

    pred = load(args.pred)
    gt = load(args.gt)
    base = read_rgb_png(args.image) if args.image else None
    write_rgb_png(render_overlay(pred, gt, base), args.out)
    print(f"overlay written to {args.out}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    from .synth import NoiseSpec, random_scene, run_quality_sweep

    if (args.noise_grid is None) == (args.emit_corpus is None):
        print("synth needs exactly one of --noise-grid or --emit-corpus", file=sys.stderr)
        return 2

    if args.emit_corpus:
        noise = NoiseSpec(
            boundary_jitter=args.jitter,
            split_prob=args.split_prob,
            drop_prob=args.drop_prob,
            classifier_confusion=args.confusion,
        )
        manifest = emit_corpus(
            args.emit_corpus,
            n_scenes=args.scenes,
            noise=noise,
            seed=args.seed,
            width=args.width,
            height=args.height,
            distractors=args.distractors,
        )
        print(f"corpus of {len(manifest.entries)} scene(s) at {args.emit_corpus}")
        return 0

    with open(args.noise_grid, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list) or not raw:
        print("noise grid must be a non-empty JSON array of objects", file=sys.stderr)
        return 2
    grid = [NoiseSpec(**cell) for cell in raw]
    scenes = [
        random_scene(args.width, args.height, args.distractors, seed=args.seed + i)
        for i in range(args.scenes)
    ]
    rows = run_quality_sweep(grid, scenes, seed=args.seed)
    atomic_write_text(args.out, sweep_rows_to_csv(rows))
    print(f"sweep over {len(grid)} noise level(s) x {len(scenes)} scene(s) -> {args.out}")
    return 0


# --- parser wiring ---


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Pseudo-label pipeline for drivable-area masks: manifests, "
        "label selection, ground-truth pair replacement, metrics, and a "
        "synthetic test harness.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    # manifest
    man = sub.add_parser("manifest", help="create and maintain dataset manifests")
    man_sub = man.add_subparsers(dest="action", required=True, metavar="ACTION")

    sp = man_sub.add_parser(
        "split",
        help="assign ids to train/val/test with a seeded shuffle",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sp.add_argument("--ids-file", required=True, help="text file, one image id per line")
    sp.add_argument(
        "--sizes",
        type=int,
        nargs=3,
        default=list(DEFAULT_SPLIT_SIZES),
        metavar=("TRAIN", "VAL", "TEST"),
        help="split sizes",
    )
    sp.add_argument("--seed", type=int, default=0, help="shuffle seed")
    sp.add_argument("--out", required=True, help="manifest JSON to write")
    sp.set_defaults(func=cmd_manifest_split)

    pl = man_sub.add_parser(
        "pool",
        help="sample a pre-training pool of multiplier x labeled-count ids",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    pl.add_argument("--manifest", required=True, help="manifest JSON to extend")
    pl.add_argument("--candidates-file", required=True, help="text file of candidate ids")
    pl.add_argument("--multiplier", type=int, default=5, help="pool size as a multiple of labeled entries")
    pl.add_argument("--seed", type=int, default=0, help="sampling seed")
    pl.add_argument("--out", help="output manifest (default: overwrite input)")
    pl.set_defaults(func=cmd_manifest_pool)

    at = man_sub.add_parser(
        "attach",
        help="record an artifact path on one entry",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    at.add_argument("--manifest", required=True)
    at.add_argument("--id", required=True, help="entry id")
    at.add_argument("--kind", required=True, choices=sorted(ARTIFACT_KINDS), help="artifact kind")
    at.add_argument("--path", required=True, help="path to record")
    at.add_argument("--out", help="output manifest (default: overwrite input)")
    at.set_defaults(func=cmd_manifest_attach)

    va = man_sub.add_parser(
        "validate",
        help="check manifest structure and completeness",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    va.add_argument("--manifest", required=True)
    va.add_argument(
        "--allow-missing-paths",
        action="store_true",
        help="do not require gt_path on train/val/test entries",
    )
    va.add_argument("--check-files", action="store_true", help="verify referenced files exist")
    va.set_defaults(func=cmd_manifest_validate)

    # labelgen
    lg = sub.add_parser(
        "labelgen",
        help="select one drivable mask per image as its pseudo-label",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    lg.add_argument("--manifest", help="manifest JSON (or set in --config)")
    lg.add_argument("--proposals-root", help="directory of <id>.json proposal documents")
    lg.add_argument("--classifications-root", help="directory of <id>.json classification documents")
    lg.add_argument("--out", help="output root; pseudolabels/ is created inside")
    lg.add_argument(
        "--splits",
        nargs="+",
        default=["pretrain-pool"],
        help="manifest splits to process",
    )
    lg.add_argument(
        "--no-topk-at-inference",
        action="store_true",
        help="consider every proposal instead of only the K largest",
    )
    _add_config_args(lg)
    lg.set_defaults(func=cmd_labelgen)

    # scef
    sc = sub.add_parser(
        "scef",
        help="emit fine-tuning pairs, swapping the best proposal for ground truth",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sc.add_argument("--manifest", help="manifest JSON (or set in --config)")
    sc.add_argument("--proposals-root", help="directory of <id>.json proposal documents")
    sc.add_argument("--classifications-root", help="directory of <id>.json classification documents")
    sc.add_argument("--gt-root", help="directory of <id>.png ground-truth masks")
    sc.add_argument("--out", help="output root; scef/ is created inside")
    sc.add_argument("--splits", nargs="+", default=["train", "val", "test"], help="manifest splits to process")
    _add_config_args(sc)
    sc.set_defaults(func=cmd_scef)

    # evaluate
    ev = sub.add_parser(
        "evaluate",
        help="score predicted masks against ground truth",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    ev.add_argument("--pred-root", required=True, help="directory of predictions (<id>.json or <id>.png)")
    ev.add_argument("--gt-root", required=True, help="directory of ground truth (<id>.json or <id>.png)")
    ev.add_argument("--out", help="also write report.json and per_image.csv here")
    ev.add_argument("--workers", type=int, default=None, help="parallel workers; also LABELFORGE_WORKERS")
    ev.set_defaults(func=cmd_evaluate)

    # overlay
    ov = sub.add_parser(
        "overlay",
        help="render green/red/blue agreement image (TP/FN/FP)",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    ov.add_argument("--pred", required=True, help="prediction mask (.png or pseudo-label .json)")
    ov.add_argument("--gt", required=True, help="ground-truth mask (.png or .json)")
    ov.add_argument("--image", help="optional base RGB image")
    ov.add_argument("--out", required=True, help="output PNG")
    ov.set_defaults(func=cmd_overlay)

    # synth
    sy = sub.add_parser(
        "synth",
        help="synthetic scenes: noise-grid quality sweeps or corpus emission",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sy.add_argument("--scenes", type=int, required=True, help="number of scenes")
    sy.add_argument("--seed", type=int, default=0, help="master seed")
    sy.add_argument("--width", type=int, default=64, help="scene width in pixels")
    sy.add_argument("--height", type=int, default=64, help="scene height in pixels")
    sy.add_argument("--distractors", type=int, default=3, help="distractor rectangles per scene")
    sy.add_argument("--noise-grid", help="JSON array of noise objects; runs a sweep")
    sy.add_argument("--out", help="sweep CSV path (with --noise-grid)")
    sy.add_argument("--emit-corpus", metavar="DIR", help="write a corpus (manifest, documents, gt) instead")
    sy.add_argument("--jitter", type=float, default=0.0, help="boundary jitter for --emit-corpus")
    sy.add_argument("--split-prob", type=float, default=0.0, help="road split probability for --emit-corpus")
    sy.add_argument("--drop-prob", type=float, default=0.0, help="road drop probability for --emit-corpus")
    sy.add_argument("--confusion", type=float, default=0.0, help="classifier confusion for --emit-corpus")
    sy.set_defaults(func=cmd_synth)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "synth" and args.noise_grid and not args.out:
        parser.error("synth --noise-grid requires --out")
    try:
        return args.func(args)
    except LabelForgeError as exc:
        _error_line({"error": type(exc).__name__, "detail": str(exc)})
        return 1


if __name__ == "__main__":
    sys.exit(main())
