"""End-to-end: adapter emits documents, the pipeline CLI consumes them.

The pipeline is driven exclusively through its console interface in a
subprocess — the adapter never imports it at runtime, and these tests prove
the file formats alone are enough to interoperate.
"""

import json
import os

import numpy as np
import pytest
from PIL import Image

from labelforge_adapter import wire
from labelforge_adapter.cli import clip_main, finetune_main, sam_main

from conftest import HARD_IMAGE, IMAGE_IDS, run_pipeline_cli


def write_manifest(corpus):
    entries = [
        {"id": image_id, "split": "pretrain-pool", "gt_path": f"gt/{image_id}.png"}
        for image_id in IMAGE_IDS
    ]
    path = corpus / "manifest.json"
    path.write_text(
        json.dumps(
            {"schema_version": 1, "split_seed": 0, "entries": entries}, indent=2
        )
        + "\n"
    )
    return path


def run_adapter_stages(corpus, capsys=None):
    assert sam_main(["--images", str(corpus / "images"), "--out", str(corpus)]) == 0
    assert (
        clip_main(
            [
                "--images",
                str(corpus / "images"),
                "--proposals-root",
                str(corpus / "proposals"),
                "--out",
                str(corpus),
            ]
        )
        == 0
    )


def test_pipeline_consumes_adapter_documents(corpus, capsys):
    run_adapter_stages(corpus)
    manifest = write_manifest(corpus)
    capsys.readouterr()

    labelgen = run_pipeline_cli(
        "labelgen",
        "--manifest",
        str(manifest),
        "--proposals-root",
        str(corpus / "proposals"),
        "--classifications-root",
        str(corpus / "classifications"),
        "--out",
        str(corpus / "run"),
    )
    assert labelgen.returncode == 0, labelgen.stderr
    assert "3 image(s)" in labelgen.stdout

    evaluate = run_pipeline_cli(
        "evaluate",
        "--pred-root",
        str(corpus / "run" / "pseudolabels"),
        "--gt-root",
        str(corpus / "gt"),
        "--out",
        str(corpus / "eval"),
    )
    assert evaluate.returncode == 0, evaluate.stderr
    report = json.loads((corpus / "eval" / "report.json").read_text())
    # every fixture road is recovered exactly, hard image included
    assert report["miou"] == 1.0
    assert report["f1"] == 1.0


def test_pair_generation_consumes_adapter_documents(corpus):
    run_adapter_stages(corpus)
    manifest = write_manifest(corpus)
    scef = run_pipeline_cli(
        "scef",
        "--manifest",
        str(manifest),
        "--proposals-root",
        str(corpus / "proposals"),
        "--classifications-root",
        str(corpus / "classifications"),
        "--gt-root",
        str(corpus / "gt"),
        "--out",
        str(corpus / "run"),
        "--splits",
        "pretrain-pool",
    )
    assert scef.returncode == 0, scef.stderr
    for image_id in IMAGE_IDS:
        record = json.loads((corpus / "run" / "scef" / f"{image_id}.json").read_text())
        replaced = record["pairs"][record["argmax_index"]]
        assert replaced["provenance"] == "gt-replacement"
        assert replaced["category"] == "drivable area"


@pytest.fixture()
def scef_records(corpus):
    """Adapter documents plus pair records produced by the pipeline CLI."""
    run_adapter_stages(corpus)
    manifest = write_manifest(corpus)
    scef = run_pipeline_cli(
        "scef",
        "--manifest",
        str(manifest),
        "--proposals-root",
        str(corpus / "proposals"),
        "--classifications-root",
        str(corpus / "classifications"),
        "--gt-root",
        str(corpus / "gt"),
        "--out",
        str(corpus / "run"),
        "--splits",
        "pretrain-pool",
    )
    assert scef.returncode == 0, scef.stderr
    return corpus / "run" / "scef"


def test_finetune_fixes_held_out_drivable_label(corpus, scef_records, tmp_path):
    # Train on the two easy images only; the hard image stays held out.
    train_dir = tmp_path / "train-records"
    train_dir.mkdir()
    for image_id in IMAGE_IDS:
        if image_id != HARD_IMAGE:
            (train_dir / f"{image_id}.json").write_bytes(
                (scef_records / f"{image_id}.json").read_bytes()
            )

    ckpt = tmp_path / "tuned.json"
    assert (
        finetune_main(
            [
                "--images",
                str(corpus / "images"),
                "--records",
                str(train_dir),
                "--out",
                str(ckpt),
            ]
        )
        == 0
    )
    saved = json.loads(ckpt.read_text())
    assert saved["kind"] == "color-centroid"
    assert saved["crop_strategy"] == "tight-bbox"
    assert saved["hyperparameters"] == {"epochs": 10, "learning_rate": 0.001}
    assert "drivable area" in saved["classes"]
    assert "sidewalk" not in saved["classes"]  # nothing was labeled sidewalk

    # Build a single-proposal document holding the held-out image's corrected
    # region, then classify it zero-shot and with the tuned checkpoint.
    held_out = json.loads((scef_records / f"{HARD_IMAGE}.json").read_text())
    replaced = held_out["pairs"][held_out["argmax_index"]]
    m = replaced["mask"]
    mask = wire.runs_to_mask(m["w"], m["h"], m["runs"])
    probe_root = tmp_path / "probe"
    wire.write_json(
        str(probe_root / "proposals" / f"{HARD_IMAGE}.json"),
        wire.proposals_document(
            HARD_IMAGE, m["w"], m["h"], "held-out probe", [mask], ["m00"]
        ),
    )

    def classify_with(identifier, out_name):
        out = tmp_path / out_name
        assert (
            clip_main(
                [
                    "--images",
                    str(corpus / "images"),
                    "--proposals-root",
                    str(probe_root / "proposals"),
                    "--out",
                    str(out),
                    "--classifier",
                    identifier,
                ]
            )
            == 0
        )
        doc = json.loads(
            (out / "classifications" / f"{HARD_IMAGE}.json").read_text()
        )
        return doc["results"][0]["class_label"]

    zero_shot = classify_with("demo:color", "pre")
    tuned = classify_with(f"ckpt:{ckpt}", "post")
    assert zero_shot == "sidewalk"  # the failure fine-tuning is meant to fix
    assert tuned == "drivable area"


def test_adapter_outputs_are_idempotent(corpus):
    run_adapter_stages(corpus)
    first = {
        p: (corpus / "proposals" / p).read_bytes()
        for p in os.listdir(corpus / "proposals")
    }
    run_adapter_stages(corpus)
    for name, data in first.items():
        assert (corpus / "proposals" / name).read_bytes() == data


def test_classify_continues_past_missing_image(corpus, capsys):
    assert sam_main(["--images", str(corpus / "images"), "--out", str(corpus)]) == 0
    os.unlink(corpus / "images" / f"{IMAGE_IDS[0]}.png")
    capsys.readouterr()
    rc = clip_main(
        [
            "--images",
            str(corpus / "images"),
            "--proposals-root",
            str(corpus / "proposals"),
            "--out",
            str(corpus),
        ]
    )
    captured = capsys.readouterr()
    assert rc == 1
    errors = [json.loads(line) for line in captured.err.splitlines()]
    assert len(errors) == 1
    assert errors[0]["image"] == IMAGE_IDS[0]
    # the healthy images were still written
    for image_id in IMAGE_IDS[1:]:
        assert (corpus / "classifications" / f"{image_id}.json").exists()
    assert "2 image(s)" in captured.out


def test_sam_reports_unreadable_image(corpus, capsys):
    bad = corpus / "images" / "fix-zzz.png"
    bad.write_bytes(b"not a png at all")
    rc = sam_main(["--images", str(corpus / "images"), "--out", str(corpus)])
    captured = capsys.readouterr()
    assert rc == 1
    errors = [json.loads(line) for line in captured.err.splitlines()]
    assert {e["image"] for e in errors} == {"fix-zzz"}
    assert "3 image(s)" in captured.out


def test_masked_frame_strategy_recorded_in_documents(corpus):
    assert (
        sam_main(
            [
                "--images",
                str(corpus / "images"),
                "--out",
                str(corpus),
                "--crop-strategy",
                "masked-frame",
            ]
        )
        == 0
    )
    doc = json.loads((corpus / "proposals" / f"{IMAGE_IDS[0]}.json").read_text())
    assert "crop=masked-frame" in doc["generator"]


def test_usage_errors_exit_2(corpus, capsys):
    with pytest.raises(SystemExit) as exc:
        sam_main(["--images", str(corpus / "images")])  # --out missing
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        clip_main(
            [
                "--images",
                str(corpus / "images"),
                "--proposals-root",
                "x",
                "--out",
                "y",
                "--prompt-template",
                "no slot here",
            ]
        )
    assert exc.value.code == 2
    capsys.readouterr()


@pytest.mark.parametrize("entry", [sam_main, clip_main, finetune_main])
def test_help_mentions_defaults(entry, capsys):
    with pytest.raises(SystemExit) as exc:
        entry(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "--crop-strategy" in out
    assert "default" in out


def test_missing_inputs_produce_json_errors(tmp_path, capsys):
    rc = clip_main(
        [
            "--images",
            str(tmp_path / "imgs"),
            "--proposals-root",
            str(tmp_path / "props"),
            "--out",
            str(tmp_path / "out"),
        ]
    )
    captured = capsys.readouterr()
    assert rc == 1
    err = json.loads(captured.err.splitlines()[0])
    assert err["error"] == "input-error"


def make_tiny_corpus(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    img = np.zeros((8, 8, 3), np.uint8)
    img[:, :] = (60, 160, 60)
    img[2:6, 2:6] = (105, 105, 105)
    Image.fromarray(img, "RGB").save(images / "tiny.png")
    return images


def test_min_area_and_max_regions_flags(tmp_path, capsys):
    images = make_tiny_corpus(tmp_path)
    assert (
        sam_main(
            [
                "--images",
                str(images),
                "--out",
                str(tmp_path),
                "--min-area",
                "1",
                "--max-regions",
                "1",
            ]
        )
        == 0
    )
    capsys.readouterr()
    doc = json.loads((tmp_path / "proposals" / "tiny.json").read_text())
    assert len(doc["proposals"]) == 1  # grass only, the larger region
