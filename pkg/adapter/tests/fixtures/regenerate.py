#!/usr/bin/env python3
"""Rebuild the committed replay fixtures from scratch.

Three hand-placed street scenes (sky band, grass, road trapezoid, two
distractor rectangles) are drawn pixel-by-pixel, then the demo backends
record one proposals document and one classifications document per image.
Everything is deterministic, so reruns must be byte-identical; the replay
tests enforce exactly that.

fix-002 uses a lighter road color that the zero-shot reference palette
mislabels as sidewalk — it exists so the fine-tune tests have a case where
training on corrected pairs visibly fixes the label.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image

from labelforge_adapter.cli import clip_main, sam_main

HERE = os.path.dirname(os.path.abspath(__file__))

GRASS = (60, 160, 60)
SKY = (110, 160, 230)
ROAD_EASY = (105, 105, 105)  # nearest reference color: drivable area
ROAD_HARD = (150, 150, 150)  # nearest reference color: sidewalk
VEHICLE = (200, 40, 40)
BUILDING = (150, 110, 80)

WIDTH, HEIGHT = 48, 32

# id -> (sky_rows, road (y_top, half_top, half_bottom, cx, color), rects)
SCENES = {
    "fix-000": (
        9,
        (10, 4, 18, 24, ROAD_EASY),
        [((12, 18, 2, 11), VEHICLE), ((20, 27, 40, 47), BUILDING)],
    ),
    "fix-001": (
        7,
        (9, 3, 15, 20, ROAD_EASY),
        [((11, 16, 33, 43), VEHICLE), ((18, 26, 1, 8), BUILDING)],
    ),
    "fix-002": (
        10,
        (12, 5, 16, 26, ROAD_HARD),
        [((14, 19, 2, 10), VEHICLE), ((13, 20, 40, 47), BUILDING)],
    ),
}


def draw_scene(sky_rows, road, rects):
    img = np.zeros((HEIGHT, WIDTH, 3), np.uint8)
    img[:, :] = GRASS
    img[:sky_rows, :] = SKY
    y_top, half_top, half_bottom, cx, color = road
    for y in range(y_top, HEIGHT):
        t = (y - y_top) / (HEIGHT - 1 - y_top)
        half = int(round(half_top + t * (half_bottom - half_top)))
        img[y, cx - half : cx + half + 1] = color
    road_mask = (img == np.array(color, np.uint8)).all(axis=2)
    for (y0, y1, x0, x1), rect_color in rects:
        region = img[y0:y1, x0:x1]
        if road_mask[y0:y1, x0:x1].any():
            raise AssertionError("rectangle overlaps the road; adjust the layout")
        region[:, :] = rect_color
    return img, road_mask


def main() -> None:
    images_dir = os.path.join(HERE, "images")
    gt_dir = os.path.join(HERE, "gt")
    recorded = os.path.join(HERE, "recorded")
    os.makedirs(images_dir, exist_ok=True)
    os.makedirs(gt_dir, exist_ok=True)

    for image_id, (sky_rows, road, rects) in sorted(SCENES.items()):
        img, road_mask = draw_scene(sky_rows, road, rects)
        Image.fromarray(img, "RGB").save(os.path.join(images_dir, f"{image_id}.png"))
        Image.fromarray(
            (road_mask * 255).astype(np.uint8), "L"
        ).save(os.path.join(gt_dir, f"{image_id}.png"))

    rc = sam_main(["--images", images_dir, "--out", recorded])
    if rc != 0:
        raise SystemExit(f"adapter-sam failed with exit {rc}")
    rc = clip_main(
        [
            "--images",
            images_dir,
            "--proposals-root",
            os.path.join(recorded, "proposals"),
            "--out",
            recorded,
        ]
    )
    if rc != 0:
        raise SystemExit(f"adapter-clip failed with exit {rc}")
    print(f"fixtures rebuilt under {HERE}")


if __name__ == "__main__":
    main()
