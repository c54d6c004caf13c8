#!/usr/bin/env python3
"""Convert CLEVR / CLEVR-Hans ground-truth scene JSON to argcbr scene lines.

Ground truth carries no detection scores, so every object gets confidence 1.0.
x is the pixel x coordinate divided by the image width.

    python3 scripts/clevr_to_scenes.py CLEVR_Hans_scenes_train.json > train.jsonl
"""

import argparse
import json
import sys

SIZE = {"small": "sm", "large": "l"}
COLOUR = {
    "gray": "gry",
    "red": "red",
    "blue": "blu",
    "green": "grn",
    "brown": "brn",
    "purple": "pur",
    "cyan": "cyn",
    "yellow": "yel",
}
MATERIAL = {"metal": "m", "rubber": "ru"}
SHAPE = {"cube": "cu", "sphere": "sp", "cylinder": "cy"}


def convert(scene, label_key, width):
    objects = []
    for o in scene["objects"]:
        objects.append(
            {
                "size": SIZE[o["size"]],
                "color": COLOUR[o["color"]],
                "material": MATERIAL[o["material"]],
                "shape": SHAPE[o["shape"]],
                "x": o["pixel_coords"][0] / width,
                "confidence": 1.0,
            }
        )
    label = scene.get(label_key)
    return {
        "image_id": scene.get("image_filename", str(scene.get("image_index"))),
        "class_label": int(label) if label is not None else None,
        "objects": objects,
    }


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("scenes", help="CLEVR scene JSON with a top-level 'scenes' list")
    p.add_argument("--label-key", default="class_id", help="per-scene class field (default: class_id)")
    p.add_argument("--width", type=float, default=480.0, help="image width in pixels (default: 480)")
    args = p.parse_args()

    with open(args.scenes) as f:
        data = json.load(f)
    for scene in data["scenes"]:
        sys.stdout.write(json.dumps(convert(scene, args.label_key, args.width)) + "\n")


if __name__ == "__main__":
    main()
