"""Generate the committed golden outputs for the 3-frame fixture.

Everything is recomputed by the sequential naive reference in oracles.py:
manifest walked with plain json, masks decoded run by run, top-2 selection by
exhaustive subset search, compositing per pixel. No code from the package
under test is imported, so the goldens are an independent statement of the
expected output.

Run from the tests directory after make_fixture.py: python3 make_goldens.py
"""

import json
from pathlib import Path

import numpy as np
from PIL import Image

import oracles

ROOT = Path(__file__).parent / "fixtures"
TOP_N = 2


def load_pixels(path):
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB")).tolist()


def main():
    golden_dir = ROOT / "golden"
    golden_dir.mkdir(parents=True, exist_ok=True)

    with open(ROOT / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    background = load_pixels(ROOT / "background.png")

    selection_report = {"frames": []}
    for frame in manifest["frames"]:
        i = frame["frame_index"]
        source = load_pixels(ROOT / "frames" / f"frame_{i:06d}.png")

        persons = []
        masks_by_id = {}
        for instance_id, det in enumerate(frame["detections"]):
            rle = det["mask_rle"]
            masks_by_id[instance_id] = oracles.naive_rle_decode(
                rle["counts"], rle["size"][0], rle["size"][1]
            )
            if manifest["categories"][str(det["class_id"])] == "person":
                y1, x1, y2, x2 = det["bbox"]
                persons.append((instance_id, oracles.naive_bbox_area(y1, x1, y2, x2)))

        chosen = oracles.naive_top_n(persons, TOP_N)
        union = oracles.naive_union([masks_by_id[c] for c in sorted(chosen)])
        out = oracles.naive_composite(background, source, union)

        arr = np.array(out, dtype=np.uint8)
        Image.fromarray(arr, mode="RGB").save(golden_dir / f"frame_{i:06d}.png")
        selection_report["frames"].append(
            {"frame_index": i, "selected_ids_per_source": [sorted(chosen)]}
        )

    with open(golden_dir / "selection.json", "w", encoding="utf-8") as fh:
        json.dump(selection_report, fh, indent=2)
        fh.write("\n")
    print(f"goldens written under {golden_dir}")


if __name__ == "__main__":
    main()
