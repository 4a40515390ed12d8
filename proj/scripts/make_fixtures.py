#!/usr/bin/env python3
"""Generate the 10-image fixture set used by the end-to-end tests.

Each fixture is a small grayscale PGM screenshot stand-in with dark text-like
blocks, plus the .ocr.txt / .scene.tsv sidecars consumed by the fixture
engines, plus truth.tsv with the ground-truth tags.
"""

import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "fixtures"

FIXTURES = [
    # (stem, ocr text, scene rows, ground-truth tags)
    ("img01", "Flight to Tokyo at 9am", [("document", 0.7)],
     ["tokyo", "document", "japan"]),
    ("img02", "Dinner of pizza with Anna", [("food", 0.9)],
     ["pizza", "food", "italy"]),
    ("img03", "Notes for the budget and report", [("document", 0.6)],
     ["budget", "report", "document"]),
    ("img04", "Invoice from Acme for 450", [("document", 0.8)],
     ["invoice", "acme", "document"]),
    ("img05", "Holiday at the beach", [("photo", 0.8)],
     ["beach", "photo", "holiday"]),
    ("img06", "Recipe for curry and chicken", [("food", 0.5)],
     ["recipe", "chicken", "curry", "food"]),
    ("img07", "Ticket for the train to Paris", [("document", 0.4)],
     ["train", "ticket", "paris", "metro"]),
    ("img08", "Membership card for the gym", [("document", 0.5)],
     ["gym", "yoga"]),
    ("img09", "Shopping list with milk and eggs", [("document", 0.5)],
     ["car", "insurance"]),
    ("img10", "Forecast of sunny weather", [("photo", 0.6)],
     ["weather", "rain", "umbrella", "storm"]),
]


def write_pgm(path, width, height, rng, n_blocks):
    pixels = bytearray([235] * (width * height))
    for _ in range(n_blocks):
        bw = rng.randint(6, 18)
        bh = rng.randint(4, 8)
        x0 = rng.randint(2, width - bw - 2)
        y0 = rng.randint(2, height - bh - 2)
        for y in range(y0, y0 + bh):
            for x in range(x0, x0 + bw):
                pixels[y * width + x] = 25
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (width, height))
        f.write(bytes(pixels))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = random.Random(4242)
    truth_lines = []
    for stem, text, scenes, truth in FIXTURES:
        write_pgm(OUT / f"{stem}.pgm", 96, 64, rng, rng.randint(3, 6))
        (OUT / f"{stem}.ocr.txt").write_text(text + "\n", encoding="utf-8")
        (OUT / f"{stem}.scene.tsv").write_text(
            "".join(f"{label}\t{prob}\n" for label, prob in scenes),
            encoding="utf-8")
        truth_lines.append(stem + "\t" + ",".join(truth))
    (OUT / "truth.tsv").write_text("\n".join(truth_lines) + "\n",
                                   encoding="utf-8")
    print(f"wrote {len(FIXTURES)} fixtures")


if __name__ == "__main__":
    main()
