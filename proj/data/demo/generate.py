"""Regenerates the demo CSVs (four classes, two minorities, three feature columns)."""
import csv
import random
from pathlib import Path

CENTERS = {"steady": (0.0, 0.0, 0.0), "growing": (2.0, 0.5, 1.0), "merging": (1.0, 2.0, 0.5), "splitting": (0.5, 1.0, 2.0)}


def write(path, counts, seed, spread):
    rng = random.Random(seed)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["size", "density", "age", "class"])
        for label, n in counts.items():
            c = CENTERS[label]
            for _ in range(n):
                w.writerow([round(rng.gauss(m, spread), 4) for m in c] + [label])


here = Path(__file__).parent
write(here / "base.csv", {"steady": 120, "growing": 60, "merging": 12, "splitting": 8}, 1, 0.9)
write(here / "external_a.csv", {"steady": 80, "growing": 40, "merging": 40, "splitting": 30}, 2, 0.9)
write(here / "external_b.csv", {"steady": 60, "growing": 60, "merging": 25, "splitting": 25}, 3, 1.1)
write(here / "base_alt.csv", {"steady": 100, "growing": 70, "merging": 10, "splitting": 9}, 4, 0.8)
