"""Regenerates the two bundled sample datasets. Output is deterministic."""

import csv
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates/core/assets/datasets"

BRANDS = ["BMW", "Ford", "Honda", "Hyundai", "Kia", "Mazda", "Nissan",
          "Subaru", "Tesla", "Toyota", "Volkswagen"]
TYPES = ["Compact", "Midsize", "Pickup", "Sedan", "SUV"]
YEARS = range(2007, 2012)


def car_sales():
    rng = random.Random(7)
    base = {b: rng.randint(20, 140) for b in BRANDS}
    mix = {t: rng.uniform(0.5, 1.6) for t in TYPES}
    growth = {b: rng.uniform(-0.08, 0.12) for b in BRANDS}
    rows = []
    for b in BRANDS:
        for t in TYPES:
            for i, y in enumerate(YEARS):
                level = base[b] * mix[t] * (1 + growth[b]) ** i
                if y == 2009:
                    level *= 0.8
                sale = max(1, round(level * 1000 * rng.uniform(0.85, 1.15)))
                rows.append([b, t, sale, y])
    return ["Brand", "Type", "Sale", "Year"], rows


STUDIOS = ["Fox", "Warner Bros", "Universal", "Paramount", "Disney", "Sony", "Lionsgate"]
GENRES = ["Action", "Adventure", "Animation", "Comedy", "Drama", "Horror", "Thriller"]
FIRST = ["Silent", "Crimson", "Last", "Hidden", "Broken", "Golden", "Midnight", "Distant",
         "Frozen", "Wild", "Iron", "Paper", "Glass", "Lost", "Bright", "Hollow", "Quiet",
         "Burning"]
SECOND = ["Harbor", "Kingdom", "River", "Signal", "Garden", "Empire", "Witness", "Horizon",
          "Letter", "Frontier", "Orchard", "Machine"]


def movies():
    rng = random.Random(11)
    titles = [f"The {a} {b}" for a in FIRST for b in SECOND]
    rng.shuffle(titles)
    titles = titles[:198]
    rows = []
    for title in titles:
        studio = rng.choice(STUDIOS)
        genre = rng.choice(GENRES)
        year = rng.randint(1995, 2015)
        scale = {"Animation": 1.6, "Action": 1.8, "Adventure": 1.5, "Drama": 0.9}.get(genre, 1.0)
        dom = rng.randint(150, 4200) * scale
        dom_t = round(dom)  # tenths of a million
        ovs_t = round(dom_t * rng.uniform(0.6, 2.4))
        rows.append([title, studio, genre,
                     f"{(dom_t + ovs_t) / 10:.1f}", f"{dom_t / 10:.1f}", f"{ovs_t / 10:.1f}", year])
    header = ["Movie", "Studio", "Type", "Worldwide $m", "Domestic $m", "Overseas $m", "Year"]
    return header, rows


def write(name, header, rows):
    with open(OUT / name, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    write("carsales.csv", *car_sales())
    write("movies.csv", *movies())
