#!/usr/bin/env python3
"""Generates the synthetic bundled datasets under data/.

The per-source listing counts follow the published seller counts for the four
evaluated products. The prices themselves are synthetic: a two-component
shifted-gamma mixture above a fixed product minimum. The minimum is listed by
PriceGrabber and by the source with the most listings.

Run once; the CSV files are committed and never regenerated by the build.
"""

import json
import pathlib

import numpy as np

SEED = 20140515
SOURCES = ["PriceGrabber", "Nextag", "Bizrate", "Amazon", "Shopper"]

PRODUCTS = {
    "printer": dict(description="HP LaserJet Pro 400 (synthetic prices)", minimum=297.00,
                    counts=[24, 13, 23, 28, 15],
                    mixture=[(0.65, 2.0, 12.0), (0.35, 2.5, 25.0)], second_offset=30.0),
    "mouse": dict(description="Logitech keyboard and mouse (synthetic prices)", minimum=44.99,
                  counts=[33, 20, 36, 25, 19],
                  mixture=[(0.6, 2.0, 3.0), (0.4, 3.0, 6.0)], second_offset=8.0),
    "monitor": dict(description="HP 2311x monitor (synthetic prices)", minimum=169.99,
                    counts=[25, 11, 30, 18, 17],
                    mixture=[(0.6, 2.0, 8.0), (0.4, 2.5, 18.0)], second_offset=20.0),
    "camera": dict(description="Sony WX50 camera (synthetic prices)", minimum=148.00,
                   counts=[16, 9, 17, 19, 12],
                   mixture=[(0.6, 2.0, 7.0), (0.4, 2.5, 15.0)], second_offset=18.0),
}


def draw(rng, spec, count):
    out = []
    (w1, k1, s1), (_, k2, s2) = spec["mixture"]
    while len(out) < count:
        if rng.random() < w1:
            value = spec["minimum"] + rng.gamma(k1, s1)
        else:
            value = spec["minimum"] + spec["second_offset"] + rng.gamma(k2, s2)
        value = round(value, 2)
        if value > spec["minimum"]:
            out.append(value)
    return out


def main():
    rng = np.random.default_rng(SEED)
    data_dir = pathlib.Path(__file__).resolve().parent.parent / "data"
    data_dir.mkdir(exist_ok=True)
    manifest = {}
    for product, spec in PRODUCTS.items():
        largest = SOURCES[int(np.argmax(spec["counts"]))]
        rows = []
        for source, count in zip(SOURCES, spec["counts"]):
            holds_min = source in ("PriceGrabber", largest)
            prices = draw(rng, spec, count - 1 if holds_min else count)
            if holds_min:
                prices.insert(int(rng.integers(0, count)), spec["minimum"])
            rows.extend((source, p) for p in prices)
        path = data_dir / f"{product}.csv"
        with path.open("w", newline="\n") as f:
            f.write("product_id,source,price\n")
            for source, price in rows:
                f.write(f"{product},{source},{price:.2f}\n")
        manifest[product] = {
            "product_id": product,
            "description": spec["description"],
            "file": path.name,
            "per_source_counts": dict(zip(SOURCES, spec["counts"])),
            "stated_minimum": f"{spec['minimum']:.2f}",
            "synthetic": True,
            "generator": f"tools/make_builtin_datasets.py seed {SEED}",
        }
    with (data_dir / "manifest.json").open("w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
