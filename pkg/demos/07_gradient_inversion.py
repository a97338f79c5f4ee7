#!/usr/bin/env python3
"""Reconstruct training images from aggregated updates.  With one update in
the aggregate the target class block IS the input image; with 35 the
reconstruction blurs into a class blend.  Writes PGM files next to this
script."""

from pathlib import Path

from chainlearn.attacks import write_pgm
from chainlearn.experiments import inversion_batching_experiment

out = Path(__file__).resolve().parent / "inversion_output"
out.mkdir(exist_ok=True)

results, images = inversion_batching_experiment(batch_counts=(1, 5, 15, 35), seed=5)
print("cosine similarity of the inverted image to the nearest training image:")
for count, sim in results:
    path = out / f"inverted_batch{count:02d}.pgm"
    write_pgm(path, images[count])
    bar = "#" * int(sim * 40)
    print(f"  {count:3d} updates: {sim:5.3f} {bar}")
print(f"\nimages written to {out}/ (any PGM viewer opens them)")
