#!/usr/bin/env python3
"""Score a pool of updates with the distance filter and watch a coordinated
poisoned cluster get rejected -- then watch the filter go blind when the
masking noise grows past the gradient signal."""

import numpy as np

from chainlearn import KrumConfig, krum_scores, multi_krum_select
from chainlearn.krum import max_tolerable_f

rng = np.random.default_rng(2)
R, dim = 20, 10
honest = rng.normal(0.0, 0.05, size=(14, dim)) + 1.0    # agree on a direction
poison = rng.normal(0.0, 0.02, size=(6, dim)) - 1.0     # tight hostile cluster
pool = np.vstack([honest, poison])

cfg = KrumConfig(R, f=6)
scores = krum_scores(pool, cfg)
accepted = multi_krum_select(pool, cfg)
print(f"R={R}, f={cfg.f}: each update scored against its {cfg.neighbours} nearest")
print("honest scores: ", np.round(scores[:14], 2))
print("poison scores: ", np.round(scores[14:], 2))
print("accepted idx:  ", accepted)
print("poison accepted:", [i for i in accepted if i >= 14] or "none")

# the same pool under increasing masking noise
print("\nnoise sweep (poison updates accepted out of 6):")
for noise_std in (0.0, 0.5, 1.0, 2.0, 4.0):
    noisy = pool + rng.normal(0.0, noise_std, size=pool.shape)
    leaked = [i for i in multi_krum_select(noisy, cfg) if i >= 14]
    print(f"  noise std {noise_std:4.1f}: {len(leaked)} leaked")

print("\nmax tolerable f by sample size:",
      {R_: max_tolerable_f(R_) for R_ in (8, 20, 35, 70)})
