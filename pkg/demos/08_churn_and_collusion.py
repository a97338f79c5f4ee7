#!/usr/bin/env python3
"""Robustness corner: training under rising churn, and the Monte Carlo for
the zero-noise collusion attack across noiser-count and stake grids."""

import dataclasses

from chainlearn.attacks import collusion_violation_probability
from chainlearn.config import DatasetSpec, ExperimentSpec
from chainlearn.experiments import run_protocol_experiment
from chainlearn.sgd import TrainConfig

spec = ExperimentSpec(
    name="demo-churn",
    number_of_nodes=24,
    total_iterations=40,
    dataset=DatasetSpec(shard_size=150, validation_size=1000),
    train=TrainConfig(eta0=0.008, eta_decay=0.04, weight_decay=1e-4, batch_size=128),
    seed=6,
)

print("churn sweep (fail+join events per simulated minute):")
for rate in (0.0, 1.0, 2.0, 4.0):
    run = run_protocol_experiment(dataclasses.replace(spec, churn_per_minute=rate))
    m = run.metrics
    print(f"  rate {rate:3.0f}/min: {m.final('blocks'):3d}/40 blocks, "
          f"final error {m.final('validation_error'):.4f}, forks {m.final('forks')}")

print("\ncollusion attack probability (10k draws per cell):")
print(f"{'stake %':>8} " + " ".join(f"{k:>9}" for k in (3, 5, 10)))
for frac in (0.1, 0.2, 0.3, 0.4, 0.5):
    row = [collusion_violation_probability(frac, k, 10_000, seed=0) for k in (3, 5, 10)]
    print(f"{frac * 100:7.0f}% " + " ".join(f"{p:9.4f}" for p in row))
print("(columns: number of noisers per update; more noisers or less hostile")
print(" stake both drive the unmasking probability to zero)")
