#!/usr/bin/env python3
"""The headline experiment at demo scale: a third of the peers flip the
target class, plain federated averaging collapses, the filtered ledger run
does not.  Takes about a minute."""

import dataclasses

from chainlearn.attacks import AdversaryConfig, STRATEGY_LABEL_FLIP
from chainlearn.config import DatasetSpec, ExperimentSpec
from chainlearn.experiments import run_fl_baseline, run_protocol_experiment
from chainlearn.sgd import TrainConfig

spec = ExperimentSpec(
    name="demo-poisoning",
    number_of_nodes=30,
    total_iterations=30,
    adversary=AdversaryConfig(fraction=0.30, strategy=STRATEGY_LABEL_FLIP, src_label=1, dst_label=0),
    dataset=DatasetSpec(shard_size=200, validation_size=1500),
    train=TrainConfig(eta0=0.008, eta_decay=0.04, weight_decay=1e-4, batch_size=128),
    seed=3,
)

clean = run_fl_baseline(dataclasses.replace(spec, adversary=AdversaryConfig()))
undefended = run_fl_baseline(spec)
defended = run_protocol_experiment(spec)

print(f"{'round':>5} {'plain-fl attack':>16} {'defended attack':>16} {'defended error':>15}")
for i in range(0, spec.total_iterations, 3):
    print(f"{i + 1:5d} {undefended.metrics.rows[i]['attack_rate']:16.3f} "
          f"{defended.metrics.rows[i]['attack_rate']:16.3f} "
          f"{defended.metrics.rows[i]['validation_error']:15.4f}")

print("\nclean federated error:    %.4f" % clean.metrics.final("validation_error"))
print("defended final error:     %.4f" % defended.metrics.final("validation_error"))
print("plain-fl max attack rate: %.3f" % max(undefended.metrics.series("attack_rate")))
print("defended final attack:    %.3f" % defended.metrics.final("attack_rate"))
print("honest stake share: %.2f -> %.2f" % (
    defended.metrics.rows[0]["honest_stake_fraction"],
    defended.metrics.final("honest_stake_fraction")))
