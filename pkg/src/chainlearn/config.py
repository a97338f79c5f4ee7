"""Experiment configuration: defaults, JSON loading and derived quantities.

The default values mirror the reference deployment: 100 peers with uniform
stake 10, privacy budget epsilon=2 and delta=1e-5, 2 noisers, 3 verifiers,
3 aggregators, a Multi-KRUM sample of 70% of the peers (R=70 at N=100, so
u = R/2 = 35 updates per block and an adversary bound f=33), and a linear
+5 stake reward.  Config files are JSON with the same field names, so a
stored sidecar replays exactly.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .attacks import AdversaryConfig
from .krum import max_tolerable_f
from .ledger import ProtocolConfig
from .protocol import StageTimeouts
from .sgd import TrainConfig
from .simnet import SimConfig


@dataclass(frozen=True)
class DatasetSpec:
    kind: str = "synthetic-blobs"
    features: int = 10
    classes: int = 2
    class_weights: tuple = (0.75, 0.25)
    separation: float = 6.0
    noise_std: float = 1.0
    shard_size: int = 300
    validation_size: int = 2000
    params: dict = field(default_factory=dict)  # extra kind-specific params


@dataclass(frozen=True)
class ExperimentSpec:
    name: str = "baseline"
    number_of_nodes: int = 100
    total_iterations: int = 100
    privacy_budget_epsilon: float = 2.0
    delta: float = 1e-5
    number_of_noisers: int = 2
    number_of_verifiers: int = 3
    number_of_aggregators: int = 3
    collect_fraction: float = 0.70
    initial_stake: int = 10
    stake_reward: int = 5
    model_family: str = "logreg"
    scale_bits: int = 20
    backend: str = "exponent"
    seed: int = 0
    churn_per_minute: float = 0.0
    latency_min: float = 0.010
    latency_max: float = 0.100
    noise_wait: float = 2.0
    verify_window: float = 3.0
    signature_wait: float = 2.0
    aggregation_window: float = 3.0
    block_wait: float = 2.0
    train: TrainConfig = field(default_factory=lambda: TrainConfig(
        eta0=0.008, eta_decay=0.04, weight_decay=1e-4, batch_size=256
    ))
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    adversary: AdversaryConfig = field(default_factory=AdversaryConfig)
    # grid lists for the sweep experiments, e.g. {"collect_fraction": [0.5, 0.9],
    # "epsilon": [0.5, 2.0], "seeds": 3, "noisers": [3, 5, 10],
    # "stake_fractions": [0.1, 0.3, 0.5]}
    sweep: dict = field(default_factory=dict)

    # -- derived, reported in metadata ----------------------------------------

    @property
    def multikrum_sample_R(self) -> int:
        return max(3, round(self.collect_fraction * self.number_of_nodes))

    @property
    def updates_per_block_u(self) -> int:
        return max(1, self.multikrum_sample_R // 2)

    @property
    def adversary_upper_bound_f(self) -> int:
        return max_tolerable_f(self.multikrum_sample_R)

    def protocol_config(self) -> ProtocolConfig:
        return ProtocolConfig(
            backend_name=self.backend,
            model_family=self.model_family,
            n_features=self.dataset.features,
            n_classes=self.dataset.classes,
            total_iterations=self.total_iterations,
            scale_bits=self.scale_bits,
            epsilon=self.privacy_budget_epsilon,
            delta=self.delta,
            num_noisers=self.number_of_noisers,
            num_verifiers=self.number_of_verifiers,
            num_aggregators=self.number_of_aggregators,
            collect_fraction=self.collect_fraction,
            stake_reward=self.stake_reward,
            train=self.train,
        )

    def timeouts(self) -> StageTimeouts:
        return StageTimeouts(
            self.noise_wait,
            self.verify_window,
            self.signature_wait,
            self.aggregation_window,
            self.block_wait,
        )

    def sim_config(self) -> SimConfig:
        return SimConfig(self.latency_min, self.latency_max, self.churn_per_minute, self.seed)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["derived"] = {
            "multikrum_sample_R": self.multikrum_sample_R,
            "updates_per_block_u": self.updates_per_block_u,
            "adversary_upper_bound_f": self.adversary_upper_bound_f,
        }
        return out


def spec_from_dict(data: dict) -> ExperimentSpec:
    data = dict(data)
    data.pop("derived", None)
    if "train" in data and isinstance(data["train"], dict):
        data["train"] = TrainConfig(**data["train"])
    if "dataset" in data and isinstance(data["dataset"], dict):
        d = dict(data["dataset"])
        if "class_weights" in d and d["class_weights"] is not None:
            d["class_weights"] = tuple(d["class_weights"])
        data["dataset"] = DatasetSpec(**d)
    if "adversary" in data and isinstance(data["adversary"], dict):
        data["adversary"] = AdversaryConfig(**data["adversary"])
    known = {f.name for f in dataclasses.fields(ExperimentSpec)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    return ExperimentSpec(**data)


def load_spec(path) -> ExperimentSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top level must be a JSON object")
    try:
        return spec_from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{path}: {exc}") from None


def save_spec(path, spec: ExperimentSpec) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
