"""The per-peer update rule and model application.

A local update is one regularized SGD step against the shared model,
computed on a uniformly sampled (with replacement) batch of local data and
carried as a delta that the ledger later adds to the model:

    delta = -eta_t * (lambda * w + mean_batch grad)

clipped to unit Euclidean norm so committed noise of a known scale can mask
it.  The learning rate decays as eta_t = eta0 / (1 + decay * t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ModelParams

CLIP_NORM = 1.0


@dataclass(frozen=True)
class TrainConfig:
    eta0: float = 0.05
    eta_decay: float = 0.02
    weight_decay: float = 1e-4  # lambda
    batch_size: int = 64
    total_iterations: int = 100

    def __post_init__(self):
        if self.eta0 <= 0 or self.eta_decay < 0:
            raise ValueError("learning-rate schedule must be positive and non-increasing")
        if self.weight_decay < 0:
            raise ValueError("weight decay must be non-negative")
        if self.batch_size < 1 or self.total_iterations < 1:
            raise ValueError("batch size and iteration count must be positive")

    def eta_at(self, t: int) -> float:
        return self.eta0 / (1.0 + self.eta_decay * t)


@dataclass(frozen=True)
class UpdateVector:
    delta: np.ndarray
    peer: int
    iteration: int


def clip_to_unit_norm(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm > CLIP_NORM:
        return v * (CLIP_NORM / norm)
    return v


def compute_local_update(
    model, params: ModelParams, dataset, cfg: TrainConfig, rng_seed: int, peer: int = -1
) -> UpdateVector:
    """One deterministic local step; same seed, same bits."""
    n = len(dataset.labels)
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    if dataset.features.shape[1] != model.n_features:
        raise ValueError("dataset feature dimension does not match the model")
    rng = np.random.default_rng(rng_seed)
    batch = rng.integers(0, n, size=cfg.batch_size)
    grad = model.mean_grad(params.weights, dataset.features[batch], dataset.labels[batch])
    if not np.all(np.isfinite(grad)):
        raise ValueError("non-finite gradient")
    t = params.iteration
    delta = -cfg.eta_at(t) * (cfg.weight_decay * params.weights + grad)
    return UpdateVector(clip_to_unit_norm(delta), peer, t)


def apply_aggregate(params: ModelParams, aggregate: np.ndarray) -> ModelParams:
    """Element-wise add of a round's summed updates; bumps the iteration."""
    aggregate = np.asarray(aggregate, dtype=np.float64)
    if aggregate.shape != params.weights.shape:
        raise ValueError(
            f"aggregate dimension {aggregate.shape} does not match model {params.weights.shape}"
        )
    return ModelParams(params.weights + aggregate, params.iteration + 1)
