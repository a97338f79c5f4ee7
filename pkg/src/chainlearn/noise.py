"""Pre-committed differentially private noise and update masking.

Every peer's noise vector for every iteration is derived deterministically
from a per-peer seed, quantized, and committed into an N-by-T table at
genesis.  At run time the same derivation reproduces the committed vector
bit-exactly, so a verifier can check a masked update against genesis
commitments without ever seeing the bare update: the mask's commitment must
equal the product of the update commitment and the table entries.

Per iteration the noise is a batch-averaged Gaussian: sigma scales the
per-example draw, and the same learning-rate schedule used for updates
scales the sum, so masked updates stay on the update's own footing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .commitments import Commitment, CommitPK, commit
from .encoding import sha256, u64
from .quantize import DEFAULT_SCALE_BITS, QuantizedPoly, encode, sum_polys


def gaussian_sigma(epsilon: float, delta: float) -> float:
    """Per-example noise scale for an (epsilon, delta) private step."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return math.sqrt(2.0 * math.log(1.25 / delta)) / epsilon


@dataclass(frozen=True)
class NoiseVector:
    zeta: np.ndarray
    quantized: QuantizedPoly
    owner: int
    iteration: int


@dataclass
class NoiseTable:
    """Commitments to every peer's noise for every iteration, frozen at genesis."""

    commitments: dict  # peer id -> tuple[Commitment], index t-1 for iteration t
    iterations: int

    def entry(self, peer: int, iteration: int) -> Commitment:
        if peer not in self.commitments:
            raise KeyError(f"unknown peer {peer}")
        if not 1 <= iteration <= self.iterations:
            raise ValueError(f"iteration {iteration} outside 1..{self.iterations}")
        return self.commitments[peer][iteration - 1]


def _rng_for(peer_seed: bytes, iteration: int):
    digest = sha256(b"noise" + peer_seed + u64(iteration))
    return np.random.default_rng(int.from_bytes(digest, "big"))


def generate_noise(
    dim: int,
    epsilon: float,
    delta: float,
    batch_size: int,
    eta_t: float,
    peer_seed: bytes,
    iteration: int,
    modulus: int,
    scale_bits: int = DEFAULT_SCALE_BITS,
    owner: int = -1,
    zero: bool = False,
) -> NoiseVector:
    """Deterministic noise for (peer_seed, iteration).

    ``zero=True`` models an adversary that commits all-zero noise (blinding
    included) so that colluders can unmask a victim's update.
    """
    if batch_size < 1:
        raise ValueError("batch size must be at least 1")
    if zero:
        zeta = np.zeros(dim)
        blinding = 0
    else:
        sigma = gaussian_sigma(epsilon, delta)
        rng = _rng_for(peer_seed, iteration)
        draws = rng.normal(0.0, sigma, size=(batch_size, dim))
        zeta = draws.sum(axis=0) * (eta_t / batch_size)
        blinding = int.from_bytes(rng.bytes(40), "little") % modulus
    quantized = encode(zeta, blinding, modulus, scale_bits)
    return NoiseVector(zeta, quantized, owner, iteration)


def build_noise_table(
    pk: CommitPK,
    peer_seeds: dict,
    iterations: int,
    epsilon: float,
    delta: float,
    batch_size: int,
    eta_schedule,
    scale_bits: int = DEFAULT_SCALE_BITS,
    zero_noise_peers=frozenset(),
) -> NoiseTable:
    """Commit every peer's noise for t in 1..iterations.

    ``eta_schedule(t)`` must be the exact learning-rate function used for
    training so runtime regeneration matches the genesis commitments.
    """
    modulus = pk.backend.order
    table = {}
    for peer, seed in peer_seeds.items():
        row = []
        for t in range(1, iterations + 1):
            nv = generate_noise(
                pk.degree,
                epsilon,
                delta,
                batch_size,
                eta_schedule(t),
                seed,
                t,
                modulus,
                scale_bits,
                owner=peer,
                zero=peer in zero_noise_peers,
            )
            row.append(commit(pk, nv.quantized))
        table[peer] = tuple(row)
    return NoiseTable(table, iterations)


def mask_update(update_q: QuantizedPoly, noises) -> QuantizedPoly:
    """Field-domain sum of the update with its noise vectors (blinding slots
    included), the only form of the update a verifier ever sees."""
    noises = list(noises)
    if not noises:
        raise ValueError("at least one noise vector is required")
    return sum_polys([update_q] + noises)
