"""Genesis ceremony: the trusted one-time setup peers bootstrap from.

Derives every peer's keypair and noise seed from a master seed, runs the
commitment-key setup, pre-commits all noise for all iterations into the
noise table and freezes the initial stake.  Everything a joining peer needs
is in the returned genesis block; the per-peer secrets go to the peers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import sha256, u64
from .commitments import trusted_setup
from .groups import get_backend
from .ledger import GenesisBlock, ProtocolConfig
from .models import make_model
from .noise import build_noise_table
from .signatures import KeyPair, keygen
from .stake import STAKE_RULE_NAME


@dataclass(frozen=True)
class PeerSecrets:
    keypair: KeyPair
    noise_seed: bytes


def model_dim(config: ProtocolConfig) -> int:
    return make_model(config.model_family, config.n_features, config.n_classes).dim


def build_genesis(
    config: ProtocolConfig,
    peer_ids,
    master_seed: bytes,
    initial_stake: int = 10,
    zero_noise_peers=frozenset(),
) -> tuple[GenesisBlock, dict]:
    """Returns (genesis block, {peer id -> PeerSecrets})."""
    backend = get_backend(config.backend_name)
    peer_ids = sorted(peer_ids)
    dim = model_dim(config)
    pk = trusted_setup(backend, dim, sha256(b"commit-key" + master_seed))

    secrets = {}
    pubkeys = {}
    noise_seeds = {}
    for pid in peer_ids:
        kp = keygen(backend, sha256(b"peer-key" + master_seed + u64(pid)))
        noise_seed = sha256(b"noise-seed" + master_seed + u64(pid))
        secrets[pid] = PeerSecrets(kp, noise_seed)
        pubkeys[pid] = kp.public
        noise_seeds[pid] = noise_seed

    table = build_noise_table(
        pk,
        noise_seeds,
        config.total_iterations,
        config.epsilon,
        config.delta,
        config.train.batch_size,
        config.train.eta_at,
        config.scale_bits,
        zero_noise_peers=zero_noise_peers,
    )

    genesis = GenesisBlock(
        initial_model=np.zeros(dim),
        commit_pk=pk,
        peer_pubkeys=pubkeys,
        noise_table=table,
        initial_stake={pid: initial_stake for pid in peer_ids},
        stake_rule=STAKE_RULE_NAME,
        global_key=sha256(b"global-key" + master_seed),
        config=config,
    )
    return genesis, secrets
