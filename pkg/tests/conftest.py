import numpy as np
import pytest

from chainlearn.bootstrap import build_genesis
from chainlearn.commitments import commit
from chainlearn.encoding import sha256, u64
from chainlearn.ledger import (
    Block,
    CommitmentEntry,
    ProtocolConfig,
    block_content_hash,
    round_committees,
    verifier_sign_context,
)
from chainlearn.quantize import decode, encode, sum_polys
from chainlearn.sgd import TrainConfig
from chainlearn.signatures import sign


def tiny_config(**overrides) -> ProtocolConfig:
    defaults = dict(
        backend_name="exponent",
        model_family="logreg",
        n_features=3,
        n_classes=2,
        total_iterations=6,
        scale_bits=20,
        epsilon=2.0,
        delta=1e-5,
        num_noisers=2,
        num_verifiers=3,
        num_aggregators=3,
        collect_fraction=0.7,
        stake_reward=5,
        train=TrainConfig(eta0=0.05, eta_decay=0.02, weight_decay=1e-4, batch_size=8),
    )
    defaults.update(overrides)
    return ProtocolConfig(**defaults)


@pytest.fixture(scope="session")
def tiny_net():
    """A 12-peer genesis on the exponent backend, shared read-only."""
    config = tiny_config()
    genesis, secrets = build_genesis(config, range(12), b"tiny-net-seed")
    return genesis, secrets


def honest_block(genesis, secrets, ledger, seed=0, contributor_count=4):
    """Build a fully valid block for the next round without running the network."""
    backend = genesis.commit_pk.backend
    t = ledger.tip_iteration() + 1
    prev = ledger.tip_hash()
    verifiers, aggregators = round_committees(genesis, ledger.stake, prev, t)
    committee = set(verifiers.committee) | set(aggregators.committee)
    eligible = [p for p in sorted(genesis.peer_pubkeys) if p not in committee]
    contributors = eligible[:contributor_count]
    rng = np.random.default_rng(seed)
    dim = len(genesis.initial_model)

    polys = {}
    entries = []
    for pid in contributors:
        v = rng.normal(scale=0.05, size=dim)
        q = encode(
            v,
            int.from_bytes(sha256(b"blind" + u64(pid) + u64(t)), "big") % backend.order,
            backend.order,
            genesis.config.scale_bits,
        )
        polys[pid] = q
        c = commit(genesis.commit_pk, q)
        context = verifier_sign_context(t, c, backend)
        sigs = tuple(
            (vid, sign(backend, secrets[vid].keypair, context)) for vid in verifiers.committee
        )
        entries.append(CommitmentEntry(pid, c, sigs))

    aggregate = sum_polys([polys[p] for p in contributors])
    prev_weights = ledger.current_model().weights
    block = Block(
        prev_hash=prev,
        iteration=t,
        aggregate_poly=aggregate,
        model_weights=prev_weights + decode(aggregate),
        commitments=tuple(entries),
        aggregator_sigs=(),
    )
    proposer = aggregators.committee[0]
    sig = sign(backend, secrets[proposer].keypair, block_content_hash(block, backend))
    return Block(
        block.prev_hash,
        block.iteration,
        block.aggregate_poly,
        block.model_weights,
        block.commitments,
        ((proposer, sig),),
    )


def resign_as_proposer(block, genesis, secrets, ledger):
    """Re-sign a (possibly tampered) block with the legitimate proposer's key,
    modelling a Byzantine aggregator endorsing bogus content."""
    backend = genesis.commit_pk.backend
    _, aggregators = round_committees(genesis, ledger.stake, block.prev_hash, block.iteration)
    proposer = aggregators.committee[0]
    sig = sign(backend, secrets[proposer].keypair, block_content_hash(block, backend))
    return Block(
        block.prev_hash,
        block.iteration,
        block.aggregate_poly,
        block.model_weights,
        block.commitments,
        ((proposer, sig),),
    )
