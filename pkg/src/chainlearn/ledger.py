"""Block structure, genesis, chain validation and catch-up.

A block seals one training round: the summed update polynomial (blinding
slots included), the resulting model snapshot, the per-peer update
commitments with their verifier signature lists, and the minting
aggregator's signatures.  Validation is fully recomputable from public
data: hash link, committee membership via the stake-ring draws, signature
majorities, the commitment-product identity

    commit(aggregate) == product of committed updates

and the model arithmetic w_t = w_{t-1} + decode(aggregate).

Rejections carry a machine-readable reason string from REJECTION_REASONS.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import signatures
from .commitments import Commitment, CommitPK, combine, commit
from .committees import ROLE_AGGREGATE, ROLE_VERIFY, committee_seed, draw_committee
from .encoding import ByteReader, ByteWriter, sha256
from .models import ModelParams
from .noise import NoiseTable
from .quantize import QuantizedPoly, decode
from .sgd import TrainConfig
from .stake import build_ring, update_stake

GENESIS_PREV_HASH = b"\x00" * 32

REJECTION_REASONS = frozenset(
    {
        "bad-prev-hash",
        "bad-iteration",
        "empty-commitment-list",
        "duplicate-contributor",
        "contributor-on-committee",
        "missing-verifier-majority",
        "bad-verifier-signature",
        "no-aggregator-signature",
        "bad-aggregator-signature",
        "commitment-product-mismatch",
        "model-arithmetic-mismatch",
        "bad-dimension",
    }
)


@dataclass(frozen=True)
class ProtocolConfig:
    """Consensus-relevant knobs every peer reads from genesis."""

    backend_name: str
    model_family: str
    n_features: int
    n_classes: int
    total_iterations: int
    scale_bits: int
    epsilon: float
    delta: float
    num_noisers: int
    num_verifiers: int
    num_aggregators: int
    collect_fraction: float  # R = round(fraction * live peers)
    stake_reward: int
    train: TrainConfig

    def to_bytes(self) -> bytes:
        w = ByteWriter()
        w.bytes_lp(self.backend_name.encode())
        w.bytes_lp(self.model_family.encode())
        w.u32(self.n_features)
        w.u32(self.n_classes)
        w.u32(self.total_iterations)
        w.u32(self.scale_bits)
        w.f64(self.epsilon)
        w.f64(self.delta)
        w.u32(self.num_noisers)
        w.u32(self.num_verifiers)
        w.u32(self.num_aggregators)
        w.f64(self.collect_fraction)
        w.u32(self.stake_reward)
        t = self.train
        w.f64(t.eta0).f64(t.eta_decay).f64(t.weight_decay)
        w.u32(t.batch_size).u32(t.total_iterations)
        return w.getvalue()

    @classmethod
    def from_reader(cls, r: ByteReader) -> "ProtocolConfig":
        backend_name = r.bytes_lp().decode()
        model_family = r.bytes_lp().decode()
        n_features = r.u32()
        n_classes = r.u32()
        total_iterations = r.u32()
        scale_bits = r.u32()
        epsilon = r.f64()
        delta = r.f64()
        num_noisers = r.u32()
        num_verifiers = r.u32()
        num_aggregators = r.u32()
        collect_fraction = r.f64()
        stake_reward = r.u32()
        train = TrainConfig(r.f64(), r.f64(), r.f64(), r.u32(), r.u32())
        return cls(
            backend_name,
            model_family,
            n_features,
            n_classes,
            total_iterations,
            scale_bits,
            epsilon,
            delta,
            num_noisers,
            num_verifiers,
            num_aggregators,
            collect_fraction,
            stake_reward,
            train,
        )


@dataclass(frozen=True)
class GenesisBlock:
    initial_model: np.ndarray
    commit_pk: CommitPK
    peer_pubkeys: dict  # peer id -> G1 element
    noise_table: NoiseTable
    initial_stake: dict
    stake_rule: str
    global_key: bytes
    config: ProtocolConfig

    def to_bytes(self) -> bytes:
        backend = self.commit_pk.backend
        w = ByteWriter()
        w.f64_vector(self.initial_model)
        w.bytes_lp(self.commit_pk.to_bytes())
        w.u32(len(self.peer_pubkeys))
        for pid in sorted(self.peer_pubkeys):
            w.u32(pid)
            w.raw(backend.g1_to_bytes(self.peer_pubkeys[pid]))
        w.u32(len(self.noise_table.commitments))
        w.u32(self.noise_table.iterations)
        for pid in sorted(self.noise_table.commitments):
            w.u32(pid)
            for c in self.noise_table.commitments[pid]:
                w.raw(backend.g1_to_bytes(c.value))
        w.u32(len(self.initial_stake))
        for pid in sorted(self.initial_stake):
            w.u32(pid)
            w.u64(self.initial_stake[pid])
        w.bytes_lp(self.stake_rule.encode())
        w.bytes_lp(self.global_key)
        w.bytes_lp(self.config.to_bytes())
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, backend) -> "GenesisBlock":
        r = ByteReader(data)
        initial_model = np.array(r.f64_vector())
        pk = CommitPK.from_bytes(backend, r.bytes_lp())
        size = backend.element_size
        pubkeys = {}
        for _ in range(r.u32()):
            pid = r.u32()
            pubkeys[pid] = backend.g1_from_bytes(r.raw(size))
        n_peers = r.u32()
        iters = r.u32()
        table = {}
        for _ in range(n_peers):
            pid = r.u32()
            table[pid] = tuple(
                Commitment(backend.g1_from_bytes(r.raw(size))) for _ in range(iters)
            )
        stake = {}
        for _ in range(r.u32()):
            pid = r.u32()
            stake[pid] = r.u64()
        stake_rule = r.bytes_lp().decode()
        global_key = r.bytes_lp()
        config = ProtocolConfig.from_reader(ByteReader(r.bytes_lp()))
        return cls(
            initial_model,
            pk,
            pubkeys,
            NoiseTable(table, iters),
            stake,
            stake_rule,
            global_key,
            config,
        )

    def hash(self) -> bytes:
        return sha256(GENESIS_PREV_HASH + self.to_bytes())


@dataclass(frozen=True)
class CommitmentEntry:
    peer: int
    commitment: Commitment
    verifier_sigs: tuple  # (verifier_id, signature)


@dataclass(frozen=True)
class Block:
    prev_hash: bytes
    iteration: int
    aggregate_poly: QuantizedPoly
    model_weights: np.ndarray
    commitments: tuple  # CommitmentEntry, ordered by peer id
    aggregator_sigs: tuple  # (aggregator_id, signature over content hash)


def _poly_to_writer(w: ByteWriter, poly: QuantizedPoly, backend) -> None:
    width = (backend.order.bit_length() + 7) // 8
    w.u32(poly.scale_bits)
    w.u32(len(poly.coeffs))
    for c in poly.coeffs:
        w.raw(int(c).to_bytes(width, "little"))


def _poly_from_reader(r: ByteReader, backend) -> QuantizedPoly:
    width = (backend.order.bit_length() + 7) // 8
    scale_bits = r.u32()
    n = r.u32()
    coeffs = tuple(int.from_bytes(r.raw(width), "little") for _ in range(n))
    return QuantizedPoly(coeffs, scale_bits, backend.order)


def block_content_bytes(block: Block, backend) -> bytes:
    """Canonical serialization minus the aggregator signatures (what they sign)."""
    w = ByteWriter()
    w.raw(block.prev_hash)
    w.u32(block.iteration)
    _poly_to_writer(w, block.aggregate_poly, backend)
    w.f64_vector(block.model_weights)
    w.u32(len(block.commitments))
    for entry in block.commitments:
        w.u32(entry.peer)
        w.raw(backend.g1_to_bytes(entry.commitment.value))
        w.u32(len(entry.verifier_sigs))
        for vid, sig in entry.verifier_sigs:
            w.u32(vid)
            w.bytes_lp(sig)
    return w.getvalue()


def block_to_bytes(block: Block, backend) -> bytes:
    w = ByteWriter()
    w.raw(block_content_bytes(block, backend))
    w.u32(len(block.aggregator_sigs))
    for aid, sig in block.aggregator_sigs:
        w.u32(aid)
        w.bytes_lp(sig)
    return w.getvalue()


def block_from_bytes(data: bytes, backend) -> Block:
    r = ByteReader(data)
    prev_hash = r.raw(32)
    iteration = r.u32()
    poly = _poly_from_reader(r, backend)
    weights = np.array(r.f64_vector())
    entries = []
    for _ in range(r.u32()):
        pid = r.u32()
        c = Commitment(backend.g1_from_bytes(r.raw(backend.element_size)))
        sigs = []
        for _ in range(r.u32()):
            vid = r.u32()
            sigs.append((vid, r.bytes_lp()))
        entries.append(CommitmentEntry(pid, c, tuple(sigs)))
    agg_sigs = []
    for _ in range(r.u32()):
        aid = r.u32()
        agg_sigs.append((aid, r.bytes_lp()))
    return Block(prev_hash, iteration, poly, weights, tuple(entries), tuple(agg_sigs))


def block_content_hash(block: Block, backend) -> bytes:
    return sha256(block_content_bytes(block, backend))


def block_hash(block: Block, backend) -> bytes:
    return sha256(block_to_bytes(block, backend))


def verifier_sign_context(iteration: int, commitment: Commitment, backend) -> bytes:
    """Message a verifier signs to endorse one peer's update commitment."""
    return b"accept" + iteration.to_bytes(4, "little") + backend.g1_to_bytes(commitment.value)


def round_committees(genesis: GenesisBlock, stake: dict, prev_hash: bytes, iteration: int):
    """The (verifier, aggregator) committees every peer derives identically."""
    ring = build_ring(stake)
    cfg = genesis.config
    v_seed = committee_seed(genesis.global_key, prev_hash, ROLE_VERIFY, iteration)
    a_seed = committee_seed(genesis.global_key, prev_hash, ROLE_AGGREGATE, iteration)
    verifiers = draw_committee(ring, v_seed, cfg.num_verifiers)
    aggregators = draw_committee(ring, a_seed, cfg.num_aggregators)
    return verifiers, aggregators


class Ledger:
    """One peer's replica: genesis, the block list and the running stake."""

    def __init__(self, genesis: GenesisBlock):
        self.genesis = genesis
        self.backend = genesis.commit_pk.backend
        self.blocks: list[Block] = []
        self.stake = dict(genesis.initial_stake)

    # -- inspection ----------------------------------------------------------

    @property
    def height(self) -> int:
        return len(self.blocks)

    def tip_hash(self) -> bytes:
        if self.blocks:
            return block_hash(self.blocks[-1], self.backend)
        return self.genesis.hash()

    def tip_iteration(self) -> int:
        return self.blocks[-1].iteration if self.blocks else 0

    def current_model(self) -> ModelParams:
        if self.blocks:
            return ModelParams(self.blocks[-1].model_weights.copy(), self.blocks[-1].iteration)
        return ModelParams(self.genesis.initial_model.copy(), 0)

    # -- validation ----------------------------------------------------------

    def validate_block(self, block: Block) -> tuple[bool, str]:
        backend = self.backend
        cfg = self.genesis.config
        if block.prev_hash != self.tip_hash():
            return False, "bad-prev-hash"
        if not self.tip_iteration() < block.iteration <= cfg.total_iterations:
            return False, "bad-iteration"
        if len(block.commitments) == 0:
            return False, "empty-commitment-list"
        if block.aggregate_poly.dim != len(self.genesis.initial_model) or len(
            block.model_weights
        ) != len(self.genesis.initial_model):
            return False, "bad-dimension"

        verifiers, aggregators = round_committees(
            self.genesis, self.stake, block.prev_hash, block.iteration
        )
        committee_members = set(verifiers.committee) | set(aggregators.committee)

        peers_seen = set()
        majority = len(verifiers.committee) // 2 + 1
        for entry in block.commitments:
            if entry.peer in peers_seen:
                return False, "duplicate-contributor"
            peers_seen.add(entry.peer)
            if entry.peer in committee_members:
                return False, "contributor-on-committee"
            context = verifier_sign_context(block.iteration, entry.commitment, backend)
            valid = set()
            for vid, sig in entry.verifier_sigs:
                if vid not in verifiers.committee or vid in valid:
                    return False, "bad-verifier-signature"
                if not signatures.verify(backend, self.genesis.peer_pubkeys[vid], context, sig):
                    return False, "bad-verifier-signature"
                valid.add(vid)
            if len(valid) < majority:
                return False, "missing-verifier-majority"

        if not block.aggregator_sigs:
            return False, "no-aggregator-signature"
        content = block_content_hash(block, backend)
        for aid, sig in block.aggregator_sigs:
            if aid not in aggregators.committee:
                return False, "bad-aggregator-signature"
            if not signatures.verify(backend, self.genesis.peer_pubkeys[aid], content, sig):
                return False, "bad-aggregator-signature"

        combined = combine(backend, [e.commitment for e in block.commitments])
        if commit(self.genesis.commit_pk, block.aggregate_poly).value != combined.value:
            return False, "commitment-product-mismatch"

        prev_weights = (
            self.blocks[-1].model_weights if self.blocks else self.genesis.initial_model
        )
        expected = prev_weights + decode(block.aggregate_poly)
        if not np.array_equal(expected, block.model_weights):
            return False, "model-arithmetic-mismatch"
        return True, ""

    # -- mutation ------------------------------------------------------------

    def append(self, block: Block) -> tuple[bool, str]:
        ok, reason = self.validate_block(block)
        if not ok:
            return False, reason
        verifiers, aggregators = round_committees(
            self.genesis, self.stake, block.prev_hash, block.iteration
        )
        rewarded = (
            [e.peer for e in block.commitments]
            + list(verifiers.committee)
            + list(aggregators.committee)
        )
        self.stake = update_stake(self.stake, rewarded, self.genesis.config.stake_reward)
        self.blocks.append(block)
        return True, ""

    def catch_up(self, remote_blocks) -> tuple[bool, str]:
        """Adopt a longer valid chain that extends ours; otherwise keep local.

        ``remote_blocks`` is the remote's full block list (genesis excluded).
        """
        remote_blocks = list(remote_blocks)
        if len(remote_blocks) <= self.height:
            return False, "remote-not-longer"
        for mine, theirs in zip(self.blocks, remote_blocks):
            if block_hash(mine, self.backend) != block_hash(theirs, self.backend):
                return False, "prefix-mismatch"
        trial = Ledger(self.genesis)
        for b in remote_blocks:
            ok, reason = trial.append(b)
            if not ok:
                return False, f"invalid-remote-block@{b.iteration}:{reason}"
        self.blocks = trial.blocks
        self.stake = trial.stake
        return True, ""


# --- chain persistence -------------------------------------------------------

CHAIN_MAGIC = b"CLCHAIN1"


def save_chain(path, ledger: Ledger) -> None:
    with open(path, "wb") as fh:
        fh.write(CHAIN_MAGIC)
        genesis_bytes = ledger.genesis.to_bytes()
        fh.write(len(genesis_bytes).to_bytes(4, "little"))
        fh.write(genesis_bytes)
        for block in ledger.blocks:
            data = block_to_bytes(block, ledger.backend)
            fh.write(len(data).to_bytes(4, "little"))
            fh.write(data)


def load_chain(path, backend) -> Ledger:
    """Load and revalidate a persisted chain; raises ValueError naming the
    first bad block."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[: len(CHAIN_MAGIC)] != CHAIN_MAGIC:
        raise ValueError(f"{path}: not a chain file (bad magic)")
    pos = len(CHAIN_MAGIC)

    def take_record():
        nonlocal pos
        if pos + 4 > len(data):
            raise ValueError(f"{path}: truncated record length at byte {pos}")
        n = int.from_bytes(data[pos : pos + 4], "little")
        pos_new = pos + 4 + n
        if pos_new > len(data):
            raise ValueError(f"{path}: truncated record at byte {pos}")
        out = data[pos + 4 : pos_new]
        pos = pos_new
        return out

    genesis = GenesisBlock.from_bytes(take_record(), backend)
    ledger = Ledger(genesis)
    index = 0
    while pos < len(data):
        block = block_from_bytes(take_record(), backend)
        ok, reason = ledger.append(block)
        if not ok:
            raise ValueError(f"{path}: block {index} (iteration {block.iteration}) invalid: {reason}")
        index += 1
    return ledger
