"""Per-peer state machine for one training round.

Round shape (all peers derive the same committees from the chain tip):

  updaters        compute a local update, fetch noise from their VRF-drawn
                  noisers, submit the masked update with its commitment,
                  the noise commitments and the noiser VRF proof to every
                  verifier, then wait for signatures;
  verifiers       pool masked submissions until their window closes, check
                  each against the genesis noise table and the masking
                  equality, run Multi-KRUM on the decoded masked updates and
                  sign the winners' commitments;
  updaters        with a majority of verifier signatures deal their update
                  into witness-carrying shares, one slice per aggregator;
  aggregators     verify bundles, sum accepted shares point-wise; the
                  round's proposer announces the contributor set, collects
                  summed shares from half the committee, interpolates the
                  aggregate, mints the block and broadcasts it.

Every stage runs against a deadline; a round that produces no block is
voided and the peer moves on.  All transitions are deterministic given the
message sequence, which the simulator makes reproducible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import signatures
from .commitments import Commitment, commit
from .committees import VrfOutput, draw_committee, noiser_seed, verify_vrf
from .encoding import ByteWriter, sha256, u64
from .krum import KrumConfig, max_tolerable_f, multi_krum_select
from .ledger import (
    Block,
    CommitmentEntry,
    Ledger,
    block_content_hash,
    round_committees,
    verifier_sign_context,
)
from .models import make_model
from .noise import generate_noise, mask_update
from .quantize import decode, encode
from .sgd import compute_local_update
from .stake import build_ring
from .vss import (
    ShareRecoveryError,
    accept_bundle,
    deal_shares,
    recover_aggregate,
    sum_shares,
)

BROADCAST = -1


class Stage(enum.Enum):
    IDLE = "idle"
    NOISING = "noising"
    AWAITING_SIGNATURES = "awaiting-signatures"
    DEALING = "dealing"
    AGGREGATING = "aggregating"
    AWAITING_BLOCK = "awaiting-block"


@dataclass(frozen=True)
class StageTimeouts:
    """Per-stage durations in simulated seconds."""

    noise_wait: float = 2.0
    verify_window: float = 3.0
    signature_wait: float = 2.0
    aggregation_window: float = 3.0
    block_wait: float = 2.0

    def __post_init__(self):
        for name in ("noise_wait", "verify_window", "signature_wait", "aggregation_window", "block_wait"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def verify_deadline(self) -> float:
        return self.noise_wait + self.verify_window

    @property
    def aggregation_deadline(self) -> float:
        return self.verify_deadline + self.signature_wait + self.aggregation_window

    @property
    def round_budget(self) -> float:
        return self.aggregation_deadline + self.block_wait


# --- messages ----------------------------------------------------------------


@dataclass(frozen=True)
class NoiseRequest:
    iteration: int
    sender: int


@dataclass(frozen=True)
class NoiseResponse:
    iteration: int
    sender: int
    quantized: object  # QuantizedPoly


@dataclass(frozen=True)
class UpdateSubmission:
    iteration: int
    sender: int
    masked: object  # QuantizedPoly
    commitment: Commitment
    noise_commitments: tuple  # (noiser id, commitment bytes) in draw order
    noiser_vrf: VrfOutput
    signature: bytes = b""

    def payload_bytes(self, backend) -> bytes:
        w = ByteWriter()
        w.u32(self.iteration)
        w.u32(self.sender)
        width = (backend.order.bit_length() + 7) // 8
        w.u32(self.masked.scale_bits)
        w.u32(len(self.masked.coeffs))
        for c in self.masked.coeffs:
            w.raw(int(c).to_bytes(width, "little"))
        w.raw(backend.g1_to_bytes(self.commitment.value))
        w.u32(len(self.noise_commitments))
        for nid, cbytes in self.noise_commitments:
            w.u32(nid)
            w.bytes_lp(cbytes)
        w.bytes_lp(self.noiser_vrf.proof)
        w.bytes_lp(self.noiser_vrf.seed)
        for member in self.noiser_vrf.committee:
            w.u32(member)
        return b"submission" + w.getvalue()


@dataclass(frozen=True)
class SignatureGrant:
    iteration: int
    sender: int  # verifier
    target: int  # update owner
    signature: bytes


@dataclass(frozen=True)
class BundleMsg:
    iteration: int
    sender: int  # dealer
    bundle: object  # ShareBundle


@dataclass(frozen=True)
class AggAnnounce:
    iteration: int
    sender: int  # proposer
    contributors: tuple


@dataclass(frozen=True)
class AggShareMsg:
    iteration: int
    sender: int  # aggregator
    contributors: tuple
    shares: tuple  # AggregateShare
    signature: bytes = b""

    def payload_bytes(self, backend) -> bytes:
        w = ByteWriter()
        w.u32(self.iteration)
        w.u32(self.sender)
        for c in self.contributors:
            w.u32(c)
        for s in self.shares:
            w.int_lp(s.point)
            w.int_lp(s.summed_eval)
            w.raw(backend.g1_to_bytes(s.summed_witness))
            w.u32(s.contributor_count)
        return b"aggshare" + w.getvalue()


@dataclass(frozen=True)
class BlockMsg:
    iteration: int
    sender: int
    block: Block


@dataclass(frozen=True)
class ChainRequest:
    sender: int


@dataclass(frozen=True)
class ChainResponse:
    sender: int
    blocks: tuple


@dataclass(frozen=True)
class Timer:
    """Scheduled wake-up; ``tag`` identifies the stage deadline."""

    iteration: int
    tag: str


# --- standalone checks --------------------------------------------------------


def verify_masked_submission(sub: UpdateSubmission, genesis, stake: dict, prev_hash: bytes) -> bool:
    """All verifier-side structural checks for one masked update."""
    backend = genesis.commit_pk.backend
    cfg = genesis.config
    if sub.sender not in genesis.peer_pubkeys:
        return False
    pub = genesis.peer_pubkeys[sub.sender]
    if not signatures.verify(backend, pub, sub.payload_bytes(backend), sub.signature):
        return False
    # the noiser draw must be the sender's own, for this tip and round
    expected_seed = noiser_seed(backend.g1_to_bytes(pub), prev_hash, sub.iteration)
    if len(sub.noiser_vrf.committee) != cfg.num_noisers:
        return False
    if not verify_vrf(
        sub.noiser_vrf,
        expected_seed,
        stake,
        backend=backend,
        public_key=pub,
        exclude={sub.sender},
    ):
        return False
    if tuple(nid for nid, _ in sub.noise_commitments) != sub.noiser_vrf.committee:
        return False
    # listed noise commitments must be the genesis table entries
    product = sub.commitment.value
    for nid, cbytes in sub.noise_commitments:
        try:
            entry = genesis.noise_table.entry(nid, sub.iteration)
        except (KeyError, ValueError):
            return False
        if backend.g1_to_bytes(entry.value) != cbytes:
            return False
        product = backend.g1_add(product, entry.value)
    # masking equality: commit(masked) == commit(update) * prod commit(noise)
    return commit(genesis.commit_pk, sub.masked).value == product


def sample_for_krum(pool_ids, target: int, prev_hash: bytes, iteration: int) -> list[int]:
    """Deterministically sample ``target`` submitters from the pool, seeded by
    the chain tip so every verifier picks the same set."""
    ordered = sorted(pool_ids)
    if len(ordered) <= target:
        return ordered
    seed = int.from_bytes(sha256(b"krum-sample" + prev_hash + u64(iteration)), "big")
    rng = np.random.default_rng(seed)
    picked = rng.permutation(len(ordered))[:target]
    return sorted(ordered[i] for i in picked)


# --- the peer -----------------------------------------------------------------


@dataclass
class RoundState:
    iteration: int = 0
    started_at: float = 0.0
    verifiers: tuple = ()
    aggregators: tuple = ()
    noiser_vrf: VrfOutput | None = None
    update_q: object = None
    commitment: Commitment | None = None
    noise_responses: dict = field(default_factory=dict)
    submitted: bool = False
    grants: dict = field(default_factory=dict)
    dealt: bool = False
    # verifier side
    pool: dict = field(default_factory=dict)
    signed_off: bool = False
    # aggregator side
    accepted_bundles: dict = field(default_factory=dict)
    announce: tuple | None = None
    announced: bool = False
    agg_shares: dict = field(default_factory=dict)
    minted: bool = False


class PeerNode:
    """One peer: ledger replica, local data, per-round protocol state."""

    def __init__(self, peer_id: int, genesis, secrets, dataset, timeouts: StageTimeouts,
                 zero_noise: bool = False):
        self.id = peer_id
        self.genesis = genesis
        self.backend = genesis.commit_pk.backend
        self.secrets = secrets
        self.dataset = dataset
        self.timeouts = timeouts
        self.zero_noise = zero_noise
        self.ledger = Ledger(genesis)
        cfg = genesis.config
        self.model = make_model(cfg.model_family, cfg.n_features, cfg.n_classes)
        self.stage = Stage.IDLE
        self.round = RoundState()
        self.audit: list[str] = []
        self.submissions_made = 0

    # -- helpers ---------------------------------------------------------------

    @property
    def config(self):
        return self.genesis.config

    def _pubkey_bytes(self) -> bytes:
        return self.backend.g1_to_bytes(self.secrets.keypair.public)

    def r_target(self) -> int:
        return max(3, round(self.config.collect_fraction * len(self.genesis.peer_pubkeys)))

    def u_target(self) -> int:
        return max(1, self.r_target() // 2)

    def is_verifier(self) -> bool:
        return self.id in self.round.verifiers

    def is_aggregator(self) -> bool:
        return self.id in self.round.aggregators

    def is_proposer(self) -> bool:
        return self.round.aggregators and self.round.aggregators[0] == self.id

    # -- round control ----------------------------------------------------------

    def start_round(self, iteration: int, now: float) -> list:
        """Begin round ``iteration``; returns (dest, message-or-timer) pairs."""
        if iteration > self.config.total_iterations:
            self.stage = Stage.IDLE
            self.round = RoundState(iteration=iteration)  # marks this peer finished
            return []
        prev_hash = self.ledger.tip_hash()
        verifiers, aggregators = round_committees(
            self.genesis, self.ledger.stake, prev_hash, iteration
        )
        self.round = RoundState(
            iteration=iteration,
            started_at=now,
            verifiers=verifiers.committee,
            aggregators=aggregators.committee,
        )
        out = [(self.id, Timer(iteration, "round-budget"), self.timeouts.round_budget)]
        if self.is_verifier():
            out.append((self.id, Timer(iteration, "verify-deadline"), self.timeouts.verify_deadline))
        if self.is_aggregator():
            out.append(
                (self.id, Timer(iteration, "aggregation-deadline"), self.timeouts.aggregation_deadline)
            )
        if not self.is_verifier() and not self.is_aggregator():
            out.extend(self._begin_update(prev_hash))
        else:
            self.stage = Stage.AGGREGATING if self.is_aggregator() else Stage.AWAITING_BLOCK
        return out

    def _begin_update(self, prev_hash: bytes) -> list:
        cfg = self.config
        t = self.round.iteration
        if len(self.dataset) == 0:
            self.audit.append(f"r{t}: no local data, skipping update")
            self.stage = Stage.AWAITING_BLOCK
            return []
        params = self.ledger.current_model()
        seed = int.from_bytes(sha256(b"batch" + self.secrets.noise_seed + u64(t)), "big")
        try:
            update = compute_local_update(self.model, params, self.dataset, cfg.train, seed, self.id)
        except ValueError as exc:
            self.audit.append(f"r{t}: local update failed: {exc}")
            self.stage = Stage.AWAITING_BLOCK
            return []
        blinding = int.from_bytes(sha256(b"blind" + self.secrets.noise_seed + u64(t)), "big")
        self.round.update_q = encode(
            update.delta, blinding % self.backend.order, self.backend.order, cfg.scale_bits
        )
        self.round.commitment = commit(self.genesis.commit_pk, self.round.update_q)
        ring = build_ring(self.ledger.stake)
        seed_bytes = noiser_seed(self._pubkey_bytes(), prev_hash, t)
        try:
            self.round.noiser_vrf = draw_committee(
                ring,
                seed_bytes,
                cfg.num_noisers,
                backend=self.backend,
                signer=self.secrets.keypair,
                exclude={self.id},
            )
        except ValueError as exc:
            self.audit.append(f"r{t}: noiser draw failed: {exc}")
            self.stage = Stage.AWAITING_BLOCK
            return []
        self.stage = Stage.NOISING
        return [(nid, NoiseRequest(t, self.id), None) for nid in self.round.noiser_vrf.committee]

    # -- event dispatch ----------------------------------------------------------

    def handle(self, event, now: float) -> list:
        """Process one message or timer; returns (dest, message, extra) actions.

        For sends the third slot is None; timer requests carry the delay.
        """
        if isinstance(event, Timer):
            return self.handle_timeout(event, now)
        handler = getattr(self, "_on_" + type(event).__name__, None)
        if handler is None:
            self.audit.append(f"dropped unknown message {type(event).__name__}")
            return []
        return handler(event, now)

    def handle_timeout(self, timer: Timer, now: float) -> list:
        if timer.iteration != self.round.iteration:
            return []  # stale timer from a voided round
        if timer.tag == "verify-deadline":
            return self._close_verification(now)
        if timer.tag == "aggregation-deadline":
            return self._close_aggregation(now)
        if timer.tag == "round-budget":
            # no block arrived: void the round, keep the model, move on
            self.stage = Stage.IDLE
            return self.start_round(self.round.iteration + 1, now)
        return []

    # -- noiser duty (any online peer) -------------------------------------------

    def _on_NoiseRequest(self, msg: NoiseRequest, now: float) -> list:
        cfg = self.config
        if not 1 <= msg.iteration <= cfg.total_iterations:
            self.audit.append(f"dropped noise request for round {msg.iteration}")
            return []
        nv = generate_noise(
            len(self.genesis.initial_model),
            cfg.epsilon,
            cfg.delta,
            cfg.train.batch_size,
            cfg.train.eta_at(msg.iteration),
            self.secrets.noise_seed,
            msg.iteration,
            self.backend.order,
            cfg.scale_bits,
            owner=self.id,
            zero=self.zero_noise,
        )
        return [(msg.sender, NoiseResponse(msg.iteration, self.id, nv.quantized), None)]

    def _on_NoiseResponse(self, msg: NoiseResponse, now: float) -> list:
        rs = self.round
        if (
            self.stage is not Stage.NOISING
            or msg.iteration != rs.iteration
            or rs.noiser_vrf is None
            or msg.sender not in rs.noiser_vrf.committee
        ):
            self.audit.append(f"dropped stray noise response from {msg.sender}")
            return []
        expected = self.genesis.noise_table.entry(msg.sender, rs.iteration)
        if commit(self.genesis.commit_pk, msg.quantized).value != expected.value:
            self.audit.append(f"r{rs.iteration}: noise from {msg.sender} mismatches genesis; voiding")
            self.stage = Stage.AWAITING_BLOCK
            return []
        rs.noise_responses[msg.sender] = msg.quantized
        if len(rs.noise_responses) < len(rs.noiser_vrf.committee):
            return []
        # all noise in hand: mask and submit to every verifier
        noises = [rs.noise_responses[nid] for nid in rs.noiser_vrf.committee]
        masked = mask_update(rs.update_q, noises)
        backend = self.backend
        listed = tuple(
            (nid, backend.g1_to_bytes(self.genesis.noise_table.entry(nid, rs.iteration).value))
            for nid in rs.noiser_vrf.committee
        )
        sub = UpdateSubmission(rs.iteration, self.id, masked, rs.commitment, listed, rs.noiser_vrf)
        sig = signatures.sign(backend, self.secrets.keypair, sub.payload_bytes(backend))
        sub = replace(sub, signature=sig)
        rs.submitted = True
        self.submissions_made += 1
        self.stage = Stage.AWAITING_SIGNATURES
        return [(vid, sub, None) for vid in rs.verifiers]

    # -- verifier duty -------------------------------------------------------------

    def _on_UpdateSubmission(self, msg: UpdateSubmission, now: float) -> list:
        rs = self.round
        if not self.is_verifier() or msg.iteration != rs.iteration or rs.signed_off:
            self.audit.append(f"dropped late/stray submission from {msg.sender}")
            return []
        if msg.sender in rs.pool:
            self.audit.append(f"duplicate submission from {msg.sender}")
            return []
        if msg.sender in rs.verifiers or msg.sender in rs.aggregators:
            self.audit.append(f"committee member {msg.sender} tried to submit")
            return []
        if not verify_masked_submission(msg, self.genesis, self.ledger.stake, self.ledger.tip_hash()):
            self.audit.append(f"r{rs.iteration}: masked submission from {msg.sender} rejected")
            return []
        rs.pool[msg.sender] = msg
        return []

    def _close_verification(self, now: float) -> list:
        rs = self.round
        rs.signed_off = True
        if len(rs.pool) < 3:
            self.audit.append(f"r{rs.iteration}: only {len(rs.pool)} submissions, no quorum")
            return []
        chosen = sample_for_krum(rs.pool.keys(), self.r_target(), self.ledger.tip_hash(), rs.iteration)
        updates = np.stack([decode(rs.pool[pid].masked) for pid in chosen])
        cfg = KrumConfig(len(chosen), max_tolerable_f(len(chosen)))
        winners = [chosen[i] for i in multi_krum_select(updates, cfg)]
        out = []
        for pid in winners:
            context = verifier_sign_context(rs.iteration, rs.pool[pid].commitment, self.backend)
            sig = signatures.sign(self.backend, self.secrets.keypair, context)
            out.append((pid, SignatureGrant(rs.iteration, self.id, pid, sig), None))
        return out

    # -- dealing -------------------------------------------------------------------

    def _on_SignatureGrant(self, msg: SignatureGrant, now: float) -> list:
        rs = self.round
        if rs.dealt and msg.iteration == rs.iteration and msg.target == self.id:
            return []  # late grant after a majority was already reached
        if (
            self.stage is not Stage.AWAITING_SIGNATURES
            or msg.iteration != rs.iteration
            or msg.target != self.id
            or msg.sender not in rs.verifiers
        ):
            self.audit.append(f"dropped stray signature grant from {msg.sender}")
            return []
        context = verifier_sign_context(rs.iteration, rs.commitment, self.backend)
        if not signatures.verify(
            self.backend, self.genesis.peer_pubkeys[msg.sender], context, msg.signature
        ):
            self.audit.append(f"r{rs.iteration}: bad grant signature from {msg.sender}")
            return []
        rs.grants[msg.sender] = msg.signature
        if rs.dealt or len(rs.grants) <= len(rs.verifiers) // 2:
            return []
        rs.dealt = True
        self.stage = Stage.DEALING
        sig_list = tuple(sorted(rs.grants.items()))
        bundles = deal_shares(
            rs.update_q,
            self.genesis.commit_pk,
            list(rs.aggregators),
            dealer=self.id,
            signatures_list=sig_list,
        )
        self.stage = Stage.AWAITING_BLOCK
        return [(aid, BundleMsg(rs.iteration, self.id, b), None) for aid, b in bundles.items()]

    # -- aggregator duty --------------------------------------------------------------

    def _on_BundleMsg(self, msg: BundleMsg, now: float) -> list:
        rs = self.round
        if not self.is_aggregator() or msg.iteration != rs.iteration or rs.announced:
            self.audit.append(f"dropped late/stray bundle from {msg.sender}")
            return []
        bundle = msg.bundle
        if bundle.dealer != msg.sender or bundle.dealer in rs.accepted_bundles:
            self.audit.append(f"duplicate/forged bundle from {msg.sender}")
            return []
        if bundle.dealer in rs.verifiers or bundle.dealer in rs.aggregators:
            self.audit.append(f"committee member {msg.sender} dealt an update")
            return []
        committee_keys = {vid: self.genesis.peer_pubkeys[vid] for vid in rs.verifiers}
        context = verifier_sign_context(rs.iteration, bundle.commitment, self.backend)
        if not accept_bundle(bundle, committee_keys, self.genesis.commit_pk, context):
            self.audit.append(f"r{rs.iteration}: bundle from {msg.sender} rejected")
            return []
        rs.accepted_bundles[bundle.dealer] = bundle
        return []

    def _close_aggregation(self, now: float) -> list:
        rs = self.round
        if not self.is_proposer() or rs.announced:
            return []
        rs.announced = True
        if not rs.accepted_bundles:
            self.audit.append(f"r{rs.iteration}: no accepted bundles, voiding round")
            return []
        ordered = sorted(rs.accepted_bundles)
        seed = int.from_bytes(sha256(b"pick" + self.ledger.tip_hash() + u64(rs.iteration)), "big")
        rng = np.random.default_rng(seed)
        perm = rng.permutation(len(ordered))
        contributors = tuple(sorted(ordered[i] for i in perm[: self.u_target()]))
        rs.announce = contributors
        announce = AggAnnounce(rs.iteration, self.id, contributors)
        out = [(aid, announce, None) for aid in rs.aggregators]
        return out

    def _on_AggAnnounce(self, msg: AggAnnounce, now: float) -> list:
        rs = self.round
        if (
            not self.is_aggregator()
            or msg.iteration != rs.iteration
            or msg.sender != rs.aggregators[0]
        ):
            self.audit.append(f"dropped stray aggregation announce from {msg.sender}")
            return []
        missing = [pid for pid in msg.contributors if pid not in rs.accepted_bundles]
        if missing:
            self.audit.append(f"r{rs.iteration}: missing bundles for {missing}, cannot contribute sum")
            return []
        rs.announce = msg.contributors
        bundles = [rs.accepted_bundles[pid] for pid in msg.contributors]
        shares = tuple(sum_shares(bundles, self.backend))
        reply = AggShareMsg(rs.iteration, self.id, msg.contributors, shares)
        sig = signatures.sign(self.backend, self.secrets.keypair, reply.payload_bytes(self.backend))
        reply = replace(reply, signature=sig)
        return [(aid, reply, None) for aid in rs.aggregators]

    def _on_AggShareMsg(self, msg: AggShareMsg, now: float) -> list:
        rs = self.round
        if not self.is_proposer():
            return []  # sums are broadcast committee-wide; only the proposer mints
        if (
            msg.iteration != rs.iteration
            or rs.minted
            or rs.announce is None
            or msg.contributors != rs.announce
            or msg.sender not in rs.aggregators
            or msg.sender in rs.agg_shares
        ):
            self.audit.append(f"dropped stray aggregate-share message from {msg.sender}")
            return []
        if not signatures.verify(
            self.backend,
            self.genesis.peer_pubkeys[msg.sender],
            msg.payload_bytes(self.backend),
            msg.signature,
        ):
            self.audit.append(f"r{rs.iteration}: bad aggregate-share signature from {msg.sender}")
            return []
        rs.agg_shares[msg.sender] = msg.shares
        quorum = -(-len(rs.aggregators) // 2)  # ceil(m/2), proposer included
        if len(rs.agg_shares) < quorum:
            return []
        out = self._mint_block(now)
        if rs.minted:
            self.stage = Stage.AWAITING_BLOCK
        return out

    def _mint_block(self, now: float) -> list:
        rs = self.round
        backend = self.backend
        pk = self.genesis.commit_pk
        bundles = [rs.accepted_bundles[pid] for pid in rs.announce]
        combined_value = backend.g1_identity
        for b in bundles:
            combined_value = backend.g1_add(combined_value, b.commitment.value)
        combined = Commitment(combined_value)
        all_shares = [s for shares in rs.agg_shares.values() for s in shares]
        try:
            aggregate = recover_aggregate(all_shares, pk, combined, self.config.scale_bits)
        except ShareRecoveryError as exc:
            self.audit.append(f"r{rs.iteration}: recovery failed, aborting round: {exc}")
            return []
        rs.minted = True
        prev = self.ledger.current_model()
        weights = prev.weights + decode(aggregate)
        entries = tuple(
            CommitmentEntry(b.dealer, b.commitment, b.signatures)
            for b in sorted(bundles, key=lambda b: b.dealer)
        )
        block = Block(
            prev_hash=self.ledger.tip_hash(),
            iteration=rs.iteration,
            aggregate_poly=aggregate,
            model_weights=weights,
            commitments=entries,
            aggregator_sigs=(),
        )
        content = block_content_hash(block, backend)
        sig = signatures.sign(backend, self.secrets.keypair, content)
        block = replace(block, aggregator_sigs=((self.id, sig),))
        return [(BROADCAST, BlockMsg(rs.iteration, self.id, block), None)]

    # -- block arrival ------------------------------------------------------------------

    def _on_BlockMsg(self, msg: BlockMsg, now: float) -> list:
        ok, reason = self.ledger.append(msg.block)
        if ok:
            self.stage = Stage.IDLE
            return self.start_round(msg.block.iteration + 1, now)
        if reason == "bad-prev-hash" and msg.block.iteration > self.ledger.tip_iteration():
            # this chain is ahead of ours: pull it and resync
            self.audit.append(f"behind at round {msg.block.iteration}, requesting chain")
            return [(msg.sender, ChainRequest(self.id), None)]
        self.audit.append(f"r{msg.block.iteration}: rejected block: {reason}")
        return []

    # -- catch-up -----------------------------------------------------------------------

    def _on_ChainRequest(self, msg: ChainRequest, now: float) -> list:
        return [(msg.sender, ChainResponse(self.id, tuple(self.ledger.blocks)), None)]

    def _on_ChainResponse(self, msg: ChainResponse, now: float) -> list:
        adopted, reason = self.ledger.catch_up(msg.blocks)
        if not adopted and reason != "remote-not-longer":
            self.audit.append(f"catch-up rejected: {reason}")
        if adopted:
            # resync round tracking to the adopted tip
            self.stage = Stage.IDLE
            return self.start_round(self.ledger.tip_iteration() + 1, now)
        return []
