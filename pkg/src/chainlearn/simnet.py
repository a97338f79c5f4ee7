"""Deterministic discrete-event network hosting the peers.

Single event loop over a (time, seq) heap: message deliveries with seeded
uniform latency, per-peer stage timers, and optional churn that alternates
failing a random online peer with reviving a random offline one so the
population stays constant.  Peers are pre-registered at genesis; "joining"
means coming back online, pulling the chain from a live peer and rejoining
the round cadence.  Everything (latency, churn choices, tie order) derives
from one seed, so a run is a pure function of its configuration.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .ledger import block_hash
from .protocol import BROADCAST, BlockMsg, ChainRequest, PeerNode, Timer, UpdateSubmission


@dataclass(frozen=True)
class SimConfig:
    latency_min: float = 0.010
    latency_max: float = 0.100
    churn_per_minute: float = 0.0  # fail+join events per simulated minute
    seed: int = 0

    def __post_init__(self):
        if self.latency_min <= 0 or self.latency_max < self.latency_min:
            raise ValueError("latency range must be positive and ordered")
        if self.churn_per_minute < 0:
            raise ValueError("churn rate must be non-negative")


@dataclass
class SimResult:
    block_records: list  # (sim time, Block), chain order
    forks: int
    dropped_updates: dict  # round -> submissions that made no block
    submissions: dict  # round -> distinct submitters
    final_ledger: object
    final_time: float
    observer: int
    offline_at_end: set
    deadlocked: bool = False


class Simulation:
    def __init__(
        self,
        genesis,
        secrets,
        datasets,
        timeouts,
        sim: SimConfig,
        zero_noise_peers=frozenset(),
        fresh_shard=None,
    ):
        """``datasets`` maps peer id -> Dataset; ``fresh_shard(peer, join_count)``
        supplies a new local partition when a peer rejoins."""
        self.genesis = genesis
        self.sim = sim
        self.churn_per_minute = sim.churn_per_minute
        self.timeouts = timeouts
        self.fresh_shard = fresh_shard
        self.rng = np.random.default_rng(sim.seed)
        self.peers = {
            pid: PeerNode(
                pid,
                genesis,
                secrets[pid],
                datasets[pid],
                timeouts,
                zero_noise=pid in zero_noise_peers,
            )
            for pid in sorted(secrets)
        }
        self.online = {pid: True for pid in self.peers}
        self.events = []
        self.seq = 0
        self.now = 0.0
        self.join_counts = {pid: 0 for pid in self.peers}
        # bookkeeping for metrics
        self.block_records = []
        self.seen_block_hashes = {}
        self.forks = 0
        self.submissions = {}

    # -- scheduling -------------------------------------------------------------

    def _push(self, time: float, target: int, payload) -> None:
        heapq.heappush(self.events, (time, self.seq, target, payload))
        self.seq += 1

    def _latency(self) -> float:
        return float(self.rng.uniform(self.sim.latency_min, self.sim.latency_max))

    def _dispatch_actions(self, sender: int, actions) -> None:
        for dest, payload, delay in actions:
            if isinstance(payload, Timer):
                self._push(self.now + delay, dest, payload)
            elif dest == BROADCAST:
                for pid in self.peers:
                    self._push(self.now + self._latency(), pid, payload)
            else:
                self._push(self.now + self._latency(), dest, payload)

    # -- churn --------------------------------------------------------------------

    def inject_churn(self, rate: float) -> None:
        """Set the fail/join cadence (events per simulated minute) before or
        during a run; 0 stops churn after the next pending event."""
        if rate < 0:
            raise ValueError("churn rate must be non-negative")
        self.churn_per_minute = rate

    def _schedule_churn(self, time: float, kind: str) -> None:
        self._push(time, -1, ("churn", kind))

    def _churn_fail(self) -> None:
        candidates = sorted(p for p, up in self.online.items() if up)
        if len(candidates) <= 1:
            return
        victim = int(self.rng.choice(candidates))
        self.online[victim] = False

    def _churn_join(self) -> None:
        candidates = sorted(p for p, up in self.online.items() if not up)
        if not candidates:
            return
        peer = int(self.rng.choice(candidates))
        self.online[peer] = True
        self.join_counts[peer] += 1
        if self.fresh_shard is not None:
            self.peers[peer].dataset = self.fresh_shard(peer, self.join_counts[peer])
        live = sorted(p for p, up in self.online.items() if up and p != peer)
        if live:
            helper = int(self.rng.choice(live))
            self._push(self.now + self._latency(), helper, ChainRequest(peer))

    # -- bookkeeping ----------------------------------------------------------------

    def _note_outbound(self, sender: int, actions) -> None:
        for _, payload, _ in actions:
            if isinstance(payload, UpdateSubmission):
                self.submissions.setdefault(payload.iteration, set()).add(payload.sender)
                break  # one submission counts once however many verifiers get it
            if isinstance(payload, BlockMsg):
                h = block_hash(payload.block, self.genesis.commit_pk.backend)
                t = payload.block.iteration
                if t in self.seen_block_hashes and self.seen_block_hashes[t] != h:
                    self.forks += 1
                elif t not in self.seen_block_hashes:
                    self.seen_block_hashes[t] = h
                    self.block_records.append((self.now, payload.block))

    # -- main loop --------------------------------------------------------------------

    def run(self) -> SimResult:
        cfg = self.genesis.config
        budget = self.timeouts.round_budget
        time_cap = (cfg.total_iterations + 3) * budget
        for pid in sorted(self.peers):
            self._dispatch_actions(pid, self.peers[pid].start_round(1, 0.0))
        if self.churn_per_minute > 0:
            self._schedule_churn(60.0 / self.churn_per_minute, "fail")
        deadlocked = False

        while self.events:
            time, _, target, payload = heapq.heappop(self.events)
            self.now = time
            if time > time_cap:
                break
            if target == -1:
                kind = payload[1]
                if kind == "fail":
                    self._churn_fail()
                else:
                    self._churn_join()
                if self.churn_per_minute > 0:
                    nxt = "join" if kind == "fail" else "fail"
                    self._schedule_churn(self.now + 60.0 / self.churn_per_minute, nxt)
                continue
            if not self.online[target]:
                continue  # messages and timers to offline peers are lost
            peer = self.peers[target]
            actions = peer.handle(payload, self.now)
            self._note_outbound(target, actions)
            self._dispatch_actions(target, actions)
            if self._all_done():
                break
        else:
            online_busy = [
                p for p, up in self.online.items()
                if up and self.peers[p].round.iteration <= cfg.total_iterations
            ]
            if online_busy:
                deadlocked = True

        observer = max(
            (p for p in self.peers if self.online[p]),
            key=lambda p: (self.peers[p].ledger.height, -p),
            default=min(self.peers),
        )
        dropped = {
            t: len(senders) for t, senders in self.submissions.items()
        }
        for _, block in self.block_records:
            if block.iteration in dropped:
                dropped[block.iteration] -= len(block.commitments)
        return SimResult(
            block_records=self.block_records,
            forks=self.forks,
            dropped_updates=dropped,
            submissions={t: sorted(s) for t, s in self.submissions.items()},
            final_ledger=self.peers[observer].ledger,
            final_time=self.now,
            observer=observer,
            offline_at_end={p for p, up in self.online.items() if not up},
            deadlocked=deadlocked,
        )

    def _all_done(self) -> bool:
        limit = self.genesis.config.total_iterations
        return all(
            self.peers[p].round.iteration > limit for p in self.peers if self.online[p]
        )


def detect_deadlock(result: SimResult) -> None:
    if result.deadlocked:
        raise RuntimeError(
            "simulation deadlocked: no events left before the final round; "
            f"chain height {result.final_ledger.height}, time {result.final_time:.1f}s"
        )
