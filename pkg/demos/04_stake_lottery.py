#!/usr/bin/env python3
"""The stake ring and committee lotteries: intervals proportional to stake,
publicly re-derivable global draws, keyed (private-until-revealed) noiser
draws, and what happens to a tampered committee."""

import numpy as np

from chainlearn import build_ring, draw_committee, verify_vrf
from chainlearn.committees import ROLE_VERIFY, VrfOutput, committee_seed, noiser_seed
from chainlearn.encoding import sha256
from chainlearn.groups import get_backend
from chainlearn.signatures import keygen
from chainlearn.stake import KEYSPACE

stake = {pid: 10 for pid in range(20)}
stake[7] = 100  # one whale
ring = build_ring(stake)
print("peer 7 owns %.1f%% of the ring (%.1f%% of stake)" % (
    100 * ring.interval_measure(7) / KEYSPACE,
    100 * stake[7] / sum(stake.values())))

# sampling frequency tracks stake
rng = np.random.default_rng(0)
hits = sum(ring.owner(int(p) * (KEYSPACE // (1 << 63))) == 7
           for p in rng.integers(0, 1 << 63, size=20_000))
print("peer 7 hit in %.1f%% of 20k uniform points" % (100 * hits / 20_000))

# global draws: same tip, same committee, for everyone
prev = sha256(b"block at the tip")
seed = committee_seed(b"global-key", prev, ROLE_VERIFY, iteration=9)
committee = draw_committee(ring, seed, k=3)
print("verifier committee for this tip:", committee.committee)
print("anyone can re-derive it:", verify_vrf(committee, seed, stake))

swapped = VrfOutput((committee.committee[0], 19, committee.committee[2]),
                    committee.proof, committee.seed)
print("swapped member passes verification:", verify_vrf(swapped, seed, stake))

# keyed draws: bound to the drawing peer's key, unpredictable until revealed
backend = get_backend("exponent")
kp = keygen(backend, b"peer-3-secret")
nseed = noiser_seed(backend.g1_to_bytes(kp.public), prev, iteration=9)
noisers = draw_committee(ring, nseed, k=2, backend=backend, signer=kp, exclude={3})
print("peer 3's noiser set:", noisers.committee, "(proof: %d bytes)" % len(noisers.proof))
print("verifies against peer 3's key:",
      verify_vrf(noisers, nseed, stake, backend=backend, public_key=kp.public, exclude={3}))
other = keygen(backend, b"someone-else")
print("verifies against another key:",
      verify_vrf(noisers, nseed, stake, backend=backend, public_key=other.public, exclude={3}))
