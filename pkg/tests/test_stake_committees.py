import numpy as np
import pytest
from scipy import stats

from chainlearn.committees import (
    ROLE_AGGREGATE,
    ROLE_VERIFY,
    VrfOutput,
    committee_seed,
    draw_committee,
    noiser_seed,
    verify_vrf,
)
from chainlearn.encoding import sha256
from chainlearn.groups import get_backend
from chainlearn.signatures import keygen, sign, verify
from chainlearn.stake import KEYSPACE, build_ring, honest_stake_fraction, update_stake

BACKEND = get_backend("exponent")


def test_signature_roundtrip():
    kp = keygen(BACKEND, b"peer0")
    sig = sign(BACKEND, kp, b"hello")
    assert verify(BACKEND, kp.public, b"hello", sig)
    assert not verify(BACKEND, kp.public, b"other", sig)
    assert sig == sign(BACKEND, kp, b"hello"), "signatures must be deterministic"


def test_single_peer_owns_ring():
    ring = build_ring({7: 10})
    assert ring.interval_measure(7) == KEYSPACE
    assert ring.owner(12345) == 7


def test_interval_measures_proportional():
    ring = build_ring({0: 10, 1: 10, 2: 20})
    assert ring.interval_measure(2) == KEYSPACE // 2
    assert ring.interval_measure(0) == KEYSPACE // 4


def test_zero_total_stake_rejected():
    with pytest.raises(ValueError):
        build_ring({0: 0, 1: 0})


def test_ring_selection_chi_square():
    stake = {i: 5 + (i % 7) for i in range(40)}
    ring = build_ring(stake)
    rng = np.random.default_rng(0)
    samples = 100_000
    counts = {p: 0 for p in stake}
    for point in rng.integers(0, 1 << 63, size=samples):
        # spread the 63-bit draw across the keyspace deterministically
        counts[ring.owner(int(point) * (KEYSPACE // (1 << 63)))] += 1
    total = sum(stake.values())
    expected = [samples * stake[p] / total for p in sorted(stake)]
    observed = [counts[p] for p in sorted(stake)]
    assert stats.chisquare(observed, expected).pvalue > 0.01


def test_draw_all_peers():
    ring = build_ring({i: 10 for i in range(5)})
    out = draw_committee(ring, b"seed", 5)
    assert sorted(out.committee) == list(range(5))


def test_draw_deterministic_and_distinct():
    ring = build_ring({i: 10 for i in range(20)})
    a = draw_committee(ring, b"seed", 6)
    b = draw_committee(ring, b"seed", 6)
    assert a.committee == b.committee
    assert len(set(a.committee)) == 6


def test_draw_too_many_rejected():
    ring = build_ring({i: 10 for i in range(3)})
    with pytest.raises(ValueError):
        draw_committee(ring, b"seed", 4)


def test_draw_exclusion():
    ring = build_ring({i: 10 for i in range(6)})
    out = draw_committee(ring, b"seed", 4, exclude={2})
    assert 2 not in out.committee


def test_uniform_stake_selection_rate():
    ring = build_ring({i: 10 for i in range(100)})
    counts = np.zeros(100)
    draws = 10_000
    for s in range(draws):
        for p in draw_committee(ring, b"seed%d" % s, 3).committee:
            counts[p] += 1
    rates = counts / draws
    # each peer expected in ~3% of draws
    assert abs(rates.mean() - 0.03) < 1e-9
    assert stats.chisquare(counts, np.full(100, draws * 0.03)).pvalue > 0.001


def test_role_tags_give_different_committees():
    ring = build_ring({i: 10 for i in range(30)})
    prev = sha256(b"block")
    sv = committee_seed(b"gpk", prev, ROLE_VERIFY, 4)
    sa = committee_seed(b"gpk", prev, ROLE_AGGREGATE, 4)
    assert sv != sa
    assert draw_committee(ring, sv, 3).committee != draw_committee(ring, sa, 3).committee


def test_noiser_seeds_distinct_per_peer():
    prev = sha256(b"block")
    assert noiser_seed(b"pk_a", prev, 1) != noiser_seed(b"pk_b", prev, 1)
    assert noiser_seed(b"pk_a", prev, 1) != noiser_seed(b"pk_a", prev, 2)


def test_global_vrf_verifies():
    stake = {i: 10 + i for i in range(12)}
    ring = build_ring(stake)
    seed = committee_seed(b"gpk", sha256(b"prev"), ROLE_VERIFY, 1)
    out = draw_committee(ring, seed, 3)
    assert verify_vrf(out, seed, stake)


def test_keyed_vrf_verifies_and_binds_to_key():
    stake = {i: 10 for i in range(12)}
    ring = build_ring(stake)
    kp = keygen(BACKEND, b"drawer")
    seed = noiser_seed(b"drawerpk", sha256(b"prev"), 2)
    out = draw_committee(ring, seed, 3, backend=BACKEND, signer=kp, exclude={4})
    assert verify_vrf(out, seed, stake, backend=BACKEND, public_key=kp.public, exclude={4})
    other = keygen(BACKEND, b"other")
    assert not verify_vrf(out, seed, stake, backend=BACKEND, public_key=other.public, exclude={4})


def test_vrf_rejects_member_swap():
    stake = {i: 10 for i in range(12)}
    ring = build_ring(stake)
    seed = committee_seed(b"gpk", sha256(b"prev"), ROLE_VERIFY, 1)
    out = draw_committee(ring, seed, 3)
    swapped = list(out.committee)
    swapped[0] = (swapped[0] + 1) % 12
    if swapped[0] in out.committee[1:]:
        swapped[0] = (swapped[0] + 1) % 12
    assert not verify_vrf(VrfOutput(tuple(swapped), out.proof, out.seed), seed, stake)


def test_vrf_rejects_stale_stake():
    stake = {i: 10 for i in range(12)}
    ring = build_ring(stake)
    seed = committee_seed(b"gpk", sha256(b"prev"), ROLE_VERIFY, 1)
    out = draw_committee(ring, seed, 3)
    newer = dict(stake)
    newer[0] += 500
    assert verify_vrf(out, seed, stake)
    assert not verify_vrf(out, seed, newer)


def test_update_stake():
    stake = {0: 10, 1: 10, 2: 10}
    after = update_stake(stake, [0, 2, 2])
    assert after == {0: 15, 1: 10, 2: 15}
    assert stake == {0: 10, 1: 10, 2: 10}, "input map untouched"
    assert update_stake(stake, []) == stake
    with pytest.raises(KeyError):
        update_stake(stake, [9])


def test_stake_never_decreases():
    stake = {0: 10, 1: 10}
    after = update_stake(stake, [0])
    assert all(after[p] >= stake[p] for p in stake)


def test_honest_fraction():
    assert honest_stake_fraction({0: 70, 1: 30}, [0]) == pytest.approx(0.7)


def test_committees_change_with_every_block():
    """Seeds bind to the chain tip, so committees cannot be predicted ahead."""
    stake = {i: 10 for i in range(30)}
    ring = build_ring(stake)
    tips = [sha256(b"block-%d" % i) for i in range(6)]
    committees = [
        draw_committee(ring, committee_seed(b"gpk", tip, ROLE_VERIFY, 1), 3).committee
        for tip in tips
    ]
    assert len(set(committees)) == len(committees)
