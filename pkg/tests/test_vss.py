import numpy as np
import pytest

from chainlearn.commitments import combine, commit, trusted_setup
from chainlearn.groups import get_backend
from chainlearn.quantize import decode, encode, sum_polys
from chainlearn.signatures import keygen, sign
from chainlearn.vss import (
    AggregateShare,
    ShareBundle,
    ShareRecoveryError,
    accept_bundle,
    assign_points,
    bundle_from_bytes,
    bundle_to_bytes,
    deal_shares,
    recover_aggregate,
    share_points,
    sum_shares,
    verify_aggregate_share,
)

BACKEND = get_backend("exponent")
MOD = BACKEND.order


def make_update(rng, d):
    v = rng.normal(size=d)
    v /= max(np.linalg.norm(v), 1.0)
    return encode(v, int(rng.integers(0, MOD)), MOD)


def test_point_count_formula():
    assert len(share_points(25)) == 52
    assert share_points(2) == [1, 2, 3, 4, 5, 6]


def test_round_robin_counts():
    pts = share_points(25)
    assignment = assign_points(pts, ["a", "b", "c"])
    counts = sorted((len(v) for v in assignment.values()), reverse=True)
    assert counts == [18, 17, 17]


def test_dealt_shares_all_verify():
    rng = np.random.default_rng(0)
    pk = trusted_setup(BACKEND, 6, b"s")
    q = make_update(rng, 6)
    bundles = deal_shares(q, pk, [0, 1, 2], dealer=9)
    assert set(bundles) == {0, 1, 2}
    c = commit(pk, q)
    from chainlearn.commitments import verify_share

    for b in bundles.values():
        assert b.commitment.value == c.value
        for w in b.shares:
            assert verify_share(pk, b.commitment, w)


def test_too_many_aggregators_rejected():
    rng = np.random.default_rng(0)
    pk = trusted_setup(BACKEND, 2, b"s")
    q = make_update(rng, 2)
    with pytest.raises(ValueError):
        deal_shares(q, pk, list(range(7)), dealer=0)  # only 6 points at d=2
    with pytest.raises(ValueError):
        deal_shares(q, pk, [0], dealer=0)


def signed_bundle(pk, q, dealer, verifiers, context):
    sigs = tuple(
        (vid, sign(BACKEND, kp, context)) for vid, kp in verifiers.items()
    )
    return deal_shares(q, pk, [0, 1], dealer=dealer, signatures_list=sigs)


def test_accept_bundle_majority_and_shares():
    rng = np.random.default_rng(1)
    pk = trusted_setup(BACKEND, 4, b"s")
    q = make_update(rng, 4)
    verifiers = {i: keygen(BACKEND, bytes([i])) for i in range(3)}
    committee = {i: kp.public for i, kp in verifiers.items()}
    context = b"round-1-commit"
    bundles = signed_bundle(pk, q, 5, verifiers, context)
    assert accept_bundle(bundles[0], committee, pk, context)

    # exactly half (1 of 3 -> floor majority boundary: 1 <= 1) is not enough
    one_sig = ShareBundle(5, bundles[0].commitment, bundles[0].shares, bundles[0].signatures[:1])
    assert not accept_bundle(one_sig, committee, pk, context)

    # forged eval fails share verification
    bad_shares = list(bundles[0].shares)
    w = bad_shares[0]
    from chainlearn.commitments import Witness

    bad_shares[0] = Witness(w.value, w.point, (w.eval + 1) % MOD)
    tampered = ShareBundle(5, bundles[0].commitment, tuple(bad_shares), bundles[0].signatures)
    assert not accept_bundle(tampered, committee, pk, context)

    # signature from outside the committee does not count
    outsider = keygen(BACKEND, b"outsider")
    outsider_sigs = tuple((9, sign(BACKEND, outsider, context)) for _ in range(3))
    forged = ShareBundle(5, bundles[0].commitment, bundles[0].shares, outsider_sigs)
    assert not accept_bundle(forged, committee, pk, context)


def test_sum_shares_hand_example():
    """phi1 = 1 + x, phi2 = 2 + 3x at z=1: summed eval = 2 + 5 = 7."""
    pk = trusted_setup(BACKEND, 1, b"s")
    from chainlearn.quantize import QuantizedPoly

    q1 = QuantizedPoly((1, 1), 20, MOD)
    q2 = QuantizedPoly((2, 3), 20, MOD)
    b1 = deal_shares(q1, pk, [0, 1], dealer=0)[0]
    b2 = deal_shares(q2, pk, [0, 1], dealer=1)[0]
    agg = sum_shares([b1, b2], BACKEND)
    assert agg[0].point == 1
    assert agg[0].summed_eval == 7
    assert agg[0].contributor_count == 2
    combined = combine(BACKEND, [b1.commitment, b2.commitment])
    assert verify_aggregate_share(pk, combined, agg[0])


def test_sum_shares_single_update_is_identity():
    rng = np.random.default_rng(2)
    pk = trusted_setup(BACKEND, 4, b"s")
    q = make_update(rng, 4)
    b = deal_shares(q, pk, [0, 1], dealer=0)[1]
    agg = sum_shares([b], BACKEND)
    for orig, summed in zip(b.shares, agg):
        assert summed.point == orig.point
        assert summed.summed_eval == orig.eval
        assert summed.summed_witness == orig.value


def test_sum_shares_point_mismatch_rejected():
    rng = np.random.default_rng(3)
    pk = trusted_setup(BACKEND, 4, b"s")
    q = make_update(rng, 4)
    bundles = deal_shares(q, pk, [0, 1], dealer=0)
    with pytest.raises(ValueError):
        sum_shares([bundles[0], bundles[1]], BACKEND)


def test_recover_hand_example():
    """phi = 3 + 2x + x^2 from shares {1: 6, 2: 11, 3: 18}."""
    pk = trusted_setup(BACKEND, 2, b"s")
    from chainlearn.quantize import QuantizedPoly

    q = QuantizedPoly((3, 2, 1), 20, MOD)
    c = commit(pk, q)
    bundles = deal_shares(q, pk, [0, 1, 2], dealer=0)
    agg = [s for b in bundles.values() for s in sum_shares([b], BACKEND)]
    evals = {s.point: s.summed_eval for s in agg}
    assert (evals[1], evals[2], evals[3]) == (6, 11, 18)
    recovered = recover_aggregate([s for s in agg if s.point <= 3], pk, c, 20)
    assert recovered.coeffs == (3, 2, 1)


def test_threshold_d_points_insufficient():
    rng = np.random.default_rng(4)
    pk = trusted_setup(BACKEND, 5, b"s")
    q = make_update(rng, 5)
    c = commit(pk, q)
    bundles = deal_shares(q, pk, [0, 1], dealer=0)
    all_shares = [s for b in bundles.values() for s in sum_shares([b], BACKEND)]
    with pytest.raises(ShareRecoveryError, match="insufficient"):
        recover_aggregate(all_shares[: pk.degree], pk, c, 20)
    recovered = recover_aggregate(all_shares[: pk.degree + 1], pk, c, 20)
    assert recovered == q


def test_end_to_end_35_updates():
    rng = np.random.default_rng(5)
    pk = trusted_setup(BACKEND, 25, b"s")
    updates = [make_update(rng, 25) for _ in range(35)]
    aggregators = [0, 1, 2]
    per_agg = {a: [] for a in aggregators}
    for i, q in enumerate(updates):
        for a, bundle in deal_shares(q, pk, aggregators, dealer=i).items():
            per_agg[a].append(bundle)
    agg_shares = []
    for a in aggregators:
        agg_shares.extend(sum_shares(per_agg[a], BACKEND))
    combined = combine(BACKEND, [commit(pk, q) for q in updates])
    recovered = recover_aggregate(agg_shares, pk, combined, 20)
    assert recovered == sum_polys(updates)
    np.testing.assert_array_equal(
        decode(recovered), decode(sum_polys(updates))
    )


def test_recovery_rejects_tampered_sum():
    rng = np.random.default_rng(6)
    pk = trusted_setup(BACKEND, 4, b"s")
    q = make_update(rng, 4)
    c = commit(pk, q)
    bundles = deal_shares(q, pk, [0, 1], dealer=0)
    shares = [s for b in bundles.values() for s in sum_shares([b], BACKEND)]
    bad = AggregateShare(shares[0].point, (shares[0].summed_eval + 1) % MOD, shares[0].summed_witness, 1)
    with pytest.raises(ShareRecoveryError):
        recover_aggregate([bad] + shares[1:], pk, c, 20)


def test_privacy_threshold_structure():
    """Coalitions below ceil(m/2) aggregators always hold < d+1 points."""
    from itertools import combinations

    for d in (4, 25):
        pts = share_points(d)
        for m in (2, 3, 4, 5):
            assignment = assign_points(pts, list(range(m)))
            limit = -(-m // 2)  # ceil(m/2)
            for size in range(0, limit):
                for coalition in combinations(range(m), size):
                    held = sum(len(assignment[a]) for a in coalition)
                    assert held < d + 1, (d, m, coalition)


def test_bundle_wire_roundtrip():
    rng = np.random.default_rng(7)
    pk = trusted_setup(BACKEND, 4, b"s")
    q = make_update(rng, 4)
    kp = keygen(BACKEND, b"v")
    sigs = ((3, sign(BACKEND, kp, b"ctx")),)
    bundle = deal_shares(q, pk, [0, 1], dealer=2, signatures_list=sigs)[0]
    data = bundle_to_bytes(bundle, BACKEND)
    back = bundle_from_bytes(data, BACKEND)
    assert back == bundle
