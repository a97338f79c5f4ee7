"""Share dealing, aggregator-side checks and aggregate recovery.

A quantized update (a degree-d polynomial) is evaluated at the fixed field
points 1..n with n = 2*(d+1); the points are split round-robin across the
aggregators, each share carrying its opening witness.  Aggregators verify
every share against the dealer's signed commitment, sum accepted shares
point-wise (field sum of evaluations, group product of witnesses), and any
d+1 verified summed points reconstruct the summed polynomial exactly -- which
must re-commit to the product of the contributing commitments or the round
is abandoned as Byzantine evidence.

Holding fewer than half the aggregators' transcripts yields fewer than d+1
points of any single update, leaving it information-theoretically
undetermined.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import signatures
from .commitments import Commitment, CommitPK, Witness, commit, create_witness, verify_share
from .encoding import ByteReader, ByteWriter
from .polynomials import lagrange_interpolate
from .quantize import QuantizedPoly


class ShareRecoveryError(RuntimeError):
    """Aggregate recovery failed (not enough shares, or Byzantine evidence)."""


@dataclass(frozen=True)
class ShareBundle:
    """One dealer's shares for one aggregator, plus the verifier sign-off."""

    dealer: int
    commitment: Commitment
    shares: tuple  # Witness instances at this aggregator's points
    signatures: tuple  # (verifier_id, signature_bytes), same list for all slices


@dataclass(frozen=True)
class AggregateShare:
    point: int
    summed_eval: int
    summed_witness: object  # G1 element
    contributor_count: int


def share_points(dim: int) -> list[int]:
    """The global evaluation points 1..n, n = 2*(d+1); 0 stays reserved."""
    return list(range(1, 2 * (dim + 1) + 1))


def assign_points(points, aggregators) -> dict:
    """Round-robin assignment point -> aggregator, dict keyed by aggregator."""
    out = {a: [] for a in aggregators}
    for idx, z in enumerate(points):
        out[aggregators[idx % len(aggregators)]].append(z)
    return out


def deal_shares(
    update_q: QuantizedPoly,
    pk: CommitPK,
    aggregators,
    dealer: int = -1,
    signatures_list=(),
) -> dict:
    """Evaluate the update at every share point and slice per aggregator."""
    aggregators = list(aggregators)
    if len(aggregators) < 2:
        raise ValueError("need at least two aggregators")
    points = share_points(update_q.dim)
    if len(aggregators) > len(points):
        raise ValueError(f"{len(aggregators)} aggregators for only {len(points)} share points")
    c = commit(pk, update_q)
    assignment = assign_points(points, aggregators)
    bundles = {}
    for agg, pts in assignment.items():
        shares = tuple(create_witness(pk, update_q, z) for z in pts)
        bundles[agg] = ShareBundle(dealer, c, shares, tuple(signatures_list))
    return bundles


def accept_bundle(
    bundle: ShareBundle,
    verifier_committee: dict,
    pk: CommitPK,
    signed_context: bytes,
) -> bool:
    """True iff a strict majority of the verifier committee signed this
    commitment and every share opens it.  ``verifier_committee`` maps
    verifier id -> public key; ``signed_context`` is the exact message the
    verifiers signed."""
    backend = pk.backend
    valid_signers = set()
    for verifier_id, sig in bundle.signatures:
        if verifier_id in verifier_committee and verifier_id not in valid_signers:
            if signatures.verify(backend, verifier_committee[verifier_id], signed_context, sig):
                valid_signers.add(verifier_id)
    if len(valid_signers) <= len(verifier_committee) // 2:
        return False
    return all(verify_share(pk, bundle.commitment, w) for w in bundle.shares)


def sum_shares(accepted, backend) -> list[AggregateShare]:
    """Point-wise sums across bundles that share one point set."""
    accepted = list(accepted)
    if not accepted:
        raise ValueError("no bundles to sum")
    base_points = [w.point for w in accepted[0].shares]
    for bundle in accepted:
        pts = [w.point for w in bundle.shares]
        if pts != base_points:
            raise ValueError(f"point-set mismatch: {pts} vs {base_points}")
    order = backend.order
    out = []
    for i, z in enumerate(base_points):
        acc = backend.g1_identity
        for b in accepted:
            acc = backend.g1_add(acc, b.shares[i].value)
        out.append(
            AggregateShare(
                point=z,
                summed_eval=sum(b.shares[i].eval for b in accepted) % order,
                summed_witness=acc,
                contributor_count=len(accepted),
            )
        )
    return out


def verify_aggregate_share(pk: CommitPK, combined: Commitment, share: AggregateShare) -> bool:
    witness = Witness(share.summed_witness, share.point, share.summed_eval % pk.backend.order)
    return verify_share(pk, combined, witness)


def recover_aggregate(
    agg_shares,
    pk: CommitPK,
    combined: Commitment,
    scale_bits: int,
) -> QuantizedPoly:
    """Interpolate the summed polynomial from >= d+1 verified points and
    insist the result re-commits to the combined commitment."""
    backend = pk.backend
    by_point = {}
    for s in agg_shares:
        by_point[s.point % backend.order] = s
    needed = pk.degree + 1
    if len(by_point) < needed:
        raise ShareRecoveryError(
            f"insufficient shares: {len(by_point)} distinct points, need {needed}"
        )
    for s in by_point.values():
        if not verify_aggregate_share(pk, combined, s):
            raise ShareRecoveryError(f"aggregate share at point {s.point} fails verification")
    chosen = sorted(by_point)[:needed]
    points = [(z, by_point[z].summed_eval % backend.order) for z in chosen]
    coeffs = lagrange_interpolate(points, backend.order)
    coeffs += [0] * (needed - len(coeffs))
    poly = QuantizedPoly(tuple(coeffs), scale_bits, backend.order)
    if commit(pk, poly).value != combined.value:
        raise ShareRecoveryError("interpolated polynomial does not match the combined commitment")
    return poly


# --- wire format -------------------------------------------------------------


def bundle_to_bytes(bundle: ShareBundle, backend) -> bytes:
    w = ByteWriter()
    w.u32(bundle.dealer)
    w.bytes_lp(backend.g1_to_bytes(bundle.commitment.value))
    w.u32(len(bundle.shares))
    for share in bundle.shares:
        w.int_lp(share.point)
        w.int_lp(share.eval)
        w.bytes_lp(backend.g1_to_bytes(share.value))
    w.u32(len(bundle.signatures))
    for verifier_id, sig in bundle.signatures:
        w.u32(verifier_id)
        w.bytes_lp(sig)
    return w.getvalue()


def bundle_from_bytes(data: bytes, backend) -> ShareBundle:
    r = ByteReader(data)
    dealer = r.u32()
    commitment = Commitment(backend.g1_from_bytes(r.bytes_lp()))
    shares = []
    for _ in range(r.u32()):
        point = r.int_lp()
        eval_ = r.int_lp()
        value = backend.g1_from_bytes(r.bytes_lp())
        shares.append(Witness(value, point, eval_))
    sigs = []
    for _ in range(r.u32()):
        vid = r.u32()
        sigs.append((vid, r.bytes_lp()))
    return ShareBundle(dealer, commitment, tuple(shares), tuple(sigs))
