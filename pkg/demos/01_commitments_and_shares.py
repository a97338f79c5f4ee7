#!/usr/bin/env python3
"""Walk through the commitment scheme: commit to an update, open single
points with witnesses, combine commitments homomorphically and rebuild an
aggregate from secret shares."""

import numpy as np

from chainlearn import (
    combine,
    commit,
    create_witness,
    decode,
    deal_shares,
    encode,
    get_backend,
    recover_aggregate,
    sum_shares,
    trusted_setup,
    verify_share,
)

# The "pairing" backend is the real thing (supersingular curve, Tate pairing);
# swap in "exponent" for instant arithmetic while prototyping.
backend = get_backend("pairing")
dim = 6
pk = trusted_setup(backend, dim, seed=b"demo-ceremony")
print(f"backend={backend.name}, key supports degree {pk.degree}")

rng = np.random.default_rng(0)
update = rng.normal(size=dim) * 0.2
blinding = int(rng.integers(1 << 60))
poly = encode(update, blinding, backend.order)
c = commit(pk, poly)
print("committed to a", dim, "dimensional update; commitment bytes:",
      backend.g1_to_bytes(c.value)[:8].hex(), "...")

# open the polynomial at a point and check the pairing equation
w = create_witness(pk, poly, z=3)
print("opening at z=3 verifies:", verify_share(pk, c, w))

# a forged evaluation is caught
from chainlearn.commitments import Witness
forged = Witness(w.value, w.point, (w.eval + 1) % backend.order)
print("forged evaluation verifies:", verify_share(pk, c, forged))

# homomorphism: the product of two commitments commits to the summed update
other = encode(rng.normal(size=dim) * 0.2, 7, backend.order)
lhs = combine(backend, [c, commit(pk, other)])
print("product equals commitment of the sum:",
      lhs.value == commit(pk, poly.add(other)).value)

# secret-share three updates to two aggregators and rebuild their sum
updates = [encode(rng.normal(size=dim) * 0.1, int(rng.integers(100)), backend.order)
           for _ in range(3)]
per_agg = {0: [], 1: []}
for i, q in enumerate(updates):
    for agg, bundle in deal_shares(q, pk, [0, 1], dealer=i).items():
        per_agg[agg].append(bundle)
shares = [s for agg in (0, 1) for s in sum_shares(per_agg[agg], backend)]
combined = combine(backend, [commit(pk, q) for q in updates])
recovered = recover_aggregate(shares, pk, combined, scale_bits=20)
print("recovered aggregate matches the direct sum:",
      np.allclose(decode(recovered), sum(decode(q) for q in updates)))
