#!/usr/bin/env python3
"""Pre-committed noise end to end: how much noise a privacy budget buys, how
a peer masks its update with other peers' noise, and why a verifier can check
the masked update against commitments made long before the update existed."""

import numpy as np

from chainlearn import commit, decode, encode, gaussian_sigma, get_backend, mask_update, trusted_setup
from chainlearn.noise import build_noise_table, generate_noise

for eps in (0.5, 1.0, 2.0, 10.0):
    print(f"epsilon={eps:5.1f}  per-example sigma={gaussian_sigma(eps, 1e-5):7.3f}")

backend = get_backend("exponent")
dim, iterations, batch = 8, 4, 32
eta = lambda t: 0.05 / (1 + 0.05 * t)
pk = trusted_setup(backend, dim, b"demo")

# genesis: three peers commit noise for every iteration up front
seeds = {0: b"peer0", 1: b"peer1", 2: b"peer2"}
table = build_noise_table(pk, seeds, iterations, 2.0, 1e-5, batch, eta)
print(f"\nnoise table: {len(table.commitments)} peers x {table.iterations} iterations committed")

# at run time, peer 0 masks its round-2 update with noise from peers 1 and 2
rng = np.random.default_rng(1)
update = encode(rng.normal(size=dim) * 0.05, 424242, backend.order)
noises = [
    generate_noise(dim, 2.0, 1e-5, batch, eta(2), seeds[k], 2, backend.order, owner=k)
    for k in (1, 2)
]
masked = mask_update(update, [n.quantized for n in noises])
print("masked - update decodes to the pure noise sum:",
      np.allclose(decode(masked) - decode(update),
                  sum(decode(n.quantized) for n in noises)))

# the verifier never sees `update`; it checks the masking equality instead
lhs = commit(pk, masked).value
rhs = commit(pk, update).value
for n in noises:
    rhs = backend.g1_add(rhs, table.entry(n.owner, 2).value)
print("commit(masked) == commit(update) * prod committed noise:", lhs == rhs)

# noise regenerated later is bit-identical to what genesis committed
again = generate_noise(dim, 2.0, 1e-5, batch, eta(2), seeds[1], 2, backend.order, owner=1)
print("regenerated noise matches its genesis commitment:",
      commit(pk, again.quantized).value == table.entry(1, 2).value)
