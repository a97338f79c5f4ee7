#!/usr/bin/env python3
"""One-time search for the supersingular curve parameters frozen in
chainlearn.groups.

Wanted: a subgroup order r ~ 2^255 that is prime with low Hamming weight
(short Miller loop), and a prime p = r*c - 1 with c divisible by 4 so that
p = 3 (mod 4); then y^2 = x^3 + x over F_p is supersingular with p + 1
points, -1 is a non-residue (so F_p2 = F_p[i]) and the distortion map
(x, y) -> (-x, i*y) gives a non-degenerate pairing on the r-subgroup.

Running this reproduces the constants; it is not needed at run time.
"""

import random


def is_probable_prime(n: int, rounds: int = 64) -> bool:
    if n < 2:
        return False
    for small in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % small == 0:
            return n == small
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    rng = random.Random(0xC0FFEE)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def main() -> None:
    r = None
    for delta in range(1, 20_000, 2):
        cand = (1 << 255) + delta
        if is_probable_prime(cand):
            r = cand
            print(f"r = 2^255 + {delta}  (weight {bin(cand).count('1')})")
            break

    base = 1 << 255
    for j in range(1, 200_000):
        c = 4 * (base + j)
        p = r * c - 1
        if is_probable_prime(p):
            print(f"c = 4*(2^255 + {j})")
            print(f"p = {hex(p)}  ({p.bit_length()} bits)")
            print(f"r = {hex(r)}")
            assert p % 4 == 3 and (p + 1) % r == 0
            break

    from chainlearn.groups import _P, _R

    print("matches frozen constants:", (p, r) == (_P, _R))


if __name__ == "__main__":
    main()
