"""Pairing-friendly group backends behind one small interface.

Two interchangeable backends drive all commitments, share checks and
signatures:

``PairingGroup``
    A real bilinear pairing: the supersingular curve y^2 = x^3 + x over a
    513-bit prime p with p = 3 (mod 4), subgroup order r (~2^255, low Hamming
    weight), distortion map (x, y) -> (-x, i*y) into E(F_p2) and the Tate
    pairing with denominator elimination.  Embedding degree is 2, so discrete
    logs live in a ~1026-bit field: legacy-grade (~80-bit) security, fine for
    a research artifact, not for production deployments.

``ExponentGroup``
    A non-hiding debug backend over the Mersenne prime 2^61 - 1.  Group
    elements are their own discrete logarithms and the pairing multiplies
    exponents, which turns every pairing equation into direct polynomial
    evaluation.  All protocol algebra holds exactly; nothing is hidden.
    Used for fast tests and large simulation runs, never where hiding
    matters.

Both expose: ``order``, generators ``g1``/``g2``, group ops, ``pair``,
target-group ops and canonical serialization.  Curve parameters were
generated once by ``demos/generate_group_parameters.py`` and are frozen here.
"""

from __future__ import annotations

# --- frozen supersingular curve parameters ---------------------------------
# r prime, r = 2^255 + 95 (Hamming weight 7 keeps the Miller loop short)
# p prime, p = r * 4*(2^255 + 111) - 1, p = 3 (mod 4)  =>  #E(F_p) = p + 1
_P = 0x1000000000000000000000000000000000000000000000000000000000000019C000000000000000000000000000000000000000000000000000000000000A4C3
_R = 0x800000000000000000000000000000000000000000000000000000000000005F
_COFACTOR = (_P + 1) // _R
_FINAL_EXP = (_P * _P - 1) // _R
_R_BITS = bin(_R)[3:]  # left-to-right, leading bit dropped

_G1_BYTES = 1 + 64  # flag byte + big-endian x


# --- F_p2 = F_p[i] / (i^2 + 1), elements as (real, imag) tuples -------------

def _f2_mul(x, y, p=_P):
    a, b = x
    c, d = y
    ac = a * c % p
    bd = b * d % p
    return ((ac - bd) % p, ((a + b) * (c + d) - ac - bd) % p)


def _f2_sqr(x, p=_P):
    a, b = x
    return ((a + b) * (a - b) % p, 2 * a * b % p)


def _f2_pow(x, e, p=_P):
    out = (1, 0)
    while e:
        if e & 1:
            out = _f2_mul(out, x, p)
        x = _f2_sqr(x, p)
        e >>= 1
    return out


# --- affine/Jacobian arithmetic on y^2 = x^3 + x over F_p -------------------
# Affine points are (x, y) tuples; None is the point at infinity.

def _pt_add(P1, P2, p=_P):
    if P1 is None:
        return P2
    if P2 is None:
        return P1
    x1, y1 = P1
    x2, y2 = P2
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + 1) * pow(2 * y1, p - 2, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, p - 2, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def _pt_neg(P, p=_P):
    if P is None:
        return None
    return (P[0], (-P[1]) % p)


def _pt_mul(P, k, p=_P):
    """Scalar multiplication via Jacobian double-and-add."""
    k %= _R
    if P is None or k == 0:
        return None
    X, Y, Z = P[0], P[1], 1
    started = False
    for bit in bin(k)[2:]:
        if started:
            # doubling (a = 1 curve coefficient)
            A = X * X % p
            B = Y * Y % p
            C = B * B % p
            ZZ = Z * Z % p
            D = 2 * ((X + B) * (X + B) - A - C) % p
            E = (3 * A + ZZ * ZZ) % p
            X3 = (E * E - 2 * D) % p
            Y3 = (E * (D - X3) - 8 * C) % p
            Z = 2 * Y * Z % p
            X, Y = X3, Y3
            if bit == "1":
                X, Y, Z = _jac_madd(X, Y, Z, P[0], P[1], p)
        else:
            started = True
    if Z == 0:
        return None
    zinv = pow(Z, p - 2, p)
    z2 = zinv * zinv % p
    return (X * z2 % p, Y * z2 % p * zinv % p)


def _jac_madd(X1, Y1, Z1, x2, y2, p=_P):
    """Mixed Jacobian + affine addition. Returns Jacobian (X, Y, Z)."""
    if Z1 == 0:
        return x2, y2, 1
    ZZ = Z1 * Z1 % p
    U2 = x2 * ZZ % p
    S2 = y2 * ZZ % p * Z1 % p
    if U2 == X1:
        if (S2 + Y1) % p == 0:
            return 0, 1, 0
        # doubling fallback (rare path)
        A = X1 * X1 % p
        B = Y1 * Y1 % p
        C = B * B % p
        D = 2 * ((X1 + B) * (X1 + B) - A - C) % p
        E = (3 * A + ZZ * ZZ) % p
        X3 = (E * E - 2 * D) % p
        Y3 = (E * (D - X3) - 8 * C) % p
        return X3, Y3, 2 * Y1 * Z1 % p
    H = (U2 - X1) % p
    HH = H * H % p
    I = 4 * HH % p
    J = H * I % p
    r2 = 2 * (S2 - Y1) % p
    V = X1 * I % p
    X3 = (r2 * r2 - J - 2 * V) % p
    Y3 = (r2 * (V - X3) - 2 * Y1 * J) % p
    Z3 = ((Z1 + H) * (Z1 + H) - ZZ - HH) % p
    return X3, Y3, Z3


def _sqrt_mod_p(a, p=_P):
    """Square root for p = 3 (mod 4); None if a is a non-residue."""
    y = pow(a, (p + 1) // 4, p)
    return y if y * y % p == a % p else None


def _point_from_seed_x(x0, p=_P):
    """First curve point with x >= x0, pushed into the order-r subgroup."""
    x = x0
    while True:
        y = _sqrt_mod_p((x * x * x + x) % p)
        if y is not None:
            P = _pt_mul_nomod((x, y), _COFACTOR, p)
            if P is not None:
                return P
        x += 1


def _pt_mul_nomod(P, k, p=_P):
    # cofactor multiplication must not reduce k mod r
    out = None
    Q = P
    while k:
        if k & 1:
            out = _pt_add(out, Q, p)
        Q = _pt_add(Q, Q, p)
        k >>= 1
    return out


def _tate_pair(P, Q, p=_P):
    """Tate pairing e(P, psi(Q)) on E(F_p)[r] x E(F_p)[r] -> F_p2.

    Line values are scaled by F_p factors, which the final exponentiation
    (p^2 - 1)/r kills because (p - 1) divides it; vertical lines are dropped
    for the same reason.
    """
    if P is None or Q is None:
        return (1, 0)
    xq, yq = Q
    xd = (-xq) % p  # x-coordinate of psi(Q); its y is i*yq
    xp_, yp_ = P
    X1, Y1, Z1 = xp_, yp_, 1
    f = (1, 0)
    for bit in _R_BITS:
        # tangent line at S, then S = 2S
        ZZ = Z1 * Z1 % p
        Z13 = ZZ * Z1 % p
        A = X1 * X1 % p
        B = Y1 * Y1 % p
        C = B * B % p
        D = 2 * ((X1 + B) * (X1 + B) - A - C) % p
        E = (3 * A + ZZ * ZZ) % p
        X3 = (E * E - 2 * D) % p
        Y3 = (E * (D - X3) - 8 * C) % p
        Z3 = 2 * Y1 * Z1 % p
        real = (-(Z3 * Y1) - E * Z1 * (ZZ * xd - X1)) % p
        imag = Z3 * Z13 % p * yq % p
        f = _f2_sqr(f, p)
        f = _f2_mul(f, (real, imag), p)
        X1, Y1, Z1 = X3, Y3, Z3
        if bit == "1":
            # chord line through S and P, then S = S + P
            ZZ = Z1 * Z1 % p
            Z13 = ZZ * Z1 % p
            U2 = xp_ * ZZ % p
            S2 = yp_ * Z13 % p
            if U2 == X1 and (S2 + Y1) % p == 0:
                # S = -P: vertical chord, F_p-rational, skipped
                X1, Y1, Z1 = 0, 1, 0
                continue
            H = (U2 - X1) % p
            num = (S2 - Y1) % p
            den = H * Z1 % p
            real = (-(den * yp_) - num * (xd - xp_)) % p
            imag = den * yq % p
            f = _f2_mul(f, (real, imag), p)
            X1, Y1, Z1 = _jac_madd(X1, Y1, Z1, xp_, yp_, p)
    return _f2_pow(f, _FINAL_EXP, p)


class PairingGroup:
    """Real bilinear pairing backend (see module docstring for caveats)."""

    name = "pairing"
    order = _R

    def __init__(self) -> None:
        self.g1 = _point_from_seed_x(2)
        self.g2 = _point_from_seed_x(1000)
        self.gt_one = (1, 0)

    # G1 / G2 share the same curve arithmetic
    def g1_add(self, a, b):
        return _pt_add(a, b)

    def g1_neg(self, a):
        return _pt_neg(a)

    def g1_mul(self, P, k: int):
        return _pt_mul(P, k)

    g2_add = g1_add
    g2_neg = g1_neg
    g2_mul = g1_mul

    @property
    def g1_identity(self):
        return None

    g2_identity = g1_identity

    def pair(self, P, Q):
        return _tate_pair(P, Q)

    def gt_mul(self, a, b):
        return _f2_mul(a, b)

    def gt_pow(self, a, k: int):
        return _f2_pow(a, k % _R)

    def gt_eq(self, a, b) -> bool:
        return a == b

    def g1_to_bytes(self, P) -> bytes:
        if P is None:
            return b"\x00" * _G1_BYTES
        flag = 2 + (P[1] & 1)
        return bytes([flag]) + P[0].to_bytes(64, "big")

    def g1_from_bytes(self, data: bytes):
        if len(data) != _G1_BYTES:
            raise ValueError(f"group element must be {_G1_BYTES} bytes")
        if data[0] == 0:
            return None
        x = int.from_bytes(data[1:], "big")
        if x >= _P:
            raise ValueError("x-coordinate out of range")
        y = _sqrt_mod_p((x * x * x + x) % _P)
        if y is None:
            raise ValueError("not a curve point")
        if (y & 1) != (data[0] & 1):
            y = _P - y
        return (x, y)

    g2_to_bytes = g1_to_bytes
    g2_from_bytes = g1_from_bytes

    @property
    def element_size(self) -> int:
        return _G1_BYTES


class ExponentGroup:
    """Debug backend: elements are exponents mod 2^61 - 1, pairing multiplies
    them, so every check reduces to arithmetic over a small prime field."""

    name = "exponent"
    order = (1 << 61) - 1

    def __init__(self) -> None:
        self.g1 = 1
        self.g2 = 1
        self.gt_one = 0

    def g1_add(self, a, b):
        return (a + b) % self.order

    def g1_neg(self, a):
        return (-a) % self.order

    def g1_mul(self, a, k: int):
        return a * (k % self.order) % self.order

    g2_add = g1_add
    g2_neg = g1_neg
    g2_mul = g1_mul

    @property
    def g1_identity(self):
        return 0

    g2_identity = g1_identity

    def pair(self, a, b):
        return a * b % self.order

    def gt_mul(self, a, b):
        return (a + b) % self.order

    def gt_pow(self, a, k: int):
        return a * (k % self.order) % self.order

    def gt_eq(self, a, b) -> bool:
        return a == b

    def g1_to_bytes(self, a) -> bytes:
        return int(a).to_bytes(8, "little")

    def g1_from_bytes(self, data: bytes):
        if len(data) != 8:
            raise ValueError("group element must be 8 bytes")
        value = int.from_bytes(data, "little")
        if value >= self.order:
            raise ValueError("element out of range")
        return value

    g2_to_bytes = g1_to_bytes
    g2_from_bytes = g1_from_bytes

    @property
    def element_size(self) -> int:
        return 8


_BACKENDS = {"pairing": PairingGroup, "exponent": ExponentGroup}
_CACHE: dict = {}


def get_backend(name: str):
    """Return the (cached) backend instance for ``name``."""
    if name not in _BACKENDS:
        raise ValueError(f"unknown group backend {name!r}; choose from {sorted(_BACKENDS)}")
    if name not in _CACHE:
        _CACHE[name] = _BACKENDS[name]()
    return _CACHE[name]
