"""Canonical byte encodings shared by the ledger, wire messages and hashing.

Every structure that is hashed or signed round-trips through these helpers so
that independently operating peers produce bit-identical bytes: fixed field
order, little-endian fixed-width integers, length-prefixed variable data and
IEEE-754 little-endian doubles.
"""

from __future__ import annotations

import hashlib
import struct


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def u32(value: int) -> bytes:
    return struct.pack("<I", value)


def u64(value: int) -> bytes:
    return struct.pack("<Q", value)


def f64(value: float) -> bytes:
    return struct.pack("<d", value)


class ByteWriter:
    """Accumulates a canonical byte string."""

    def __init__(self) -> None:
        self._parts: list[bytes] = []

    def raw(self, data: bytes) -> "ByteWriter":
        self._parts.append(data)
        return self

    def u32(self, value: int) -> "ByteWriter":
        return self.raw(u32(value))

    def u64(self, value: int) -> "ByteWriter":
        return self.raw(u64(value))

    def f64(self, value: float) -> "ByteWriter":
        return self.raw(f64(value))

    def bytes_lp(self, data: bytes) -> "ByteWriter":
        """Length-prefixed byte string."""
        return self.u32(len(data)).raw(data)

    def int_lp(self, value: int) -> "ByteWriter":
        """Length-prefixed unsigned big integer, big-endian."""
        if value < 0:
            raise ValueError("only unsigned integers are encoded")
        return self.bytes_lp(value.to_bytes((value.bit_length() + 7) // 8 or 1, "big"))

    def f64_vector(self, values) -> "ByteWriter":
        self.u32(len(values))
        for v in values:
            self.f64(float(v))
        return self

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class ByteReader:
    """Reads back what ByteWriter wrote; raises ValueError with the byte
    offset on truncation."""

    def __init__(self, data: bytes) -> None:
        self._data = data
        self._pos = 0

    def _take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise ValueError(
                f"truncated input: wanted {n} bytes at offset {self._pos}, "
                f"have {len(self._data) - self._pos}"
            )
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def raw(self, n: int) -> bytes:
        return self._take(n)

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self._take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8))[0]

    def bytes_lp(self) -> bytes:
        return self._take(self.u32())

    def int_lp(self) -> int:
        return int.from_bytes(self.bytes_lp(), "big")

    def f64_vector(self) -> list[float]:
        n = self.u32()
        return [self.f64() for _ in range(n)]

    def done(self) -> bool:
        return self._pos == len(self._data)

    @property
    def offset(self) -> int:
        return self._pos


def derive_scalars(seed: bytes, count: int, modulus: int, tag: bytes = b"") -> list[int]:
    """Deterministic scalars below ``modulus`` from a seed, counter-mode SHA-256.

    Draws 64 hash bytes per scalar so the bias from the modular reduction is
    negligible for moduli up to ~2^500.
    """
    out = []
    for i in range(count):
        h = sha256(tag + seed + u64(i)) + sha256(tag + seed + u64(i) + b"\x01")
        out.append(int.from_bytes(h, "big") % modulus)
    return out
