"""Fixed-point bridge between real update vectors and field polynomials.

A length-d real vector becomes a (d+1)-coefficient polynomial over the
backend's scalar field: coefficient 0 is a blinding slot (a fresh uniform
field element per vector) and coefficient j in 1..d holds
round(v_j * 2^scale_bits) as a centered residue mod p.  Addition of encoded
vectors is exact coefficient-wise field addition, so commitments, masking and
share sums all agree with real-vector sums on the quantization grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_SCALE_BITS = 20
# Largest number of bounded vectors expected in one field-domain sum
# (updates per block plus noise terms); encode() rejects entries that could
# overflow the centered range when that many are added together.
DEFAULT_HEADROOM = 128


class HeadroomError(OverflowError):
    """An entry is too large for safe field-domain accumulation."""


@dataclass(frozen=True)
class QuantizedPoly:
    """Field-coefficient view of a real vector.

    coeffs[0] is the blinding slot; coeffs[1:] are the encoded entries.
    """

    coeffs: tuple
    scale_bits: int
    modulus: int

    @property
    def dim(self) -> int:
        return len(self.coeffs) - 1

    def add(self, other: "QuantizedPoly") -> "QuantizedPoly":
        """Coefficient-wise field addition (includes blinding slots)."""
        if (self.scale_bits, self.modulus) != (other.scale_bits, other.modulus):
            raise ValueError("mismatched quantization parameters")
        if len(self.coeffs) != len(other.coeffs):
            raise ValueError("mismatched dimensions")
        p = self.modulus
        return QuantizedPoly(
            tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)),
            self.scale_bits,
            p,
        )


def encode(
    values,
    blinding: int,
    modulus: int,
    scale_bits: int = DEFAULT_SCALE_BITS,
    headroom: int = DEFAULT_HEADROOM,
) -> QuantizedPoly:
    """Encode a real vector; raises HeadroomError when an entry cannot be
    summed ``headroom`` times without leaving the centered residue range."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite entries cannot be encoded")
    scale = 1 << scale_bits
    limit = modulus // (2 * headroom)
    fixed = np.rint(arr * scale)
    if np.any(np.abs(fixed) >= limit):
        raise HeadroomError(
            f"entry magnitude {np.abs(arr).max():.6g} exceeds headroom bound "
            f"{limit / scale:.6g} at scale_bits={scale_bits}, headroom={headroom}"
        )
    coeffs = [blinding % modulus]
    coeffs.extend(int(c) % modulus for c in fixed)
    return QuantizedPoly(tuple(coeffs), scale_bits, modulus)


def decode(poly: QuantizedPoly) -> np.ndarray:
    """Centered-residue decode of the data slots; the blinding slot is dropped."""
    p = poly.modulus
    half = p // 2
    scale = float(1 << poly.scale_bits)
    out = np.empty(poly.dim, dtype=np.float64)
    for j, c in enumerate(poly.coeffs[1:]):
        out[j] = (c - p if c > half else c) / scale
    return out


def zero_poly(dim: int, modulus: int, scale_bits: int = DEFAULT_SCALE_BITS) -> QuantizedPoly:
    return QuantizedPoly((0,) * (dim + 1), scale_bits, modulus)


def sum_polys(polys) -> QuantizedPoly:
    polys = list(polys)
    if not polys:
        raise ValueError("nothing to sum")
    acc = polys[0]
    for q in polys[1:]:
        acc = acc.add(q)
    return acc
