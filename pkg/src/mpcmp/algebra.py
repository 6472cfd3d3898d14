"""Exact arithmetic for F_p, Z_{2^w}, F_2 and GF(2^64).

Elements are plain Python ints; a domain object carries the modulus and knows
how to reduce, combine and serialize them. All encodings are little-endian and
fixed-width so a batch of elements can be concatenated into one message.
"""

from __future__ import annotations

import random
from functools import lru_cache

import gmpy2

from .errors import DomainTooSmall, InvalidArgument

MAX_PRIME = (1 << 61) - 1
GF2S_BITS = 64
# x^64 + x^4 + x^3 + x + 1 without the leading term
GF2S_POLY = 0x1B
_GF2S_MASK = (1 << GF2S_BITS) - 1


class PrimeField:
    kind = "field"

    def __init__(self, p: int):
        if not 3 <= p <= MAX_PRIME or not gmpy2.is_prime(p):
            raise InvalidArgument(f"modulus {p} is not an odd prime <= 2^61 - 1")
        self.p = p
        self.modulus = p
        self.nbits = p.bit_length()
        self.elem_size = 8

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("field", self.p))

    def reduce(self, a: int) -> int:
        return a % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def inv(self, a: int) -> int:
        return field_inv(a, self.p)

    def random(self, rng: random.Random) -> int:
        return rng.randrange(self.p)

    def encode(self, values) -> bytes:
        return b"".join(v.to_bytes(8, "little") for v in values)

    def decode(self, data: bytes, count: int) -> list[int]:
        _check_len(data, 8 * count)
        return [int.from_bytes(data[8 * i:8 * i + 8], "little") for i in range(count)]

    def encoded_size(self, count: int) -> int:
        return 8 * count


class Ring:
    """Z_{2^width}; width up to 128 so that k + s fits for k, s <= 64."""

    kind = "ring"

    def __init__(self, width: int):
        if not 1 <= width <= 128:
            raise InvalidArgument(f"ring width {width} outside [1, 128]")
        self.width = width
        self.modulus = 1 << width
        self.mask = self.modulus - 1
        self.elem_size = 8 if width <= 64 else 16

    def __repr__(self) -> str:
        return f"Ring(2^{self.width})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Ring) and other.width == self.width

    def __hash__(self) -> int:
        return hash(("ring", self.width))

    def reduce(self, a: int) -> int:
        return a & self.mask

    def add(self, a: int, b: int) -> int:
        return (a + b) & self.mask

    def sub(self, a: int, b: int) -> int:
        return (a - b) & self.mask

    def neg(self, a: int) -> int:
        return -a & self.mask

    def mul(self, a: int, b: int) -> int:
        return a * b & self.mask

    def random(self, rng: random.Random) -> int:
        return rng.getrandbits(self.width)

    def encode(self, values) -> bytes:
        n = self.elem_size
        return b"".join(v.to_bytes(n, "little") for v in values)

    def decode(self, data: bytes, count: int) -> list[int]:
        n = self.elem_size
        _check_len(data, n * count)
        return [int.from_bytes(data[n * i:n * i + n], "little") for i in range(count)]

    def encoded_size(self, count: int) -> int:
        return self.elem_size * count


class GF2:
    """The binary field; bits travel packed eight per byte, LSB first."""

    kind = "bit"
    modulus = 2
    elem_size = 1

    def __repr__(self) -> str:
        return "GF2()"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GF2)

    def __hash__(self) -> int:
        return hash("gf2")

    def reduce(self, a: int) -> int:
        return a & 1

    def add(self, a: int, b: int) -> int:
        return a ^ b

    sub = add

    def neg(self, a: int) -> int:
        return a

    def mul(self, a: int, b: int) -> int:
        return a & b

    def random(self, rng: random.Random) -> int:
        return rng.getrandbits(1)

    def encode(self, values) -> bytes:
        return pack_bits(values)

    def decode(self, data: bytes, count: int) -> list[int]:
        _check_len(data, (count + 7) // 8)
        return unpack_bits(data, count)

    def encoded_size(self, count: int) -> int:
        return (count + 7) // 8


class GF2s:
    """GF(2^64), the MAC domain for authenticated bits."""

    kind = "gf2s"
    modulus = 1 << GF2S_BITS
    elem_size = 8

    def __repr__(self) -> str:
        return "GF2s(64)"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GF2s)

    def __hash__(self) -> int:
        return hash("gf2s")

    def reduce(self, a: int) -> int:
        return a & _GF2S_MASK

    def add(self, a: int, b: int) -> int:
        return a ^ b

    sub = add

    def neg(self, a: int) -> int:
        return a

    def mul(self, a: int, b: int) -> int:
        return gf2s_mul(a, b)

    def random(self, rng: random.Random) -> int:
        return rng.getrandbits(GF2S_BITS)

    def encode(self, values) -> bytes:
        return b"".join(v.to_bytes(8, "little") for v in values)

    def decode(self, data: bytes, count: int) -> list[int]:
        _check_len(data, 8 * count)
        return [int.from_bytes(data[8 * i:8 * i + 8], "little") for i in range(count)]

    def encoded_size(self, count: int) -> int:
        return 8 * count


def _check_len(data: bytes, expected: int) -> None:
    if len(data) != expected:
        raise InvalidArgument(f"expected {expected} encoded bytes, got {len(data)}")


_TO_ASCII = bytes(0x30 | (i & 1) for i in range(256))
_FROM_ASCII = bytes(i & 1 for i in range(256))


def bits_to_int(bits) -> int:
    """Little-endian bit list to integer; only the low bit of each entry counts."""
    try:
        raw = bytes(bits)
    except ValueError:
        raw = bytes(b & 1 for b in bits)
    if not raw:
        return 0
    return int(raw[::-1].translate(_TO_ASCII), 2)


def int_to_bits(value: int, count: int) -> list[int]:
    if count == 0:
        return []
    text = format(value & ((1 << count) - 1), f"0{count}b")
    return list(text.encode()[::-1].translate(_FROM_ASCII))


def pack_bits(bits) -> bytes:
    bits = list(bits)
    return bits_to_int(bits).to_bytes((len(bits) + 7) // 8, "little")


def unpack_bits(data: bytes, count: int) -> list[int]:
    return int_to_bits(int.from_bytes(data[:(count + 7) // 8], "little"), count)


def field_inv(a: int, p: int) -> int:
    """Inverse of ``a`` modulo the prime ``p``."""
    a %= p
    if a == 0:
        raise InvalidArgument("zero has no multiplicative inverse")
    return pow(a, -1, p)


@lru_cache(maxsize=None)
def expand_root_polynomial(ell: int, p: int) -> tuple[tuple[int, ...], int]:
    """Coefficients of prod_{u=1}^{ell+1} (u - t) in ascending degree, plus the
    inverse of its constant term (ell+1)!.

    Evaluated at c, the scaled polynomial is 1 for c = 0 and 0 on [1, ell+1].
    """
    if ell < 0:
        raise InvalidArgument("gate width must be non-negative")
    if p <= ell + 1:
        raise DomainTooSmall(f"p = {p} must exceed l + 1 = {ell + 1}")
    coeffs = [1]
    for u in range(1, ell + 2):
        # multiply by (u - t)
        nxt = [0] * (len(coeffs) + 1)
        for k, a in enumerate(coeffs):
            nxt[k] = (nxt[k] + u * a) % p
            nxt[k + 1] = (nxt[k + 1] - a) % p
        coeffs = nxt
    return tuple(coeffs), field_inv(coeffs[0], p)


@lru_cache(maxsize=None)
def binomial_table(n_max: int, p: int) -> tuple[tuple[int, ...], ...]:
    """Rows 0..n_max of Pascal's triangle mod p; ``table[k][j]`` is C(k, j)."""
    rows = [(1,)]
    for k in range(1, n_max + 1):
        prev = rows[-1]
        row = [1] + [(prev[j - 1] + prev[j]) % p for j in range(1, k)] + [1]
        rows.append(tuple(row))
    return tuple(rows)


def clmul(a: int, b: int) -> int:
    """Carry-less product of two non-negative integers."""
    out = 0
    while b:
        low = b & -b
        out ^= a << (low.bit_length() - 1)
        b ^= low
    return out


def gf2s_mul(a: int, b: int) -> int:
    prod = clmul(a, b)
    # fold the high half down twice; x^64 = x^4 + x^3 + x + 1
    for _ in range(2):
        hi = prod >> GF2S_BITS
        if not hi:
            break
        prod = (prod & _GF2S_MASK) ^ clmul(hi, GF2S_POLY)
    return prod
