"""Additive, authenticated and masked sharings plus local linear algebra.

A :class:`Scheme` fixes the three domains involved in one kind of sharing
(plaintext, value shares, MAC shares). Party-local state is a bare
:class:`AuthShare`; dealer-side helpers return one object per party.

Public constants enter a sharing through party 0's value share and through
every party's MAC share as ``c * alpha_i``.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .algebra import GF2, GF2s, PrimeField, Ring, bits_to_int, int_to_bits
from .errors import Incomplete, InvalidArgument

DEFAULT_SIGMA_BITS = 64


@dataclass(frozen=True)
class Scheme:
    kind: str
    share: PrimeField | Ring | GF2
    mac: PrimeField | Ring | GF2s | None
    plain_modulus: int

    @classmethod
    def field(cls, p: int, active: bool = False) -> "Scheme":
        f = PrimeField(p)
        return cls("field", f, f if active else None, p)

    @classmethod
    def ring(cls, k: int, active: bool = False, s: int = DEFAULT_SIGMA_BITS) -> "Scheme":
        if not 1 <= k <= 64 or not 0 <= s <= 64:
            raise InvalidArgument(f"ring parameters k={k}, s={s} out of range")
        if active:
            r = Ring(k + s)
            return cls("ring", r, r, 1 << k)
        return cls("ring", Ring(k), None, 1 << k)

    @classmethod
    def bits(cls, active: bool = False) -> "Scheme":
        return cls("bit", GF2(), GF2s() if active else None, 2)

    @property
    def active(self) -> bool:
        return self.mac is not None

    @property
    def k(self) -> int:
        return self.plain_modulus.bit_length() - 1

    def lift(self, c: int) -> int:
        """Map a public plaintext constant into the MAC domain."""
        if self.kind == "bit":
            return c & 1
        return self.mac.reduce(c)

    def plain(self, v: int) -> int:
        return v % self.plain_modulus


class AuthShare(NamedTuple):
    """One party's share of a secret; ``mac`` is None in passive mode.

    A named tuple rather than a dataclass: tapes hold millions of these.
    """

    value: int
    mac: int | None = None


@dataclass(frozen=True, slots=True)
class MaskedValue:
    """One party's view of <x> = (delta, [[sigma]]).

    ``wire`` names the dealer-side mask so gate tapes can be matched to their
    inputs; it is None for values derived by local linear operations.
    """

    delta: int
    sigma: AuthShare
    wire: int | None = None


@dataclass(frozen=True)
class MacKey:
    domain: PrimeField | Ring | GF2s
    shares: tuple[int, ...]

    @classmethod
    def generate(cls, domain, n_parties: int, rng: random.Random) -> "MacKey":
        while True:
            shares = tuple(domain.random(rng) for _ in range(n_parties))
            key = cls(domain, shares)
            # a zero global key would authenticate nothing
            if key.total:
                return key

    @property
    def total(self) -> int:
        acc = 0
        for a in self.shares:
            acc = self.domain.add(acc, a)
        return acc


class ShareOps:
    """Local (communication-free) operations for one party and one scheme."""

    def __init__(self, scheme: Scheme, party: int, alpha: int | None = None):
        if scheme.active and alpha is None:
            raise InvalidArgument("active scheme needs the party's MAC key share")
        self.scheme = scheme
        self.party = party
        self.alpha = alpha
        self._vd = scheme.share
        self._md = scheme.mac

    def add(self, a: AuthShare, b: AuthShare) -> AuthShare:
        mac = self._md.add(a.mac, b.mac) if self._md else None
        return AuthShare(self._vd.add(a.value, b.value), mac)

    def sub(self, a: AuthShare, b: AuthShare) -> AuthShare:
        mac = self._md.sub(a.mac, b.mac) if self._md else None
        return AuthShare(self._vd.sub(a.value, b.value), mac)

    def neg(self, a: AuthShare) -> AuthShare:
        mac = self._md.neg(a.mac) if self._md else None
        return AuthShare(self._vd.neg(a.value), mac)

    def scale(self, a: AuthShare, c: int) -> AuthShare:
        c = self._vd.reduce(c)
        mac = self._md.mul(a.mac, self.scheme.lift(c)) if self._md else None
        return AuthShare(self._vd.mul(a.value, c), mac)

    def add_const(self, a: AuthShare, c: int) -> AuthShare:
        c = self._vd.reduce(c)
        value = self._vd.add(a.value, c) if self.party == 0 else a.value
        mac = None
        if self._md:
            mac = self._md.add(a.mac, self._md.mul(self.scheme.lift(c), self.alpha))
        return AuthShare(value, mac)

    def const(self, c: int) -> AuthShare:
        return self.add_const(self.zero(), c)

    def zero(self) -> AuthShare:
        return AuthShare(0, 0 if self._md else None)

    def affine(self, coeffs: Sequence[int], terms: Sequence[AuthShare], constant: int = 0) -> AuthShare:
        return affine_combine(self.scheme, coeffs, terms, constant, self.party, self.alpha)

    def unmask(self, mv: MaskedValue) -> AuthShare:
        """Turn <x> into [[x]]: delta - sigma (delta xor sigma for bits)."""
        return self.add_const(self.neg(mv.sigma), mv.delta)

    def xor(self, a: AuthShare, b: AuthShare) -> AuthShare:
        return self.add(a, b)


def affine_combine(
    scheme: Scheme,
    coeffs: Sequence[int],
    terms: Sequence[AuthShare],
    constant: int = 0,
    party: int = 0,
    alpha: int | None = None,
) -> AuthShare:
    """Party-local share of ``constant + sum(c_j * x_j)``."""
    if len(coeffs) != len(terms):
        raise InvalidArgument("coefficient and term counts differ")
    vd, md = scheme.share, scheme.mac
    if scheme.kind == "bit":
        value = 0
        mac = 0
        for c, t in zip(coeffs, terms):
            if c & 1:
                value ^= t.value
                if md:
                    mac ^= t.mac
        if constant & 1:
            if party == 0:
                value ^= 1
            if md:
                mac ^= alpha
        return AuthShare(value, mac if md else None)
    value = sum(c * t.value for c, t in zip(coeffs, terms))
    if party == 0:
        value += constant
    mac = None
    if md:
        mac = sum(c * t.mac for c, t in zip(coeffs, terms)) + constant * alpha
        mac = md.reduce(mac)
    return AuthShare(vd.reduce(value), mac)


def _split(domain, secret: int, n_parties: int, rng: random.Random) -> list[int]:
    if isinstance(domain, GF2):
        r = rng.getrandbits(n_parties - 1)
        shares = [(r >> i) & 1 for i in range(n_parties - 1)]
        last = secret & 1
        for s in shares:
            last ^= s
        return [last, *shares]
    shares = [domain.random(rng) for _ in range(n_parties - 1)]
    last = domain.reduce(secret)
    for s in shares:
        last = domain.sub(last, s)
    return [last, *shares]


def deal_additive(secret: int, n_parties: int, rng: random.Random, domain=None) -> list[int]:
    """Split ``secret`` into ``n_parties`` additive shares (XOR shares for bits)."""
    if n_parties < 2:
        raise InvalidArgument("sharing needs at least two parties")
    return _split(domain or GF2(), secret, n_parties, rng)


def deal_authenticated(
    secret: int,
    n_parties: int,
    key: MacKey | None,
    rng: random.Random,
    scheme: Scheme,
) -> list[AuthShare]:
    if n_parties < 2:
        raise InvalidArgument("sharing needs at least two parties")
    values = _split(scheme.share, secret, n_parties, rng)
    if not scheme.active:
        return [AuthShare(v) for v in values]
    if key is None or key.domain != scheme.mac or len(key.shares) != n_parties:
        raise InvalidArgument("MAC key does not match the sharing domain")
    full = scheme.share.reduce(secret)
    tag = scheme.mac.mul(scheme.lift(full), key.total)
    macs = _split(scheme.mac, tag, n_parties, rng)
    return [AuthShare(v, m) for v, m in zip(values, macs)]


def deal_bits_by_party(
    secrets: Sequence[int],
    n_parties: int,
    key: MacKey | None,
    rng: random.Random,
    scheme: Scheme,
) -> list[list[AuthShare]]:
    """Bulk bit sharing; returns one list per party, aligned with ``secrets``."""
    if n_parties < 2:
        raise InvalidArgument("sharing needs at least two parties")
    count = len(secrets)
    if count == 0:
        return [[] for _ in range(n_parties)]
    rows = [rng.getrandbits(count) for _ in range(n_parties - 1)]
    first = bits_to_int(secrets)
    for row in rows:
        first ^= row
    value_rows = [int_to_bits(row, count) for row in (first, *rows)]
    new = tuple.__new__
    if not scheme.active:
        return [[new(AuthShare, (v, None)) for v in vs] for vs in value_rows]
    if key is None or key.domain != scheme.mac or len(key.shares) != n_parties:
        raise InvalidArgument("MAC key does not match the sharing domain")
    alpha = key.total
    rest = [
        struct.unpack(f"<{count}Q", rng.getrandbits(64 * count).to_bytes(8 * count, "little"))
        for _ in range(n_parties - 1)
    ]
    head = []
    for j in range(count):
        m = alpha if secrets[j] & 1 else 0
        for row in rest:
            m ^= row[j]
        head.append(m)
    mac_rows = [head, *rest]
    return [[new(AuthShare, vm) for vm in zip(vs, ms)] for vs, ms in zip(value_rows, mac_rows)]


def mask_pair(
    secret: int,
    key: MacKey | None,
    rng: random.Random,
    scheme: Scheme,
    n_parties: int,
    sigma: int | None = None,
    wire: int | None = None,
) -> list[MaskedValue]:
    """Per-party views of <secret> with a fresh (or forced) mask."""
    m = scheme.plain_modulus
    if sigma is None:
        sigma = rng.randrange(m)
    delta = (secret ^ sigma) & 1 if scheme.kind == "bit" else (secret + sigma) % m
    shares = deal_authenticated(sigma, n_parties, key, rng, scheme)
    return [MaskedValue(delta, s, wire) for s in shares]


def public_sharing(scheme: Scheme, c: int, key: MacKey | None, n_parties: int) -> list[AuthShare]:
    """Deterministic sharing of a public constant under the constant convention."""
    alphas = key.shares if key else [None] * n_parties
    return [ShareOps(scheme, i, alphas[i]).const(c) for i in range(n_parties)]


def _check_complete(shares, n_parties: int | None) -> None:
    if any(s is None for s in shares) or (n_parties is not None and len(shares) != n_parties):
        raise Incomplete("reconstruction needs one share from every party")
    if len(shares) < 2:
        raise Incomplete("reconstruction needs at least two shares")


def reconstruct_full(scheme: Scheme, shares: Sequence[AuthShare], n_parties: int | None = None) -> int:
    """Sum of value shares in the share domain (width k + s for active rings)."""
    _check_complete(shares, n_parties)
    acc = 0
    for s in shares:
        acc = scheme.share.add(acc, s.value)
    return acc


def reconstruct(scheme: Scheme, shares: Sequence[AuthShare], n_parties: int | None = None) -> int:
    return scheme.plain(reconstruct_full(scheme, shares, n_parties))


def reconstruct_masked(scheme: Scheme, views: Sequence[MaskedValue], n_parties: int | None = None) -> int:
    deltas = {v.delta for v in views}
    if len(deltas) != 1:
        raise InvalidArgument("parties disagree on the public masked value")
    sigma = reconstruct(scheme, [v.sigma for v in views], n_parties)
    delta = deltas.pop()
    if scheme.kind == "bit":
        return (delta ^ sigma) & 1
    return (delta - sigma) % scheme.plain_modulus


def reconstruct_mac(scheme: Scheme, shares: Sequence[AuthShare]) -> int:
    acc = 0
    for s in shares:
        acc = scheme.mac.add(acc, s.mac)
    return acc


def mac_holds(scheme: Scheme, shares: Sequence[AuthShare], key: MacKey) -> bool:
    """Check sum(mac_i) == value * alpha over the full share width."""
    value = reconstruct_full(scheme, shares)
    return reconstruct_mac(scheme, shares) == scheme.mac.mul(scheme.lift(value), key.total)
