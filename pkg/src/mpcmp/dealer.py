"""Passive dealer: samples every piece of correlated randomness the online
protocols consume and hands each party its slice.

A :class:`Dealer` is one session. It fixes one MAC key per MAC domain and
knows the circuit it is preparing for, because AND-gate tapes depend on the
masks of the wires feeding them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .abb import BeaverTriple, Consumable, DaBit, EdaBit, InputMask
from .algebra import expand_root_polynomial
from .errors import DomainTooSmall, InvalidArgument
from .protocols.plan import PrefixPlan, build_prefix_plan
from .sharing import DEFAULT_SIGMA_BITS, AuthShare, MacKey, Scheme, deal_authenticated, deal_bits_by_party

MAX_AND_ARITY = 16


@dataclass
class PowerTape(Consumable):
    """Shares of r_i, r_i^2, ..., r_i^(l+1) for each of l bit positions."""

    p: int
    ell: int
    coeffs: tuple[int, ...]
    gamma: int
    # powers[i][e - 1] is the share of r_i^e
    powers: list[list[AuthShare]]
    used: bool = field(default=False, compare=False, repr=False)


@dataclass
class AndGateTape(Consumable):
    sigma_z: AuthShare
    # subsets[S - 1] shares AND of r_i over the bitmask S, for S in 1..2^m - 1
    subsets: list[AuthShare]
    eps: tuple[int, ...]
    input_wires: tuple[int, ...]
    output_wire: int
    # shares of the input-wire masks, only for a stand-alone gate fed by an input owner
    input_masks: list[AuthShare] | None = None
    used: bool = field(default=False, compare=False, repr=False)

    @property
    def arity(self) -> int:
        return len(self.eps)


@dataclass
class PrefixTape(Consumable):
    k: int
    n_branch: int
    # shares of the input-wire masks, indexed by prefix position
    input_masks: list[AuthShare]
    gates: list[AndGateTape]
    used: bool = field(default=False, compare=False, repr=False)

    @cached_property
    def plan(self) -> PrefixPlan:
        return build_prefix_plan(self.k, self.n_branch)


@dataclass
class MsbPTape(Consumable):
    p: int
    r: AuthShare
    r_bits: list[AuthShare]
    lt_a: PowerTape
    lt_b: PowerTape
    used: bool = field(default=False, compare=False, repr=False)


@dataclass
class Msb2kTape(Consumable):
    k: int
    n_branch: int
    r: AuthShare
    msb_r: AuthShare
    # public masked bits (LSB first) of 2^(k-1) - y1 - 1; masks live in prefix.input_masks
    v_deltas: list[int]
    prefix: PrefixTape
    dabit: DaBit
    used: bool = field(default=False, compare=False, repr=False)


@dataclass
class BasicTape:
    triples: list[BeaverTriple] = field(default_factory=list)
    dabits: list[DaBit] = field(default_factory=list)
    edabits: list[EdaBit] = field(default_factory=list)


def msb2k_mask_values(r: int, k: int) -> tuple[int, int, int]:
    """(MSB(2^k - r), y1, 2^(k-1) - y1 - 1) with 2^k - r taken mod 2^k."""
    t = ((1 << k) - r) % (1 << k)
    y1 = t % (1 << (k - 1))
    return t >> (k - 1), y1, (1 << (k - 1)) - y1 - 1


class Dealer:
    def __init__(self, n_parties: int, active: bool = False, rng: random.Random | None = None, s: int = DEFAULT_SIGMA_BITS):
        if n_parties < 2:
            raise InvalidArgument("at least two parties are required")
        self.n_parties = n_parties
        self.active = active
        self.s = s
        self.rng = rng or random.Random()
        self.keys: dict = {}

    # -- schemes and keys --------------------------------------------------

    def field_scheme(self, p: int) -> Scheme:
        return Scheme.field(p, self.active)

    def ring_scheme(self, k: int) -> Scheme:
        return Scheme.ring(k, self.active, self.s)

    def bit_scheme(self) -> Scheme:
        return Scheme.bits(self.active)

    def key(self, scheme: Scheme) -> MacKey | None:
        if not scheme.active:
            return None
        key = self.keys.get(scheme.mac)
        if key is None:
            key = self.keys[scheme.mac] = MacKey.generate(scheme.mac, self.n_parties, self.rng)
        return key

    def alphas(self, party: int) -> dict:
        return {dom: key.shares[party] for dom, key in self.keys.items()}

    def share(self, scheme: Scheme, secret: int) -> list[AuthShare]:
        return deal_authenticated(secret, self.n_parties, self.key(scheme), self.rng, scheme)

    def share_bits(self, secrets: Sequence[int]) -> list[list[AuthShare]]:
        """Per-party share lists for many bits at once."""
        scheme = self.bit_scheme()
        return deal_bits_by_party(secrets, self.n_parties, self.key(scheme), self.rng, scheme)

    def _per_party(self, build) -> list:
        return [build(i) for i in range(self.n_parties)]

    # -- protocol tapes ----------------------------------------------------

    def gen_power_tape(self, ell: int, p: int) -> list[PowerTape]:
        coeffs, gamma = expand_root_polynomial(ell, p)
        scheme = self.field_scheme(p)
        rows = []
        for _ in range(ell):
            r = self.rng.randrange(p)
            rows.append([self.share(scheme, pow(r, e, p)) for e in range(1, ell + 2)])
        return self._per_party(
            lambda i: PowerTape(p, ell, coeffs, gamma, [[col[i] for col in row] for row in rows])
        )

    def _gate_material(self, m: int, input_masks: Sequence[int]) -> tuple[list[int], tuple[int, ...]]:
        """Plaintext [sigma_z, AND over each nonempty subset of r] and the eps bits."""
        getbits = self.rng.getrandbits
        rbits = getbits(m)
        sigma_z = getbits(1)
        r = [(rbits >> i) & 1 for i in range(m)]
        prods = [1] * (1 << m)
        for S in range(1, 1 << m):
            low = (S & -S).bit_length() - 1
            prods[S] = prods[S & (S - 1)] & r[low]
        prods[0] = sigma_z
        eps = tuple(ri ^ (s & 1) for ri, s in zip(r, input_masks))
        return prods, eps

    def gen_and_tape(
        self,
        m: int,
        input_masks: Sequence[int],
        input_wires: Sequence[int] | None = None,
        output_wire: int | None = None,
    ) -> tuple[list[AndGateTape], int]:
        """Tape for one m-input AND gate plus the plaintext output-wire mask."""
        if not 2 <= m <= MAX_AND_ARITY:
            raise InvalidArgument(f"AND arity {m} outside [2, {MAX_AND_ARITY}]")
        if len(input_masks) != m:
            raise InvalidArgument("one input mask per gate input is required")
        secrets, eps = self._gate_material(m, input_masks)
        rows = self.share_bits(secrets)
        wires = tuple(input_wires) if input_wires is not None else tuple(range(m))
        out = output_wire if output_wire is not None else m
        tapes = [AndGateTape(row[0], row[1:], eps, wires, out) for row in rows]
        return tapes, secrets[0]

    def gen_prefix_tape(self, k: int, n_branch: int) -> tuple[list[PrefixTape], list[int]]:
        """Prefix-AND tape for k inputs and the plaintext input masks (by prefix position)."""
        if k < 1 or n_branch < 2:
            raise InvalidArgument("need k >= 1 and n_branch >= 2")
        if n_branch > MAX_AND_ARITY:
            raise InvalidArgument(f"branching factor above {MAX_AND_ARITY}")
        plan = build_prefix_plan(k, n_branch)
        sigma = [0] * plan.n_wires
        in_bits = self.rng.getrandbits(k)
        for w in range(k):
            sigma[w] = (in_bits >> w) & 1
        secrets = sigma[:k]
        spans = []
        for g in plan.gates:
            material, eps = self._gate_material(g.arity, [sigma[w] for w in g.input_wires])
            sigma[g.output_wire] = material[0]
            spans.append((len(secrets), len(material), eps))
            secrets.extend(material)
        rows = self.share_bits(secrets)
        slices = []
        for row in rows:
            gates = [
                AndGateTape(row[off], row[off + 1:off + size], eps, g.input_wires, g.output_wire)
                for g, (off, size, eps) in zip(plan.gates, spans)
            ]
            tape = PrefixTape(k, n_branch, row[:k], gates)
            tape.__dict__["plan"] = plan
            slices.append(tape)
        return slices, sigma[:k]

    def gen_msb_p_tape(self, p: int) -> list[MsbPTape]:
        m = p.bit_length()
        if p <= m + 1:
            raise DomainTooSmall(f"p = {p} must exceed its bit length plus one")
        scheme = self.field_scheme(p)
        r = self.rng.randrange(p)
        r_sh = self.share(scheme, r)
        bit_sh = [self.share(scheme, (r >> i) & 1) for i in range(m)]
        lt_a = self.gen_power_tape(m, p)
        lt_b = self.gen_power_tape(m, p)
        return self._per_party(
            lambda i: MsbPTape(p, r_sh[i], [b[i] for b in bit_sh], lt_a[i], lt_b[i])
        )

    def gen_msb_2k_tape(self, k: int, n_branch: int) -> list[Msb2kTape]:
        if k < 2:
            raise InvalidArgument("MSB over Z_2^k needs k >= 2")
        ring = self.ring_scheme(k)
        r = self.rng.getrandbits(k)
        msb, _, v = msb2k_mask_values(r, k)
        ell = k - 1
        prefix, sigma = self.gen_prefix_tape(ell, n_branch)
        # bit i of v rides on prefix position ell-1-i
        v_deltas = [((v >> i) & 1) ^ sigma[ell - 1 - i] for i in range(ell)]
        r_sh = self.share(ring, r)
        msb_sh = self.share(self.bit_scheme(), msb)
        dabits = self.gen_dabits(ring, 1)
        return self._per_party(
            lambda i: Msb2kTape(k, n_branch, r_sh[i], msb_sh[i], list(v_deltas), prefix[i], dabits[i][0])
        )

    # -- generic material ----------------------------------------------------

    def gen_triples(self, scheme: Scheme, count: int) -> list[list[BeaverTriple]]:
        out = [[] for _ in range(self.n_parties)]
        m = scheme.plain_modulus
        for _ in range(count):
            a, b = self.rng.randrange(m), self.rng.randrange(m)
            sa, sb, sc = self.share(scheme, a), self.share(scheme, b), self.share(scheme, a * b % m)
            for i in range(self.n_parties):
                out[i].append(BeaverTriple(sa[i], sb[i], sc[i]))
        return out

    def gen_dabits(self, target: Scheme, count: int) -> list[list[DaBit]]:
        bits = self.bit_scheme()
        out = [[] for _ in range(self.n_parties)]
        for _ in range(count):
            b = self.rng.getrandbits(1)
            sb, sa = self.share(bits, b), self.share(target, b)
            for i in range(self.n_parties):
                out[i].append(DaBit(sb[i], sa[i]))
        return out

    def gen_edabits(self, target: Scheme, count: int, nbits: int | None = None) -> list[list[EdaBit]]:
        bits = self.bit_scheme()
        nbits = nbits or (target.plain_modulus - 1).bit_length()
        out = [[] for _ in range(self.n_parties)]
        for _ in range(count):
            r = self.rng.randrange(min(target.plain_modulus, 1 << nbits))
            sa = self.share(target, r)
            sbits = [self.share(bits, (r >> j) & 1) for j in range(nbits)]
            for i in range(self.n_parties):
                out[i].append(EdaBit(sa[i], [s[i] for s in sbits]))
        return out

    def gen_basic_tapes(self, scheme: Scheme, triples: int = 0, dabits: int = 0, edabits: int = 0) -> list[BasicTape]:
        t = self.gen_triples(scheme, triples)
        d = self.gen_dabits(scheme, dabits)
        e = self.gen_edabits(scheme, edabits)
        return self._per_party(lambda i: BasicTape(t[i], d[i], e[i]))

    def gen_input_masks(self, scheme: Scheme, owner: int, count: int) -> list[list[InputMask]]:
        out = [[] for _ in range(self.n_parties)]
        for _ in range(count):
            sigma = self.rng.randrange(scheme.plain_modulus)
            sh = self.share(scheme, sigma)
            for i in range(self.n_parties):
                out[i].append(InputMask(sh[i], sigma if i == owner else None))
        return out
