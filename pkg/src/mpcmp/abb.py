"""Per-party arithmetic black box: open (with deferred MAC check), Beaver
multiplication, input, and bit-to-arithmetic conversion.

In active mode every opened value is queued together with the party's MAC
share. :meth:`ABB.check` then runs one extra round in which each party reveals
``mac_i - value * alpha_i`` for every queued value; the contributions must sum
to zero or the session aborts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import Abort, InvalidArgument, TapeExhausted
from .sharing import AuthShare, MaskedValue, Scheme, ShareOps


class Consumable:
    """Single-use preprocessing object."""

    used: bool

    def consume(self) -> None:
        if self.used:
            raise TapeExhausted(f"{type(self).__name__} already consumed")
        self.used = True


@dataclass
class BeaverTriple(Consumable):
    a: AuthShare
    b: AuthShare
    c: AuthShare
    used: bool = field(default=False, compare=False, repr=False)


@dataclass
class DaBit(Consumable):
    bit: AuthShare
    arith: AuthShare
    used: bool = field(default=False, compare=False, repr=False)


@dataclass
class EdaBit(Consumable):
    arith: AuthShare
    bits: list[AuthShare]
    used: bool = field(default=False, compare=False, repr=False)


@dataclass
class InputMask(Consumable):
    """Share of a dealer mask; only the input owner gets ``clear``."""

    share: AuthShare
    clear: int | None = None
    used: bool = field(default=False, compare=False, repr=False)


@dataclass(frozen=True)
class Tamper:
    """Fault injection: perturb this party's share of one opened element.

    ``element`` indexes the concatenated values of open number ``open_index``
    and wraps around, so any index hits some element of that open.
    """

    open_index: int
    element: int
    delta: int = 1


class ABB:
    def __init__(
        self,
        party: int,
        n_parties: int,
        channel,
        alphas: Mapping | None = None,
        tamper: Tamper | None = None,
    ):
        self.party = party
        self.n_parties = n_parties
        self.channel = channel
        # MAC domain -> this party's key share
        self.alphas = dict(alphas or {})
        self.tamper = tamper
        self.opens = 0
        self.opened_elements = 0
        self._pending: list[tuple[Scheme, int, int]] = []
        self._ops: dict[Scheme, ShareOps] = {}

    def ops(self, scheme: Scheme) -> ShareOps:
        ops = self._ops.get(scheme)
        if ops is None:
            alpha = self.alphas.get(scheme.mac) if scheme.active else None
            ops = self._ops[scheme] = ShareOps(scheme, self.party, alpha)
        return ops

    # -- opening -----------------------------------------------------------

    def open_many(self, segments: Sequence[tuple[Scheme, Sequence[AuthShare]]]) -> list[list[int]]:
        """Open several batches in a single round; returns plaintext values."""
        own = [[s.value for s in shares] for _, shares in segments]
        if self.tamper is not None and self.tamper.open_index == self.opens:
            self._apply_tamper(segments, own)
        payload = b"".join(scheme.share.encode(v) for (scheme, _), v in zip(segments, own))
        incoming = self.channel.exchange(payload)
        offsets = dict.fromkeys(incoming, 0)
        results = []
        for (scheme, shares), totals in zip(segments, own):
            dom = scheme.share
            size = dom.encoded_size(len(shares))
            for j, data in incoming.items():
                o = offsets[j]
                theirs = dom.decode(data[o:o + size], len(shares))
                offsets[j] = o + size
                totals = [dom.add(a, b) for a, b in zip(totals, theirs)]
            if scheme.active:
                self._pending.extend((scheme, v, s.mac) for v, s in zip(totals, shares))
            results.append([scheme.plain(v) for v in totals])
            self.opened_elements += len(shares)
        for j, data in incoming.items():
            if offsets[j] != len(data):
                raise InvalidArgument(f"party {j} sent {len(data)} bytes, expected {offsets[j]}")
        self.opens += 1
        return results

    def _apply_tamper(self, segments, own: list[list[int]]) -> None:
        total = sum(len(v) for v in own)
        if total == 0:
            return
        j = self.tamper.element % total
        for (scheme, _), values in zip(segments, own):
            if j < len(values):
                dom = scheme.share
                values[j] = dom.add(values[j], dom.reduce(self.tamper.delta) or 1)
                return
            j -= len(values)

    def open(self, scheme: Scheme, shares: Sequence[AuthShare]) -> list[int]:
        return self.open_many([(scheme, shares)])[0]

    def check(self) -> None:
        """Verify every value opened since the last check (one round if any)."""
        if not self._pending:
            return
        pending, self._pending = self._pending, []
        groups: dict = {}
        for scheme, value, mac in pending:
            md = scheme.mac
            alpha = self.alphas[md]
            z = md.sub(mac, md.mul(scheme.lift(value), alpha))
            groups.setdefault(md, []).append(z)
        order = list(groups)
        payload = b"".join(md.encode(groups[md]) for md in order)
        incoming = self.channel.exchange(payload)
        for md in order:
            own = groups[md]
            size = md.encoded_size(len(own))
            totals = list(own)
            for j in incoming:
                data = incoming[j]
                theirs = md.decode(data[:size], len(own))
                incoming[j] = data[size:]
                totals = [md.add(a, b) for a, b in zip(totals, theirs)]
            if any(totals):
                raise Abort(f"MAC check failed on {sum(1 for t in totals if t)} opened value(s)")

    def open_and_check(self, scheme: Scheme, shares: Sequence[AuthShare]) -> list[int]:
        values = self.open(scheme, shares)
        self.check()
        return values

    # -- interactive operations ------------------------------------------

    def input(self, scheme: Scheme, owner: int, values: Sequence[int] | None, masks: Sequence[InputMask]) -> list[AuthShare]:
        """The owner broadcasts x + sigma (x xor sigma for bits); one round."""
        for m in masks:
            m.consume()
        if self.party == owner:
            if values is None or len(values) != len(masks):
                raise InvalidArgument("input owner must supply one value per mask")
            if scheme.kind == "bit":
                deltas = [(x ^ m.clear) & 1 for x, m in zip(values, masks)]
            else:
                deltas = [(x + m.clear) % scheme.plain_modulus for x, m in zip(values, masks)]
            # public values travel in plaintext width
            incoming = self.channel.exchange(_encode_public(scheme, deltas))
        else:
            incoming = self.channel.exchange(b"")
            deltas = _decode_public(scheme, incoming[owner], len(masks))
        ops = self.ops(scheme)
        return [ops.unmask(MaskedValue(d, m.share)) for d, m in zip(deltas, masks)]

    def beaver_mult(self, scheme: Scheme, x: AuthShare, y: AuthShare, triple: BeaverTriple) -> AuthShare:
        return self.beaver_mult_batch(scheme, [x], [y], [triple])[0]

    def beaver_mult_batch(self, scheme, xs, ys, triples) -> list[AuthShare]:
        if not len(xs) == len(ys) == len(triples):
            raise InvalidArgument("operand and triple counts differ")
        for t in triples:
            t.consume()
        ops = self.ops(scheme)
        masked = [ops.sub(x, t.a) for x, t in zip(xs, triples)] + [ops.sub(y, t.b) for y, t in zip(ys, triples)]
        opened = self.open(scheme, masked)
        n = len(xs)
        out = []
        for i, t in enumerate(triples):
            d, e = opened[i], opened[n + i]
            # x*y = c + d*b + e*a + d*e  with d = x - a, e = y - b
            out.append(ops.affine([1, d, e], [t.c, t.b, t.a], d * e))
        return out

    def b2a(self, bit: AuthShare | MaskedValue, dabit: DaBit, bits: Scheme, target: Scheme) -> AuthShare:
        return self.b2a_batch([bit], [dabit], bits, target)[0]

    def b2a_batch(self, zs, dabits, bits: Scheme, target: Scheme) -> list[AuthShare]:
        """Open c = z xor b, output c + (1 - 2c) * <b>_arith."""
        for d in dabits:
            d.consume()
        bops = self.ops(bits)
        zs = [bops.unmask(z) if isinstance(z, MaskedValue) else z for z in zs]
        cs = self.open(bits, [bops.xor(z, d.bit) for z, d in zip(zs, dabits)])
        tops = self.ops(target)
        return [tops.affine([1 - 2 * c], [d.arith], c) for c, d in zip(cs, dabits)]

    def m_mult_binary(self, inputs: Sequence[MaskedValue], tape, bits: Scheme) -> MaskedValue:
        from .protocols.binary import and_m_online

        return and_m_online(self, bits, inputs, tape)


def _encode_public(scheme: Scheme, values: Sequence[int]) -> bytes:
    if scheme.kind == "bit":
        return scheme.share.encode(values)
    width = 8 if scheme.plain_modulus <= 1 << 64 else 16
    return b"".join(v.to_bytes(width, "little") for v in values)


def _decode_public(scheme: Scheme, data: bytes, count: int) -> list[int]:
    if scheme.kind == "bit":
        return scheme.share.decode(data, count)
    width = 8 if scheme.plain_modulus <= 1 << 64 else 16
    if len(data) != width * count:
        raise InvalidArgument("public input message has the wrong length")
    return [int.from_bytes(data[width * i:width * i + width], "little") for i in range(count)]
