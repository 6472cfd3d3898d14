"""Binary per-party tape files.

Layout: an 8-byte magic, a version, a protocol id and a fixed params block,
followed by the party's MAC key shares (active mode only) and one payload
record per batch item. Every integer is little-endian and every element uses
the algebra encodings, so two writes of the same tape are byte-identical.

Loading a tape records its (nonce, party) pair in a registry file next to it;
a second load of the same slice raises :class:`TapeError`.
"""

from __future__ import annotations

import os
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .abb import BeaverTriple, DaBit, EdaBit
from .algebra import GF2s, PrimeField, Ring, pack_bits, unpack_bits
from .dealer import AndGateTape, BasicTape, Msb2kTape, MsbPTape, PowerTape, PrefixTape
from .errors import TapeError
from .protocols.plan import build_prefix_plan
from .sharing import AuthShare, Scheme

MAGIC = b"MPCTAPE1"
VERSION = 1
HEADER = struct.Struct("<8sHHHHHQHHHIQ")

PROTOCOL_IDS = {"power": 1, "and": 2, "prefix": 3, "msb_p": 4, "msb_2k": 5, "basic": 6}
PROTOCOL_NAMES = {v: k for k, v in PROTOCOL_IDS.items()}
BASIC_FIELD, BASIC_RING = 0, 1
REGISTRY_NAME = ".consumed"


@dataclass
class TapeFile:
    """One party's slice of a dealer session for a batch of protocol instances.

    ``modulus`` is p for prime-field tapes and the share width w for ring
    tapes (w = k + s in active mode). ``arity`` is the AND arity for
    ``and`` tapes and the domain code for ``basic`` tapes.
    """

    protocol: str
    n_parties: int
    party: int
    active: bool
    modulus: int = 0
    ell: int = 0
    n_branch: int = 0
    arity: int = 0
    nonce: int = 0
    items: list = field(default_factory=list)
    alphas: dict = field(default_factory=dict)

    @property
    def batch(self) -> int:
        return len(self.items)

    def schemes(self) -> list[Scheme]:
        """Sharing schemes used by the payload, in alpha-section order."""
        bits = Scheme.bits(self.active)
        if self.protocol in ("power", "msb_p"):
            return [Scheme.field(self.modulus, self.active)]
        if self.protocol in ("and", "prefix"):
            return [bits]
        if self.protocol == "msb_2k":
            return [self._ring()]
        if self.protocol == "basic":
            main = Scheme.field(self.modulus, self.active) if self.arity == BASIC_FIELD else self._ring()
            return [main, bits]
        raise TapeError(f"unknown tape protocol {self.protocol!r}")

    def _ring(self) -> Scheme:
        s = self.modulus - self.ell if self.active else 0
        if self.active:
            return Scheme.ring(self.ell, True, s)
        return Scheme.ring(self.modulus, False)

    def mac_domains(self) -> list:
        out = []
        for sc in self.schemes():
            if sc.mac is not None and sc.mac not in out:
                out.append(sc.mac)
        if self.protocol == "msb_2k" and self.active:
            out.append(GF2s())
        return out


# -- byte-level helpers --------------------------------------------------------


class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []

    def raw(self, data: bytes) -> None:
        self.parts.append(data)

    def u32(self, *values: int) -> None:
        self.parts.append(struct.pack(f"<{len(values)}I", *values))

    def shares(self, scheme: Scheme, shares) -> None:
        self.parts.append(scheme.share.encode([s.value for s in shares]))
        if scheme.active:
            self.parts.append(scheme.mac.encode([s.mac for s in shares]))

    def bits(self, values) -> None:
        self.parts.append(pack_bits(values))

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data: bytes, offset: int = 0):
        self.data = data
        self.pos = offset

    def take(self, n: int) -> bytes:
        end = self.pos + n
        if end > len(self.data):
            raise TapeError(f"truncated tape: need {end} bytes, have {len(self.data)}")
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def u32(self, count: int = 1) -> tuple[int, ...]:
        return struct.unpack(f"<{count}I", self.take(4 * count))

    def shares(self, scheme: Scheme, count: int) -> list[AuthShare]:
        values = scheme.share.decode(self.take(scheme.share.encoded_size(count)), count)
        if not scheme.active:
            return [AuthShare(v) for v in values]
        macs = scheme.mac.decode(self.take(scheme.mac.encoded_size(count)), count)
        return [AuthShare(v, m) for v, m in zip(values, macs)]

    def bits(self, count: int) -> list[int]:
        return unpack_bits(self.take((count + 7) // 8), count)

    def done(self) -> None:
        if self.pos != len(self.data):
            raise TapeError(f"{len(self.data) - self.pos} trailing bytes after payload")


# -- payload records -----------------------------------------------------------


def _put_power(w: _Writer, scheme: Scheme, t: PowerTape) -> None:
    w.raw(scheme.share.encode(list(t.coeffs) + [t.gamma]))
    w.shares(scheme, [s for row in t.powers for s in row])


def _get_power(r: _Reader, scheme: Scheme, ell: int) -> PowerTape:
    p = scheme.plain_modulus
    pub = PrimeField(p).decode(r.take(8 * (ell + 3)), ell + 3)
    flat = r.shares(scheme, ell * (ell + 1))
    rows = [flat[i * (ell + 1):(i + 1) * (ell + 1)] for i in range(ell)]
    return PowerTape(p, ell, tuple(pub[:-1]), pub[-1], rows)


def _put_gate(w: _Writer, bits: Scheme, t: AndGateTape) -> None:
    w.shares(bits, [t.sigma_z, *t.subsets])
    w.bits(t.eps)


def _get_gate(r: _Reader, bits: Scheme, m: int, wires: tuple[int, ...], out: int) -> AndGateTape:
    sh = r.shares(bits, 1 << m)
    eps = tuple(r.bits(m))
    return AndGateTape(sh[0], sh[1:], eps, wires, out)


def _put_prefix(w: _Writer, bits: Scheme, t: PrefixTape) -> None:
    w.shares(bits, t.input_masks)
    for g in t.gates:
        _put_gate(w, bits, g)


def _get_prefix(r: _Reader, bits: Scheme, k: int, n_branch: int) -> PrefixTape:
    plan = build_prefix_plan(k, n_branch)
    masks = r.shares(bits, k)
    gates = [_get_gate(r, bits, g.arity, g.input_wires, g.output_wire) for g in plan.gates]
    tape = PrefixTape(k, n_branch, masks, gates)
    tape.__dict__["plan"] = plan
    return tape


def _put_item(w: _Writer, tf: TapeFile, item) -> None:
    main = tf.schemes()[0]
    bits = Scheme.bits(tf.active)
    proto = tf.protocol
    if proto == "power":
        _put_power(w, main, item)
    elif proto == "and":
        w.u32(*item.input_wires, item.output_wire)
        _put_gate(w, bits, item)
        masks = item.input_masks or []
        w.u32(len(masks))
        w.shares(bits, masks)
    elif proto == "prefix":
        _put_prefix(w, bits, item)
    elif proto == "msb_p":
        w.shares(main, [item.r, *item.r_bits])
        _put_power(w, main, item.lt_a)
        _put_power(w, main, item.lt_b)
    elif proto == "msb_2k":
        w.shares(main, [item.r])
        w.shares(bits, [item.msb_r])
        w.bits(item.v_deltas)
        _put_prefix(w, bits, item.prefix)
        w.shares(bits, [item.dabit.bit])
        w.shares(main, [item.dabit.arith])
    else:
        nbits = len(item.edabits[0].bits) if item.edabits else 0
        w.u32(len(item.triples), len(item.dabits), len(item.edabits), nbits)
        w.shares(main, [s for t in item.triples for s in (t.a, t.b, t.c)])
        w.shares(bits, [d.bit for d in item.dabits])
        w.shares(main, [d.arith for d in item.dabits])
        w.shares(main, [e.arith for e in item.edabits])
        w.shares(bits, [b for e in item.edabits for b in e.bits])


def _get_item(r: _Reader, tf: TapeFile) -> Any:
    main = tf.schemes()[0]
    bits = Scheme.bits(tf.active)
    proto = tf.protocol
    if proto == "power":
        return _get_power(r, main, tf.ell)
    if proto == "and":
        m = tf.arity
        ids = r.u32(m + 1)
        gate = _get_gate(r, bits, m, tuple(ids[:m]), ids[m])
        (count,) = r.u32()
        if count:
            gate.input_masks = r.shares(bits, count)
        return gate
    if proto == "prefix":
        return _get_prefix(r, bits, tf.ell, tf.n_branch)
    if proto == "msb_p":
        m = tf.ell
        sh = r.shares(main, m + 1)
        lt_a = _get_power(r, main, m)
        lt_b = _get_power(r, main, m)
        return MsbPTape(tf.modulus, sh[0], sh[1:], lt_a, lt_b)
    if proto == "msb_2k":
        k = tf.ell
        rs = r.shares(main, 1)[0]
        msb = r.shares(bits, 1)[0]
        v = r.bits(k - 1)
        prefix = _get_prefix(r, bits, k - 1, tf.n_branch)
        dabit = DaBit(r.shares(bits, 1)[0], r.shares(main, 1)[0])
        return Msb2kTape(k, tf.n_branch, rs, msb, v, prefix, dabit)
    nt, nd, ne, nbits = r.u32(4)
    flat = r.shares(main, 3 * nt)
    triples = [BeaverTriple(*flat[3 * i:3 * i + 3]) for i in range(nt)]
    dbits, darith = r.shares(bits, nd), r.shares(main, nd)
    earith = r.shares(main, ne)
    ebits = r.shares(bits, ne * nbits)
    edabits = [EdaBit(earith[i], ebits[i * nbits:(i + 1) * nbits]) for i in range(ne)]
    return BasicTape(triples, [DaBit(b, a) for b, a in zip(dbits, darith)], edabits)


# -- files -----------------------------------------------------------------------


def encode_tape(tf: TapeFile) -> bytes:
    if tf.protocol not in PROTOCOL_IDS:
        raise TapeError(f"unknown tape protocol {tf.protocol!r}")
    head = HEADER.pack(
        MAGIC, VERSION, PROTOCOL_IDS[tf.protocol],
        tf.n_parties, tf.party, int(tf.active), tf.modulus,
        tf.ell, tf.n_branch, tf.arity, tf.batch, tf.nonce,
    )
    w = _Writer()
    for dom in tf.mac_domains():
        w.raw(dom.encode([tf.alphas.get(dom, 0)]))
    for item in tf.items:
        _put_item(w, tf, item)
    return head + w.getvalue()


def decode_tape(data: bytes) -> TapeFile:
    if len(data) < HEADER.size:
        raise TapeError("truncated tape header")
    magic, version, pid, n, party, sec, modulus, ell, nb, arity, batch, nonce = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise TapeError("bad tape magic")
    if version != VERSION:
        raise TapeError(f"unsupported tape version {version}")
    if pid not in PROTOCOL_NAMES:
        raise TapeError(f"unknown protocol id {pid}")
    if sec > 1:
        raise TapeError(f"bad security mode {sec}")
    if party >= n:
        raise TapeError(f"tape party index {party} outside {n} parties")
    tf = TapeFile(PROTOCOL_NAMES[pid], n, party, bool(sec), modulus, ell, nb, arity, nonce)
    r = _Reader(data, HEADER.size)
    try:
        for dom in tf.mac_domains():
            tf.alphas[dom] = dom.decode(r.take(dom.encoded_size(1)), 1)[0]
        tf.items = [_get_item(r, tf) for _ in range(batch)]
    except TapeError:
        raise
    except Exception as exc:
        raise TapeError(f"malformed tape payload: {exc}") from exc
    r.done()
    return tf


def write_tape(tape: TapeFile, path: str | os.PathLike) -> None:
    Path(path).write_bytes(encode_tape(tape))


class NonceRegistry:
    """Append-only record of consumed (nonce, party) pairs."""

    _lock = threading.Lock()

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)

    def seen(self) -> set[str]:
        if not self.path.exists():
            return set()
        return set(self.path.read_text().split())

    def forget(self, nonce: int) -> None:
        """Drop a session's records; used when the dealer rewrites that session."""
        prefix = f"{nonce:016x}:"
        with self._lock:
            if not self.path.exists():
                return
            keep = [k for k in self.path.read_text().split() if not k.startswith(prefix)]
            self.path.write_text("".join(k + "\n" for k in keep))

    def mark(self, nonce: int, party: int) -> None:
        key = f"{nonce:016x}:{party}"
        with self._lock:
            if key in self.seen():
                raise TapeError(f"tape session {nonce:016x} already consumed by party {party}")
            with self.path.open("a") as fh:
                fh.write(key + "\n")


_DEFAULT = object()


def load_tape(path: str | os.PathLike, party_index: int, registry: NonceRegistry | None = _DEFAULT) -> TapeFile:
    """Read one party's slice and mark its session nonce as consumed.

    Pass ``registry=None`` to inspect a tape without consuming it.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise TapeError(f"cannot read tape {path}: {exc}") from exc
    tf = decode_tape(data)
    if party_index >= tf.n_parties:
        raise TapeError(f"party {party_index} outside {tf.n_parties} parties")
    if tf.party != party_index:
        raise TapeError(f"tape belongs to party {tf.party}, not {party_index}")
    if registry is _DEFAULT:
        registry = NonceRegistry(Path(path).parent / REGISTRY_NAME)
    if registry is not None:
        registry.mark(tf.nonce, party_index)
    return tf


def tape_path(directory: str | os.PathLike, protocol: str, party: int) -> Path:
    return Path(directory) / f"{protocol}.p{party}.tape"


def ring_header(k: int, active: bool, s: int) -> tuple[int, int]:
    """(modulus-or-width, k) header fields for ring tapes."""
    return (k + s if active else k), k


__all__ = [
    "MAGIC",
    "NonceRegistry",
    "PROTOCOL_IDS",
    "TapeFile",
    "decode_tape",
    "encode_tape",
    "load_tape",
    "ring_header",
    "tape_path",
    "write_tape",
]
