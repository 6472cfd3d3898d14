"""Sign bit of an arithmetic sharing over Z_{2^k}.

MSB(x) = MSB(x + r) xor MSB(2^k - r) xor 1{y0 > 2^(k-1) - y1 - 1}, with
y0 = (x + r) mod 2^(k-1) public and y1 = (2^k - r) mod 2^(k-1) known to the
dealer, who supplies 2^(k-1) - y1 - 1 bit by bit.
"""

from __future__ import annotations

from typing import Sequence

from ..errors import InvalidArgument, TapeMismatch
from ..sharing import AuthShare, Scheme
from .binary import ltbits_2n_batch, masked_inputs


def msb_2k_batch(abb, ring: Scheme, bits: Scheme, xs: Sequence[AuthShare], tapes) -> list[AuthShare]:
    """Shares over Z_{2^k} of bit k-1 of each x.

    Rounds: one open of x + r, ceil(log_n(k-1)) prefix levels, one B2A open.
    """
    if len(xs) != len(tapes):
        raise InvalidArgument("one MSB tape per input is required")
    k = ring.k
    for t in tapes:
        if t.k != k:
            raise TapeMismatch(f"MSB tape for k={t.k}, sharing has k={k}")
        t.consume()
    rops = abb.ops(ring)
    xhat = abb.open(ring, [rops.add(x, t.r) for x, t in zip(xs, tapes)])
    half = 1 << (k - 1)
    vbits = [masked_inputs(t.prefix, t.v_deltas) for t in tapes]
    ws = ltbits_2n_batch(abb, bits, vbits, [xh % half for xh in xhat], [t.prefix for t in tapes])
    bops = abb.ops(bits)
    zs = [
        bops.add_const(bops.add(bops.unmask(w), t.msb_r), xh >> (k - 1))
        for w, t, xh in zip(ws, tapes, xhat)
    ]
    return abb.b2a_batch(zs, [t.dabit for t in tapes], bits, ring)


def msb_2k(abb, ring: Scheme, bits: Scheme, x: AuthShare, tape) -> AuthShare:
    return msb_2k_batch(abb, ring, bits, [x], [tape])[0]
