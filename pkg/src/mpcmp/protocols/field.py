"""Comparison and MSB extraction over a prime field.

The comparison maps every bit position to a small integer c_i that is 0 exactly
at the top position where x has a 0 and R has a 1, and lies in [1, l+1]
everywhere else. The dealer's root polynomial turns c_i into an indicator after
a single open of c_i - r_i.
"""

from __future__ import annotations

from typing import Sequence

from ..algebra import binomial_table
from ..errors import InvalidArgument, TapeMismatch
from ..sharing import AuthShare, Scheme, ShareOps


def _masked_positions(ops: ShareOps, xs: Sequence[AuthShare], R: int, tape) -> list[AuthShare]:
    """Shares of d_i = c_i - r_i, where c_i = x_i - R_i + 1 + sum_{k > i} (x_k xor R_k)."""
    ell = len(xs)
    if tape.ell != ell:
        raise TapeMismatch(f"power tape for l={tape.ell}, input has {ell} bits")
    out = [None] * ell
    # running share of sum_{k > i} w_k, built from the top bit down
    suffix = ops.zero()
    for i in range(ell - 1, -1, -1):
        x = xs[i]
        Ri = (R >> i) & 1
        c = ops.add_const(ops.add(x, suffix), 1 - Ri)
        out[i] = ops.sub(c, tape.powers[i][0])
        # x xor R_i for a public bit: 1 - x when R_i = 1, x otherwise
        w = ops.add_const(ops.neg(x), 1) if Ri else x
        suffix = ops.add(suffix, w)
    return out


def _indicators(ops: ShareOps, ds: Sequence[int], tape) -> list[AuthShare]:
    """Shares of e_i = gamma * f(c_i) from the opened d_i = c_i - r_i.

    Expanding (d + r)^k binomially gives e_i as an affine function of the
    shared powers r_i^1 .. r_i^(l+1).
    """
    p, ell = tape.p, tape.ell
    deg = ell + 1
    binom = binomial_table(deg, p)
    coeffs, gamma = tape.coeffs, tape.gamma
    out = []
    for i, d in enumerate(ds):
        dpow = [1] * (deg + 1)
        for e in range(1, deg + 1):
            dpow[e] = dpow[e - 1] * d % p
        lin = []
        for j in range(1, deg + 1):
            acc = 0
            for k in range(j, deg + 1):
                acc += coeffs[k] * binom[k][j] * dpow[k - j]
            lin.append(gamma * acc % p)
        const = gamma * sum(coeffs[k] * dpow[k] for k in range(deg + 1)) % p
        out.append(ops.affine(lin, tape.powers[i], const))
    return out


def _check_constant(R: int, ell: int) -> None:
    if ell < 1 or not 0 <= R <= 1 << ell:
        raise InvalidArgument(f"constant {R} outside [0, 2^{ell}]")


def ltbits_p_indicators(abb, scheme: Scheme, xs: Sequence[AuthShare], R: int, tape) -> list[AuthShare]:
    """Per-position indicators e_i; at most one reconstructs to 1."""
    _check_constant(R, len(xs))
    tape.consume()
    ops = abb.ops(scheme)
    ds = abb.open(scheme, _masked_positions(ops, xs, R, tape))
    return _indicators(ops, ds, tape)


def ltbits_p_batch(abb, scheme: Scheme, batch: Sequence[Sequence[AuthShare]], Rs: Sequence[int], tapes) -> list[AuthShare]:
    """Shares of 1{x < R} in F_p for bitwise-shared x; one round for the batch."""
    if not len(batch) == len(Rs) == len(tapes):
        raise InvalidArgument("inputs, constants and tapes must align")
    ops = abb.ops(scheme)
    return _ltbits_p_rounds(abb, ops, scheme, [(xs, R, t) for xs, R, t in zip(batch, Rs, tapes)])


def _ltbits_p_rounds(abb, ops: ShareOps, scheme: Scheme, jobs) -> list[AuthShare]:
    results: list[AuthShare | None] = [None] * len(jobs)
    pending = []
    masked: list[AuthShare] = []
    for b, (xs, R, tape) in enumerate(jobs):
        ell = len(xs)
        _check_constant(R, ell)
        if R == 1 << ell:
            results[b] = ops.const(1)
            continue
        if tape.p != scheme.plain_modulus:
            raise TapeMismatch("power tape is for a different prime")
        tape.consume()
        pending.append((b, tape, len(masked)))
        masked.extend(_masked_positions(ops, xs, R, tape))
    if pending:
        opened = abb.open(scheme, masked)
        for b, tape, off in pending:
            es = _indicators(ops, opened[off:off + tape.ell], tape)
            results[b] = ops.affine([1] * len(es), es)
    return results


def ltbits_p(abb, scheme: Scheme, xs: Sequence[AuthShare], R: int, tape) -> AuthShare:
    return ltbits_p_batch(abb, scheme, [xs], [R], [tape])[0]


def msb_p_batch(abb, scheme: Scheme, xs: Sequence[AuthShare], tapes) -> list[AuthShare]:
    """Shares of 1{x >= floor(p/2)}; two rounds for the whole batch.

    With a = x + r and b = x + r + ceil(p/2) opened,
    MSB(x) = 1{a < r} - 1{b < r} + 1{b < ceil(p/2)}, and 1{a < r} is
    1 - 1{r < a + 1}, so both secret terms are comparisons of r's bits
    against public constants.
    """
    if len(xs) != len(tapes):
        raise InvalidArgument("one MSB tape per input is required")
    p = scheme.plain_modulus
    half = (p + 1) // 2
    ops = abb.ops(scheme)
    for t in tapes:
        if t.p != p:
            raise TapeMismatch("MSB tape is for a different prime")
        t.consume()
    masked = [ops.add(x, t.r) for x, t in zip(xs, tapes)]
    opened = abb.open(scheme, masked + [ops.add_const(m, half) for m in masked])
    n = len(xs)
    jobs = []
    for i, t in enumerate(tapes):
        a, b = opened[i], opened[n + i]
        jobs.append((t.r_bits, b + 1, t.lt_b))
        jobs.append((t.r_bits, a + 1, t.lt_a))
    lts = _ltbits_p_rounds(abb, ops, scheme, jobs)
    out = []
    for i in range(n):
        b = opened[n + i]
        out.append(ops.affine([1, -1], [lts[2 * i], lts[2 * i + 1]], int(b < half)))
    return out


def msb_p(abb, scheme: Scheme, x: AuthShare, tape) -> AuthShare:
    return msb_p_batch(abb, scheme, [x], [tape])[0]
