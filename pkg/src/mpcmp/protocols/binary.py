"""Protocols over F_2 on masked bits: m-input AND, n-ary prefix AND, and the
less-than-public-constant comparison built from the prefix-OR identity.

Everything is batch-first: gates of one tree level across the whole batch
share a single open.
"""

from __future__ import annotations

from typing import Sequence

from ..errors import InvalidArgument, TapeMismatch
from ..sharing import AuthShare, MaskedValue, Scheme, ShareOps


def _gate_delta_share(ops: ShareOps, inputs: Sequence[MaskedValue], tape) -> AuthShare:
    """Local share of delta_z = AND(x) xor sigma_z, via the subset expansion.

    With m_i = x_i xor r_i public, AND(x) = sum over S of prod_{i not in S} m_i
    * AND_{i in S} r_i; only supersets S of Z = {i : m_i = 0} contribute.
    """
    if tuple(mv.wire for mv in inputs) != tape.input_wires:
        raise TapeMismatch(f"gate expects wires {tape.input_wires}, got {tuple(mv.wire for mv in inputs)}")
    zero = 0
    for i, (mv, e) in enumerate(zip(inputs, tape.eps)):
        if not (mv.delta ^ e) & 1:
            zero |= 1 << i
    full = (1 << len(inputs)) - 1
    free = full & ~zero
    subsets = tape.subsets
    acc = tape.sigma_z
    value, mac = acc.value, acc.mac
    active = mac is not None
    t = free
    while True:
        S = zero | t
        if S:
            sh = subsets[S - 1]
            value ^= sh.value
            if active:
                mac ^= sh.mac
        if t == 0:
            break
        t = (t - 1) & free
    out = AuthShare(value, mac)
    # empty-set term: prod of all m_i is 1 exactly when no m_i is zero
    return ops.add_const(out, 1) if zero == 0 else out


def and_m_batch(abb, bits: Scheme, batch: Sequence[Sequence[MaskedValue]], tapes) -> list[MaskedValue]:
    ops = abb.ops(bits)
    for inputs, tape in zip(batch, tapes):
        if len(inputs) != tape.arity:
            raise TapeMismatch(f"gate arity {tape.arity} but {len(inputs)} inputs")
        tape.consume()
    shares = [_gate_delta_share(ops, inputs, tape) for inputs, tape in zip(batch, tapes)]
    deltas = abb.open(bits, shares)
    return [MaskedValue(d, t.sigma_z, t.output_wire) for d, t in zip(deltas, tapes)]


def and_m_online(abb, bits: Scheme, inputs: Sequence[MaskedValue], tape) -> MaskedValue:
    """AND of m masked bits in one round."""
    return and_m_batch(abb, bits, [inputs], [tape])[0]


def prefix_and_online(abb, bits: Scheme, batch: Sequence[Sequence[MaskedValue]], tapes) -> list[list[MaskedValue]]:
    """Prefix ANDs z_j = x_0 & ... & x_j for every vector of the batch.

    One round per tree level, whatever the batch size.
    """
    if len(batch) != len(tapes):
        raise InvalidArgument("one prefix tape per input vector is required")
    plans = []
    for xs, tape in zip(batch, tapes):
        if len(xs) != tape.k:
            raise TapeMismatch(f"prefix tape for k={tape.k} but {len(xs)} inputs")
        tape.consume()
        plans.append(tape.plan)
    if not plans:
        return []
    ops = abb.ops(bits)
    cur = [list(xs) for xs in batch]
    cursor = [0] * len(batch)
    depth = max(p.depth for p in plans)
    for level in range(depth):
        shares = []
        placed = []
        for b, plan in enumerate(plans):
            if level >= plan.depth:
                continue
            for g in plan.levels[level]:
                gt = tapes[b].gates[cursor[b]]
                cursor[b] += 1
                if gt.output_wire != g.output_wire:
                    raise TapeMismatch("gate tape out of plan order")
                gt.consume()
                inputs = [cur[b][p] for p in g.inputs]
                shares.append(_gate_delta_share(ops, inputs, gt))
                placed.append((b, g.position, gt))
        deltas = abb.open(bits, shares)
        nxt = [list(v) for v in cur]
        for d, (b, pos, gt) in zip(deltas, placed):
            nxt[b][pos] = MaskedValue(d, gt.sigma_z, gt.output_wire)
        cur = nxt
    return cur


def masked_inputs(tape, deltas_lsb: Sequence[int]) -> list[MaskedValue]:
    """LSB-first masked bits whose masks are the tape's prefix input masks.

    Bit i feeds prefix position k-1-i, so the comparison scans from the top bit.
    """
    k = tape.k
    if len(deltas_lsb) != k:
        raise TapeMismatch(f"expected {k} masked bits, got {len(deltas_lsb)}")
    return [MaskedValue(d & 1, tape.input_masks[k - 1 - i], k - 1 - i) for i, d in enumerate(deltas_lsb)]


def _xor(ops: ShareOps, a: MaskedValue, b: MaskedValue) -> MaskedValue:
    return MaskedValue(a.delta ^ b.delta, ops.add(a.sigma, b.sigma))


def ltbits_2n_batch(abb, bits: Scheme, batch: Sequence[Sequence[MaskedValue]], Rs: Sequence[int], tapes) -> list[MaskedValue]:
    """Masked bit 1{x < R} for LSB-first masked bits of x and public R."""
    if not len(batch) == len(Rs) == len(tapes):
        raise InvalidArgument("inputs, constants and tapes must align")
    ops = abb.ops(bits)
    zero = ops.zero()
    results: list[MaskedValue | None] = [None] * len(batch)
    run, run_tapes, run_idx = [], [], []
    for b, (xs, R, tape) in enumerate(zip(batch, Rs, tapes)):
        ell = len(xs)
        if ell < 1 or not 0 <= R <= 1 << ell:
            raise InvalidArgument(f"constant {R} outside [0, 2^{ell}]")
        if R == 1 << ell:
            results[b] = MaskedValue(1, zero)
            continue
        if tape.k != ell:
            raise TapeMismatch(f"prefix tape for {tape.k} bits, input has {ell}")
        # y_i = x_i xor R_i xor 1 is 1 where the bits agree; prefix runs top-down
        ys = [None] * ell
        for i, x in enumerate(xs):
            ys[ell - 1 - i] = MaskedValue(x.delta ^ ((R >> i) & 1) ^ 1, x.sigma, x.wire)
        run.append(ys)
        run_tapes.append(tape)
        run_idx.append(b)
    prefixes = prefix_and_online(abb, bits, run, run_tapes)
    for b, P in zip(run_idx, prefixes):
        xs, R = batch[b], Rs[b]
        ell = len(xs)
        acc = MaskedValue(0, zero)
        for i in range(ell):
            if not (R >> i) & 1:
                continue
            j = ell - 1 - i
            # first disagreement (from the top) sits at bit i
            above = P[j - 1] if j > 0 else MaskedValue(1, zero)
            acc = _xor(ops, acc, _xor(ops, above, P[j]))
        results[b] = acc
    return results


def ltbits_2n(abb, bits: Scheme, xs: Sequence[MaskedValue], R: int, tape) -> MaskedValue:
    return ltbits_2n_batch(abb, bits, [xs], [R], [tape])[0]


def binary_tree_ltbits(abb, bits: Scheme, batch, Rs, tapes) -> list[MaskedValue]:
    """Binary-tree (n = 2) instance used as the comparison baseline."""
    for t in tapes:
        if t.n_branch != 2:
            raise TapeMismatch("the baseline runs on binary prefix trees only")
    return ltbits_2n_batch(abb, bits, batch, Rs, tapes)
