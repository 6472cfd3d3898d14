import random
from itertools import product

import pytest

from mpcmp import Params, run
from mpcmp.dealer import Dealer
from mpcmp.errors import TapeMismatch
from mpcmp.protocols import and_m_online, ltbits_p, msb_p
from mpcmp.sharing import MaskedValue, deal_authenticated, reconstruct, reconstruct_masked

from conftest import run_abb


def prefix_fold(bits):
    out, acc = [], 1
    for b in bits:
        acc &= b
        out.append(acc)
    return out


def msb_floor_half(x, p):
    return int(x >= p // 2)


@pytest.mark.parametrize("m", [2, 3, 4])
@pytest.mark.parametrize("active", [False, True])
def test_and_m_truth_table(m, active):
    params = Params("and_m", n_parties=3, active=active, ell=m)
    rows = [list(bits) for bits in product((0, 1), repeat=m)]
    out = run(params, rows, seed=m)
    assert out.outputs == [int(all(r)) for r in rows]
    assert out.report.rounds == (2 if active else 1)


def test_and_gate_rejects_wrong_wires():
    d = Dealer(2, False, random.Random(1))
    tapes, _ = d.gen_and_tape(2, [0, 0], input_wires=(4, 5))
    sh = d.share_bits([0, 0])

    def body(abb, i):
        inputs = [MaskedValue(1, sh[i][0], 0), MaskedValue(1, sh[i][1], 1)]
        with pytest.raises(TapeMismatch):
            and_m_online(abb, d.bit_scheme(), inputs, tapes[i])

    run_abb(2, body)


@pytest.mark.parametrize("active", [False, True])
def test_prefix_and_example(active):
    params = Params("prefix_and", n_parties=3, active=active, ell=8)
    out = run(params, [[1, 1, 0, 1, 1, 1, 1, 1], [1] * 8], seed=2)
    assert out.outputs == [[1, 1, 0, 0, 0, 0, 0, 0], [1] * 8]


def test_prefix_and_rounds_follow_depth():
    params = Params("prefix_and", n_parties=3, ell=20, n_branch=4)
    r = random.Random(3)
    rows = [[int(r.random() < 0.9) for _ in range(20)] for _ in range(16)]
    out = run(params, rows, seed=3)
    assert out.outputs == [prefix_fold(row) for row in rows]
    assert out.report.rounds == 3


@pytest.mark.parametrize("ell,x,R", [(3, 3, 5), (3, 5, 5), (3, 7, 0), (3, 0, 8), (1, 0, 1), (4, 15, 15), (4, 14, 15)])
@pytest.mark.parametrize("protocol", ["ltbits_2n", "ltbits_p"])
def test_ltbits_edge_cases(protocol, ell, x, R):
    params = Params(protocol, n_parties=2, ell=ell, p=13 if ell < 4 else 61, n_branch=3)
    out = run(params, [(x, R)], seed=ell + x + R)
    assert out.outputs == [int(x < R)]


def test_ltbits_2n_constant_at_top_skips_rounds():
    params = Params("ltbits_2n", n_parties=3, ell=5)
    out = run(params, [(31, 32), (0, 32)], seed=1)
    assert out.outputs == [1, 1]
    assert out.report.rounds == 0


def test_ltbits_p_single_call():
    d = Dealer(3, True, random.Random(4))
    scheme = d.field_scheme(13)
    tape = d.gen_power_tape(3, 13)
    key = d.key(scheme)
    xs = [deal_authenticated(b, 3, key, random.Random(b), scheme) for b in (1, 1, 0)]
    alphas = [d.alphas(i) for i in range(3)]
    outs, res = run_abb(3, lambda abb, i: ltbits_p(abb, scheme, [x[i] for x in xs], 5, tape[i]), alphas)
    assert reconstruct(scheme, outs) == 1
    assert res.report.rounds == 2


@pytest.mark.parametrize("p", [13, 61, 65521])
def test_msb_p_examples(p):
    r = random.Random(p)
    xs = [0, 1, p // 2 - 1, p // 2, p - 1] + [r.randrange(p) for _ in range(20)]
    out = run(Params("msb_p", n_parties=3, p=p), xs, seed=p)
    assert out.outputs == [msb_floor_half(x, p) for x in xs]
    assert out.report.rounds == 2


def test_msb_p_active_rounds():
    xs = [5, 6, 12]
    out = run(Params("msb_p", n_parties=2, p=13, active=True), xs, seed=7)
    assert out.outputs == [0, 1, 1]
    assert out.report.rounds == 3


def test_msb_p_direct_call():
    d = Dealer(2, False, random.Random(9))
    scheme = d.field_scheme(13)
    tape = d.gen_msb_p_tape(13)
    x = d.share(scheme, 9)
    outs, _ = run_abb(2, lambda abb, i: msb_p(abb, scheme, x[i], tape[i]))
    assert reconstruct(scheme, outs) == 1


@pytest.mark.parametrize("k,n", [(4, 2), (8, 3), (32, 4), (64, 8)])
@pytest.mark.parametrize("active", [False, True])
def test_msb_2k(k, n, active):
    r = random.Random(k * n)
    top = 1 << (k - 1)
    xs = [0, 1, top - 1, top, (1 << k) - 1, 9 % (1 << k), 3] + [r.getrandbits(k) for _ in range(10)]
    out = run(Params("msb_2k", n_parties=3, k=k, n_branch=n, active=active), xs, seed=k)
    assert out.outputs == [x >> (k - 1) for x in xs]


def test_msb_2k_five_parties_rounds():
    out = run(Params("msb_2k", n_parties=5, k=32, n_branch=4), [5, 2**31 + 5], seed=0)
    assert out.outputs == [0, 1]
    assert out.report.rounds == 5


def test_prefix_outputs_are_masked_views():
    params = Params("prefix_and", n_parties=2, ell=3)
    out = run(params, [[1, 0, 1]], seed=11)
    views = [s[0] for s in out.shares]
    assert [reconstruct_masked(params.bits, [v[j] for v in views]) for j in range(3)] == [1, 0, 0]


def test_binary_tree_baseline_matches_and_rejects_wider_trees():
    from mpcmp.protocols import binary_tree_ltbits, masked_inputs

    d = Dealer(2, False, random.Random(12))
    ell = 4
    cases = [(x, R) for x in range(16) for R in (0, 5, 9, 15)]
    tapes, masks = zip(*(d.gen_prefix_tape(ell, 2) for _ in cases))

    def body(abb, i):
        xs = [
            masked_inputs(tapes[c][i], [((x >> j) & 1) ^ masks[c][ell - 1 - j] for j in range(ell)])
            for c, (x, _) in enumerate(cases)
        ]
        return binary_tree_ltbits(abb, d.bit_scheme(), xs, [R for _, R in cases], [t[i] for t in tapes])

    outs, res = run_abb(2, body)
    got = [reconstruct_masked(d.bit_scheme(), [o[c] for o in outs]) for c in range(len(cases))]
    assert got == [int(x < R) for x, R in cases]
    assert res.report.rounds == 2

    wide, _ = d.gen_prefix_tape(ell, 3)
    with pytest.raises(TapeMismatch):
        run_abb(2, lambda abb, i: binary_tree_ltbits(abb, d.bit_scheme(), [[]], [1], [wide[i]]))
