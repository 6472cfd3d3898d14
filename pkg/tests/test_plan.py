import random

import pytest

from mpcmp.errors import InvalidArgument
from mpcmp.protocols.plan import build_prefix_plan, evaluate_plan, gate_arity, level_count


def prefix_fold(bits):
    out, acc = [], 1
    for b in bits:
        acc &= b
        out.append(acc)
    return out


def test_binary_plan_for_four_inputs():
    plan = build_prefix_plan(4, 2)
    layout = [[(g.position, g.inputs) for g in level] for level in plan.levels]
    assert layout == [[(1, (0, 1)), (3, (2, 3))], [(2, (1, 2)), (3, (1, 3))]]
    assert plan.n_wires == 8


def test_level_count_exact():
    assert level_count(1, 2) == 0
    assert level_count(20, 4) == 3
    assert level_count(16, 4) == 2
    assert level_count(17, 4) == 3
    assert level_count(63, 2) == 6
    assert level_count(64, 2) == 6
    assert level_count(65, 2) == 7
    with pytest.raises(InvalidArgument):
        level_count(4, 1)


def test_gate_arity_values():
    assert [gate_arity(i, 0, 3) for i in range(6)] == [1, 2, 3, 1, 2, 3]
    assert [gate_arity(i, 1, 2) for i in range(8)] == [1, 1, 2, 2, 1, 1, 2, 2]


@pytest.mark.parametrize("k", [1, 2, 3, 7, 8, 20, 31, 63])
@pytest.mark.parametrize("n", [2, 3, 4, 8])
def test_plan_matches_fold(k, n):
    plan = build_prefix_plan(k, n)
    r = random.Random(k * 100 + n)
    cases = [[1] * k, [0] * k] + [[int(r.random() < 0.85) for _ in range(k)] for _ in range(40)]
    for bits in cases:
        assert evaluate_plan(plan, bits) == prefix_fold(bits)
    assert plan.depth == level_count(k, n)
    assert all(2 <= g.arity <= n for g in plan.gates)


def test_plan_wires_are_fresh_and_ordered():
    plan = build_prefix_plan(20, 3)
    outs = [g.output_wire for g in plan.gates]
    assert outs == list(range(20, 20 + len(outs)))
