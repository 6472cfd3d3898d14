"""Gate layout of the n-ary prefix-AND tree.

At level j every position i is combined with the last positions of the
preceding sub-blocks of size n^j inside its block of size n^(j+1). Positions
where that leaves a single input are wireless copies and get no gate.

Wires 0..k-1 are the inputs; every gate output gets the next fresh wire id,
in plan order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from ..errors import InvalidArgument


@dataclass(frozen=True)
class Gate:
    position: int
    # positions read at the previous level, the gate's own position last
    inputs: tuple[int, ...]
    input_wires: tuple[int, ...]
    output_wire: int

    @property
    def arity(self) -> int:
        return len(self.inputs)


@dataclass(frozen=True)
class PrefixPlan:
    k: int
    n_branch: int
    levels: tuple[tuple[Gate, ...], ...]
    # wire holding prefix j after the last level
    output_wires: tuple[int, ...]

    @property
    def gates(self) -> list[Gate]:
        return [g for level in self.levels for g in level]

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def n_wires(self) -> int:
        return self.k + len(self.gates)


def level_count(k: int, n_branch: int) -> int:
    """ceil(log_n k) in exact integer arithmetic (0 for k = 1)."""
    if k < 1 or n_branch < 2:
        raise InvalidArgument("need k >= 1 and n_branch >= 2")
    levels, span = 0, 1
    while span < k:
        span *= n_branch
        levels += 1
    return levels


def gate_arity(i: int, j: int, n_branch: int) -> int:
    return (i % n_branch ** (j + 1)) // n_branch ** j + 1


@lru_cache(maxsize=256)
def build_prefix_plan(k: int, n_branch: int) -> PrefixPlan:
    depth = level_count(k, n_branch)
    wire = list(range(k))
    next_wire = k
    levels = []
    for j in range(depth):
        block = n_branch ** (j + 1)
        sub = n_branch ** j
        gates = []
        new_wire = list(wire)
        for i in range(k):
            m = gate_arity(i, j, n_branch)
            if m == 1:
                continue
            start = (i // block) * block
            vec = tuple(start + t * sub - 1 for t in range(1, m)) + (i,)
            gates.append(Gate(i, vec, tuple(wire[v] for v in vec), next_wire))
            new_wire[i] = next_wire
            next_wire += 1
        levels.append(tuple(gates))
        wire = new_wire
    return PrefixPlan(k, n_branch, tuple(levels), tuple(wire))


def evaluate_plan(plan: PrefixPlan, bits: list[int]) -> list[int]:
    """Run the plan on plaintext bits, reading each level's inputs from the
    previous level only."""
    if len(bits) != plan.k:
        raise InvalidArgument("bit count does not match the plan")
    cur = list(bits)
    for level in plan.levels:
        nxt = list(cur)
        for g in level:
            v = 1
            for p in g.inputs:
                v &= cur[p]
            nxt[g.position] = v
        cur = nxt
    return cur
