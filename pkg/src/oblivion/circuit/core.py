"""Boolean circuits over the gate basis {XOR, AND, NOT, CONST0, CONST1}.

Wires ``0..num_inputs-1`` are the circuit inputs; gate ``k`` drives wire
``num_inputs + k``.  Gates may only read wires defined before them, so a
circuit is always in topological order and evaluates in a single pass.
Multi-bit integers are little-endian everywhere.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from oblivion.errors import ArityMismatch, InvalidBit, TopologyError

XOR = "XOR"
AND = "AND"
NOT = "NOT"
CONST0 = "CONST0"
CONST1 = "CONST1"

GATE_ARITY = {XOR: 2, AND: 2, NOT: 1, CONST0: 0, CONST1: 0}


class Gate(NamedTuple):
    kind: str
    operands: tuple[int, ...] = ()


@dataclass(frozen=True)
class Circuit:
    num_inputs: int
    gates: tuple[Gate, ...]
    outputs: tuple[int, ...]

    def __post_init__(self):
        if self.num_inputs < 0:
            raise TopologyError("num_inputs must be non-negative")
        # normalise containers so structural equality is tuple-based
        object.__setattr__(self, "gates", tuple(Gate(g[0], tuple(g[1])) for g in self.gates))
        object.__setattr__(self, "outputs", tuple(int(o) for o in self.outputs))
        for k, gate in enumerate(self.gates):
            if gate.kind not in GATE_ARITY:
                raise TopologyError(f"gate {k}: unknown kind {gate.kind!r}")
            if len(gate.operands) != GATE_ARITY[gate.kind]:
                raise TopologyError(
                    f"gate {k}: {gate.kind} takes {GATE_ARITY[gate.kind]} operands, "
                    f"got {len(gate.operands)}"
                )
            limit = self.num_inputs + k
            for w in gate.operands:
                if not 0 <= w < limit:
                    raise TopologyError(
                        f"gate {k} reads wire w{w}, which is not defined before it"
                    )
        for w in self.outputs:
            if not 0 <= w < self.num_wires:
                raise TopologyError(f"output references undefined wire w{w}")

    @property
    def num_wires(self) -> int:
        return self.num_inputs + len(self.gates)

    @property
    def num_outputs(self) -> int:
        return len(self.outputs)

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)


def _check_bits(bits: Sequence[int], expected: int) -> list[int]:
    if len(bits) != expected:
        raise ArityMismatch(f"circuit expects {expected} input bits, got {len(bits)}")
    out = []
    for b in bits:
        if b not in (0, 1):
            raise InvalidBit(f"input value {b!r} is not a bit")
        out.append(int(b))
    return out


def eval_plain(c: Circuit, inputs: Sequence[int]) -> list[int]:
    """Evaluate ``c`` gate by gate on plaintext bits."""
    wires = _check_bits(inputs, c.num_inputs)
    for kind, ops in c.gates:
        if kind == XOR:
            wires.append(wires[ops[0]] ^ wires[ops[1]])
        elif kind == AND:
            wires.append(wires[ops[0]] & wires[ops[1]])
        elif kind == NOT:
            wires.append(wires[ops[0]] ^ 1)
        elif kind == CONST0:
            wires.append(0)
        else:
            wires.append(1)
    return [wires[o] for o in c.outputs]


def wire_depths(c: Circuit) -> list[int]:
    depth = [0] * c.num_inputs
    for kind, ops in c.gates:
        d = max((depth[o] for o in ops), default=0)
        depth.append(d + 1 if kind == AND else d)
    return depth


def mult_depth(c: Circuit) -> int:
    """Largest number of AND gates on any path from an input to an output."""
    depth = wire_depths(c)
    return max((depth[o] for o in c.outputs), default=0)


class CircuitBuilder:
    """Incremental construction helper with per-wire depth tracking.

    ``and_tree``/``or_tree`` combine the shallowest operands first, which keeps
    the multiplicative depth of unbalanced operand lists as low as possible.
    """

    def __init__(self, num_inputs: int):
        self.num_inputs = num_inputs
        self.gates: list[Gate] = []
        self.depth: list[int] = [0] * num_inputs
        self._consts: dict[int, int] = {}

    @property
    def inputs(self) -> list[int]:
        return list(range(self.num_inputs))

    def _emit(self, kind: str, *ops: int) -> int:
        self.gates.append(Gate(kind, tuple(ops)))
        d = max((self.depth[o] for o in ops), default=0)
        self.depth.append(d + 1 if kind == AND else d)
        return self.num_inputs + len(self.gates) - 1

    def xor(self, a: int, b: int) -> int:
        return self._emit(XOR, a, b)

    def and_(self, a: int, b: int) -> int:
        return self._emit(AND, a, b)

    def not_(self, a: int) -> int:
        return self._emit(NOT, a)

    def const(self, bit: int) -> int:
        if bit not in self._consts:
            self._consts[bit] = self._emit(CONST1 if bit else CONST0)
        return self._consts[bit]

    def xnor(self, a: int, b: int) -> int:
        return self.not_(self.xor(a, b))

    def or_(self, a: int, b: int) -> int:
        # a OR b == (a XOR b) XOR (a AND b)
        return self.xor(self.xor(a, b), self.and_(a, b))

    def _tree(self, wires: Iterable[int], combine, empty: int) -> int:
        heap = [(self.depth[w], i, w) for i, w in enumerate(wires)]
        if not heap:
            return self.const(empty)
        heapq.heapify(heap)
        seq = len(heap)
        while len(heap) > 1:
            _, _, a = heapq.heappop(heap)
            _, _, b = heapq.heappop(heap)
            w = combine(a, b)
            heapq.heappush(heap, (self.depth[w], seq, w))
            seq += 1
        return heap[0][2]

    def and_tree(self, wires: Iterable[int]) -> int:
        return self._tree(wires, self.and_, 1)

    def or_tree(self, wires: Iterable[int]) -> int:
        return self._tree(wires, self.or_, 0)

    def equal(self, a: Sequence[int], b: Sequence[int]) -> int:
        if len(a) != len(b):
            raise ArityMismatch("equality operands differ in width")
        return self.and_tree([self.xnor(x, y) for x, y in zip(a, b)])

    def embed(self, c: Circuit, inputs: Sequence[int]) -> list[int]:
        """Inline ``c`` reading its inputs from ``inputs``; returns its output wires."""
        if len(inputs) != c.num_inputs:
            raise ArityMismatch(f"embedded circuit expects {c.num_inputs} inputs, got {len(inputs)}")
        remap = list(inputs)
        for kind, ops in c.gates:
            remap.append(self._emit(kind, *(remap[o] for o in ops)))
        return [remap[o] for o in c.outputs]

    def build(self, outputs: Sequence[int]) -> Circuit:
        return Circuit(self.num_inputs, tuple(self.gates), tuple(outputs))
