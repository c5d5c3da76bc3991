"""Standard circuits used as user functions and as policy building blocks."""

from __future__ import annotations

from oblivion.circuit.core import Circuit, CircuitBuilder
from oblivion.errors import ArityMismatch


def _positive(width: int) -> None:
    if width < 1:
        raise ValueError(f"width must be positive, got {width}")


def build_identity(n: int = 1) -> Circuit:
    return Circuit(n, (), tuple(range(n)))


def build_xor() -> Circuit:
    b = CircuitBuilder(2)
    return b.build([b.xor(0, 1)])


def build_equality(width: int) -> Circuit:
    """Inputs ``a[0..w) ++ b[0..w)``; single output, 1 iff ``a == b``."""
    _positive(width)
    b = CircuitBuilder(2 * width)
    return b.build([b.equal(range(width), range(width, 2 * width))])


def build_mux(width: int) -> Circuit:
    """Inputs ``s ++ a ++ b``; outputs ``a`` when ``s == 1`` else ``b``."""
    _positive(width)
    bld = CircuitBuilder(1 + 2 * width)
    s = 0
    ns = bld.not_(s)
    outs = []
    for i in range(width):
        a, b = 1 + i, 1 + width + i
        outs.append(bld.xor(bld.and_(s, a), bld.and_(ns, b)))
    return bld.build(outs)


def build_adder(width: int) -> Circuit:
    """Ripple-carry adder: inputs ``a ++ b``, ``width + 1`` output bits."""
    _positive(width)
    bld = CircuitBuilder(2 * width)
    outs = []
    carry = None
    for i in range(width):
        a, b = i, width + i
        t = bld.xor(a, b)
        if carry is None:
            outs.append(t)
            carry = bld.and_(a, b)
        else:
            outs.append(bld.xor(t, carry))
            carry = bld.xor(bld.and_(a, b), bld.and_(carry, t))
    outs.append(carry)
    return bld.build(outs)


def build_and_tree(n: int) -> Circuit:
    b = CircuitBuilder(n)
    return b.build([b.and_tree(b.inputs)])


def build_or_tree(n: int) -> Circuit:
    b = CircuitBuilder(n)
    return b.build([b.or_tree(b.inputs)])


def build_mask(width: int) -> Circuit:
    """Bitwise XOR of two ``width``-bit operands (AND-free)."""
    _positive(width)
    b = CircuitBuilder(2 * width)
    return b.build([b.xor(i, width + i) for i in range(width)])


def compose(c1: Circuit, c2: Circuit) -> Circuit:
    """Feed the outputs of ``c1`` into the inputs of ``c2``."""
    if len(c1.outputs) != c2.num_inputs:
        raise ArityMismatch(
            f"cannot compose: first circuit has {len(c1.outputs)} outputs, "
            f"second expects {c2.num_inputs} inputs"
        )
    b = CircuitBuilder(c1.num_inputs)
    mid = b.embed(c1, b.inputs)
    return b.build(b.embed(c2, mid))


def parallel(c1: Circuit, c2: Circuit) -> Circuit:
    """Side-by-side circuit: inputs and outputs of ``c1`` then ``c2``."""
    b = CircuitBuilder(c1.num_inputs + c2.num_inputs)
    o1 = b.embed(c1, list(range(c1.num_inputs)))
    o2 = b.embed(c2, list(range(c1.num_inputs, b.num_inputs)))
    return b.build(o1 + o2)


BUILDERS = {
    "identity": build_identity,
    "xor": lambda width=1: build_xor(),
    "equality": build_equality,
    "mux": build_mux,
    "adder": build_adder,
    "and_tree": build_and_tree,
    "or_tree": build_or_tree,
    "mask": build_mask,
}


def build_named(name: str, width: int = 1) -> Circuit:
    try:
        fn = BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown circuit builder {name!r}; choose from {sorted(BUILDERS)}") from None
    return fn(width)
