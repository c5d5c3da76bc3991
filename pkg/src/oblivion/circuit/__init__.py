from oblivion.circuit.builders import (
    BUILDERS,
    build_adder,
    build_and_tree,
    build_equality,
    build_identity,
    build_mask,
    build_mux,
    build_named,
    build_or_tree,
    build_xor,
    compose,
    parallel,
)
from oblivion.circuit.core import (
    AND,
    CONST0,
    CONST1,
    NOT,
    XOR,
    Circuit,
    CircuitBuilder,
    Gate,
    eval_plain,
    mult_depth,
    wire_depths,
)
from oblivion.circuit.kernels import all_assignments, eval_batch, truth_table
from oblivion.circuit.netlist import parse, serialize

__all__ = [
    "AND", "CONST0", "CONST1", "NOT", "XOR",
    "BUILDERS", "Circuit", "CircuitBuilder", "Gate",
    "all_assignments", "build_adder", "build_and_tree", "build_equality",
    "build_identity", "build_mask", "build_mux", "build_named", "build_or_tree",
    "build_xor", "compose", "eval_batch", "eval_plain", "mult_depth", "parallel",
    "parse", "serialize", "truth_table", "wire_depths",
]
