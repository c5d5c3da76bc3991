"""Line-based netlist text format.

    OBLIVION-CIRCUIT v1 inputs=<n>
    g0 = XOR w0 w1
    g1 = NOT w2
    g2 = CONST1
    outputs = w3 w4

Gate ``k`` defines wire ``w{n+k}``.  Blank lines and ``#`` comments are
ignored by the parser.
"""

from __future__ import annotations

import re

from oblivion.circuit.core import GATE_ARITY, Circuit, Gate
from oblivion.errors import ParseError, TopologyError

HEADER = "OBLIVION-CIRCUIT v1"
_HEADER_RE = re.compile(r"^OBLIVION-CIRCUIT v1 inputs=(\d+)$")
_GATE_RE = re.compile(r"^g(\d+)\s*=\s*([A-Z0-9]+)((?:\s+w\d+)*)$")
_WIRE_RE = re.compile(r"^w(\d+)$")


def serialize(c: Circuit) -> str:
    lines = [f"{HEADER} inputs={c.num_inputs}"]
    for k, (kind, ops) in enumerate(c.gates):
        args = "".join(f" w{o}" for o in ops)
        lines.append(f"g{k} = {kind}{args}")
    lines.append("outputs =" + "".join(f" w{o}" for o in c.outputs))
    return "\n".join(lines) + "\n"


def _wires(tokens: list[str], lineno: int, source: str | None) -> list[int]:
    out = []
    for tok in tokens:
        m = _WIRE_RE.match(tok)
        if not m:
            raise ParseError(f"bad wire reference {tok!r}", lineno, source)
        out.append(int(m.group(1)))
    return out


def parse(text: str, source: str | None = None) -> Circuit:
    num_inputs = None
    gates: list[Gate] = []
    outputs = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if num_inputs is None:
            m = _HEADER_RE.match(line)
            if not m:
                raise ParseError(f"expected header '{HEADER} inputs=<n>'", lineno, source)
            num_inputs = int(m.group(1))
            continue
        if outputs is not None:
            raise ParseError("content after outputs line", lineno, source)
        if line.startswith("outputs"):
            head, _, rest = line.partition("=")
            if head.strip() != "outputs":
                raise ParseError("malformed outputs line", lineno, source)
            outputs = _wires(rest.split(), lineno, source)
            for w in outputs:
                if w >= num_inputs + len(gates):
                    raise TopologyError(f"line {lineno}: output w{w} is not defined")
            continue
        m = _GATE_RE.match(line)
        if not m:
            raise ParseError(f"cannot parse gate line {line!r}", lineno, source)
        k, kind = int(m.group(1)), m.group(2)
        if k != len(gates):
            raise ParseError(f"expected gate g{len(gates)}, found g{k}", lineno, source)
        if kind not in GATE_ARITY:
            raise ParseError(f"unknown gate kind {kind!r}", lineno, source)
        ops = _wires(m.group(3).split(), lineno, source)
        if len(ops) != GATE_ARITY[kind]:
            raise ParseError(f"{kind} takes {GATE_ARITY[kind]} operands, got {len(ops)}", lineno, source)
        defined = num_inputs + k
        for w in ops:
            if w >= defined:
                raise TopologyError(
                    f"line {lineno}: g{k} reads w{w}, which is defined later (or never)"
                )
        gates.append(Gate(kind, tuple(ops)))
    if num_inputs is None:
        raise ParseError("empty circuit file", None, source)
    if outputs is None:
        raise ParseError("missing outputs line", None, source)
    return Circuit(num_inputs, tuple(gates), tuple(outputs))
