"""Batched plaintext evaluation: one circuit, many input assignments.

The exhaustive oracle sweeps evaluate the same circuit on thousands of
assignments.  With numba, rows are bit-sliced 64 to a machine word and a
JIT-compiled loop runs every gate over each word.  Setting
``OBLIVION_NO_NUMBA=1`` forces the pure-numpy path, which evaluates one gate
at a time across all rows.
"""

from __future__ import annotations

import os

import numpy as np

from oblivion.circuit.core import AND, CONST0, CONST1, NOT, XOR, Circuit
from oblivion.errors import ArityMismatch

_KIND_CODE = {XOR: 0, AND: 1, NOT: 2, CONST0: 3, CONST1: 4}

try:
    if os.environ.get("OBLIVION_NO_NUMBA", "").strip() not in ("", "0"):
        raise ImportError("numba disabled by OBLIVION_NO_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False


def encode(c: Circuit) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flatten a circuit to ``(kinds, operands, outputs)`` integer arrays."""
    kinds = np.array([_KIND_CODE[g.kind] for g in c.gates], dtype=np.int8)
    ops = np.full((len(c.gates), 2), -1, dtype=np.int64)
    for k, g in enumerate(c.gates):
        ops[k, : len(g.operands)] = g.operands
    outs = np.array(c.outputs, dtype=np.int64)
    return kinds, ops, outs


def all_assignments(n: int) -> np.ndarray:
    """All ``2**n`` bit vectors, row ``r`` holding ``r`` little-endian."""
    rows = np.arange(1 << n, dtype=np.int64)
    return ((rows[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.uint8)


# word patterns of input i < 6 when 64 consecutive assignments share a word
_LOW_PATTERNS = np.array(
    [0xAAAAAAAAAAAAAAAA, 0xCCCCCCCCCCCCCCCC, 0xF0F0F0F0F0F0F0F0,
     0xFF00FF00FF00FF00, 0xFFFF0000FFFF0000, 0xFFFFFFFF00000000],
    dtype=np.uint64,
)


def _run_gates(kinds, ops, n_inputs, wires):
    full = np.uint64(0xFFFFFFFFFFFFFFFF)
    for k in range(kinds.shape[0]):
        kind = kinds[k]
        if kind == 0:
            v = wires[ops[k, 0]] ^ wires[ops[k, 1]]
        elif kind == 1:
            v = wires[ops[k, 0]] & wires[ops[k, 1]]
        elif kind == 2:
            v = wires[ops[k, 0]] ^ full
        elif kind == 3:
            v = np.uint64(0)
        else:
            v = full
        wires[n_inputs + k] = v


def _eval_sliced_py(kinds, ops, outs, n_inputs, x):
    # 64 rows share one machine word per wire; every gate is one word op
    m = x.shape[0]
    result = np.empty((m, outs.shape[0]), dtype=np.uint8)
    wires = np.empty(n_inputs + kinds.shape[0], dtype=np.uint64)
    one = np.uint64(1)
    for base in range(0, m, 64):
        top = min(64, m - base)
        for i in range(n_inputs):
            acc = np.uint64(0)
            for r in range(top):
                if x[base + r, i]:
                    acc |= one << np.uint64(r)
            wires[i] = acc
        _run_gates(kinds, ops, n_inputs, wires)
        for j in range(outs.shape[0]):
            v = wires[outs[j]]
            for r in range(top):
                result[base + r, j] = (v >> np.uint64(r)) & one
    return result


def _truth_table_py(kinds, ops, outs, n_inputs, patterns):
    n_words = max(1, (1 << n_inputs) >> 6)
    result = np.empty((outs.shape[0], n_words), dtype=np.uint64)
    wires = np.empty(n_inputs + kinds.shape[0], dtype=np.uint64)
    full = np.uint64(0xFFFFFFFFFFFFFFFF)
    for w in range(n_words):
        for i in range(n_inputs):
            if i < 6:
                wires[i] = patterns[i]
            elif (w >> (i - 6)) & 1:
                wires[i] = full
            else:
                wires[i] = np.uint64(0)
        _run_gates(kinds, ops, n_inputs, wires)
        for j in range(outs.shape[0]):
            result[j, w] = wires[outs[j]]
    return result


if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)
    _run_gates = _jit(_run_gates)
    _eval_sliced_jit = _jit(_eval_sliced_py)
    _truth_table_jit = _jit(_truth_table_py)
else:
    _eval_sliced_jit = _truth_table_jit = None


def _eval_numpy(kinds, ops, outs, n_inputs, x):
    m = x.shape[0]
    wires = np.empty((n_inputs + kinds.shape[0], m), dtype=np.uint8)
    wires[:n_inputs] = x.T
    for k in range(kinds.shape[0]):
        kind = kinds[k]
        w = n_inputs + k
        if kind == 0:
            np.bitwise_xor(wires[ops[k, 0]], wires[ops[k, 1]], out=wires[w])
        elif kind == 1:
            np.bitwise_and(wires[ops[k, 0]], wires[ops[k, 1]], out=wires[w])
        elif kind == 2:
            np.bitwise_xor(wires[ops[k, 0]], 1, out=wires[w])
        else:
            wires[w] = kind - 3
    return np.ascontiguousarray(wires[outs].T)


def eval_batch(c: Circuit, x: np.ndarray, engine: str | None = None) -> np.ndarray:
    """Evaluate ``c`` on every row of ``x`` (shape ``(m, num_inputs)``).

    ``engine`` is ``"numba"``, ``"numpy"`` or ``None`` (numba when available).
    """
    x = np.ascontiguousarray(x, dtype=np.uint8)
    if x.ndim != 2 or x.shape[1] != c.num_inputs:
        raise ArityMismatch(f"expected array of shape (m, {c.num_inputs}), got {x.shape}")
    if engine is None:
        engine = "numba" if HAVE_NUMBA else "numpy"
    kinds, ops, outs = encode(c)
    if engine == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba engine requested but numba is unavailable or disabled")
        return _eval_sliced_jit(kinds, ops, outs, c.num_inputs, x)
    if engine == "numpy":
        return _eval_numpy(kinds, ops, outs, c.num_inputs, x)
    raise ValueError(f"unknown engine {engine!r}")


def truth_table(c: Circuit, engine: str | None = None) -> np.ndarray:
    """Outputs on all ``2**num_inputs`` assignments, row order as :func:`all_assignments`."""
    if engine is None:
        engine = "numba" if HAVE_NUMBA else "numpy"
    if engine != "numba" or c.num_inputs > 40:
        return eval_batch(c, all_assignments(c.num_inputs), engine)
    if not HAVE_NUMBA:
        raise RuntimeError("numba engine requested but numba is unavailable or disabled")
    kinds, ops, outs = encode(c)
    packed = _truth_table_jit(kinds, ops, outs, c.num_inputs, _LOW_PATTERNS)
    m = 1 << c.num_inputs
    as_bytes = np.ascontiguousarray(packed.astype("<u8", copy=False)).view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :m]
    return np.ascontiguousarray(bits.T)
