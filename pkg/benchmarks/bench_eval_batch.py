"""Compare the numba and numpy batched circuit evaluators.

Usage: python3 benchmarks/bench_eval_batch.py [--repeat N]

Both engines are checked against each other before timing.  The numba
engine is skipped when numba is unavailable or OBLIVION_NO_NUMBA is set.
"""

import argparse
import random
import time

import numpy as np

from oblivion.abac import SchemaEntry, compile_canaccess
from oblivion.circuit import all_assignments, build_adder, build_equality, eval_batch
from oblivion.circuit.kernels import HAVE_NUMBA, truth_table


def cases():
    schema = (SchemaEntry("subject.id", 4, "subject"), SchemaEntry("subject.role", 2, "subject"))
    yield "equality(8)", build_equality(8), all_assignments(16)
    yield "adder(8)", build_adder(8), all_assignments(16)
    ca = compile_canaccess(schema, 2, 2)
    rng = np.random.default_rng(0)
    yield "canAccess(2 rules)", ca, rng.integers(0, 2, size=(1 << 16, ca.num_inputs), dtype=np.uint8)


def bench(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    random.seed(0)
    engines = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'case':<22}{'rows':>8}" + "".join(f"{e + ' ms':>12}" for e in engines))
    for name, circ, x in cases():
        ref = eval_batch(circ, x, engine="numpy")
        row = f"{name:<22}{x.shape[0]:>8}"
        for e in engines:
            got = eval_batch(circ, x, engine=e)  # also warms the JIT
            assert np.array_equal(got, ref), f"{e} disagrees with numpy on {name}"
            row += f"{bench(lambda: eval_batch(circ, x, engine=e), args.repeat) * 1e3:>12.2f}"
        print(row)
    print()
    print(f"{'exhaustive sweep':<22}{'rows':>8}" + "".join(f"{e + ' ms':>12}" for e in engines))
    for name, circ in (("equality(9)", build_equality(9)), ("adder(9)", build_adder(9))):
        ref = truth_table(circ, engine="numpy")
        row = f"{name:<22}{ref.shape[0]:>8}"
        for e in engines:
            assert np.array_equal(truth_table(circ, engine=e), ref)
            row += f"{bench(lambda: truth_table(circ, engine=e), args.repeat) * 1e3:>12.2f}"
        print(row)


if __name__ == "__main__":
    main()
