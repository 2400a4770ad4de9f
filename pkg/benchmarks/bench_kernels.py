"""Compare the compiled enumeration kernels against the pure Python fallback.

Builds a d=3 rotation on Z/32 (full cube rows: 32 * 32^3 = 1,048,576 before
dedup) plus a template scan over the deduplicated set, times both backends
on identical packed inputs, and checks the outputs are bitwise equal.

Run:  python3 benchmarks/bench_kernels.py [repeats]
"""

import sys
import time

import numpy as np

from zdcubes import kernels
from zdcubes._kernels_py import enumerate_blocks as py_enumerate
from zdcubes._kernels_py import template_scan as py_scan
from zdcubes.cube_engine import _pow_tables
from zdcubes.finite_system import FiniteZdSystem
from zdcubes.proximal import template_positions

try:
    from zdcubes._kernels_c import enumerate_blocks as c_enumerate
    from zdcubes._kernels_c import template_scan as c_scan
except ImportError:
    c_enumerate = c_scan = None


def build_inputs():
    n = 32
    rot = tuple((i + 1) % n for i in range(n))
    sys_ = FiniteZdSystem(n, 3, (rot, rot, rot), name="rot32_d3")
    tables, limits = _pow_tables(sys_, (1, 2, 3))
    stack, offsets = kernels.pack_tables(tables)
    combos = kernels.exponent_combos(limits)
    bases = np.arange(n, dtype=np.int32)
    return sys_, stack, offsets, combos, bases


def timed(fn, *args, repeats=3):
    best = None
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return out, best


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    sys_, stack, offsets, combos, bases = build_inputs()
    total = len(bases) * len(combos)
    print(f"system {sys_.name}: {total} raw rows of width {1 << 3}")

    rows_py, t_py = timed(py_enumerate, stack, offsets, combos, bases,
                          repeats=repeats)
    print(f"enumerate  python  {t_py * 1e3:9.1f} ms")
    if c_enumerate is not None:
        rows_c, t_c = timed(c_enumerate, stack, offsets,
                            np.ascontiguousarray(combos), bases,
                            repeats=repeats)
        assert np.array_equal(rows_py, rows_c), "backends disagree"
        print(f"enumerate  c       {t_c * 1e3:9.1f} ms   ({t_py / t_c:5.1f}x)")
    else:
        print("enumerate  c       unavailable")

    uniq = np.unique(rows_py, axis=0)
    pairs, x_pos, y_pos = template_positions(3, 2)
    eq = np.array(pairs, dtype=np.int32)
    print(f"scan over {len(uniq)} deduplicated rows, {len(eq)} equality pairs")

    hits_py, t_py = timed(py_scan, uniq, eq, x_pos, y_pos, repeats=repeats)
    print(f"scan       python  {t_py * 1e3:9.1f} ms")
    if c_scan is not None:
        hits_c, t_c = timed(c_scan, np.ascontiguousarray(uniq), eq,
                            x_pos, y_pos, repeats=repeats)
        assert np.array_equal(hits_py, hits_c), "backends disagree"
        print(f"scan       c       {t_c * 1e3:9.1f} ms   ({t_py / t_c:5.1f}x)")
    else:
        print("scan       c       unavailable")

    print(f"active backend at import: {kernels.backend_name()}")


if __name__ == "__main__":
    main()
