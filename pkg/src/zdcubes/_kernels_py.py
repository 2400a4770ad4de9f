"""Pure-Python reference kernels.

Both backends consume the same pre-packed arrays (see kernels.py):

  pow_stack : int32[total_rows, n]   power tables of every direction, stacked
  offsets   : int32[k]               row where direction i's table starts
  combos    : int32[R, k]            exponent vectors in row-major order
  bases     : int32[B]               base points to expand

enumerate_blocks returns an int32[B*R, 2^k] array whose row (b*R + r) is the
cube tuple of base bases[b] with exponents combos[r], columns in canonical
vertex order (direction 1 varies fastest).  template_scan extracts pairs
(row[x_pos], row[y_pos]) from rows whose listed coordinate pairs agree.
"""

from __future__ import annotations

import numpy as np


def enumerate_blocks(pow_stack, offsets, combos, bases):
    n_combos, k = combos.shape
    width = 1 << k
    out = np.empty((len(bases) * n_combos, width), dtype=np.int32)
    stack = pow_stack.tolist()
    combo_rows = combos.tolist()
    offs = offsets.tolist()
    row = 0
    buf = [0] * width
    for x in bases.tolist():
        for combo in combo_rows:
            buf[0] = x
            size = 1
            for i in range(k):
                table = stack[offs[i] + combo[i]]
                for t in range(size):
                    buf[size + t] = table[buf[t]]
                size <<= 1
            out[row] = buf
            row += 1
    return out


def template_scan(points, eq_pairs, x_pos, y_pos):
    """Rows of `points` where every (a,b) in eq_pairs has row[a] == row[b];
    returns int32[m, 2] of (row[x_pos], row[y_pos]), unsorted, with repeats."""
    pairs = [tuple(p) for p in eq_pairs.tolist()]
    found = []
    for row in points.tolist():
        if all(row[a] == row[b] for a, b in pairs):
            found.append((row[x_pos], row[y_pos]))
    return np.array(found, dtype=np.int32).reshape(len(found), 2)
