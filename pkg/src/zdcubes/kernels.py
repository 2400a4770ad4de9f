"""Kernel dispatch: compiled extension when available, pure Python otherwise.

The two implementations are drop-in equivalents operating on identical
pre-packed arrays, so enumeration output is bitwise independent of the
backend.  BACKEND names the one selected at import time; benchmarks and the
parity tests import both modules explicitly.
"""

from __future__ import annotations

import numpy as np

from . import _kernels_py

try:  # pragma: no cover - exercised only when the extension is built
    from . import _kernels_c

    _impl = _kernels_c
    BACKEND = "c"
except ImportError:  # pragma: no cover
    _impl = _kernels_py
    BACKEND = "python"


def backend_name() -> str:
    return BACKEND


def pack_tables(pow_tables: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Stack per-direction power tables [(L_i, n) int32 arrays] into one
    contiguous array plus start offsets."""
    offsets = np.zeros(len(pow_tables), dtype=np.int32)
    total = 0
    for i, tbl in enumerate(pow_tables):
        offsets[i] = total
        total += tbl.shape[0]
    stack = np.ascontiguousarray(np.vstack(pow_tables), dtype=np.int32)
    return stack, offsets


def exponent_combos(limits: list[int]) -> np.ndarray:
    """All exponent vectors over prod([0, L_i)) in itertools.product order
    (the last listed direction varies fastest)."""
    grids = np.meshgrid(*[np.arange(L, dtype=np.int32) for L in limits], indexing="ij")
    return np.ascontiguousarray(
        np.stack([g.ravel() for g in grids], axis=1), dtype=np.int32
    )


def enumerate_blocks(pow_stack, offsets, combos, bases) -> np.ndarray:
    return _impl.enumerate_blocks(
        np.ascontiguousarray(pow_stack, dtype=np.int32),
        np.ascontiguousarray(offsets, dtype=np.int32),
        np.ascontiguousarray(combos, dtype=np.int32),
        np.ascontiguousarray(bases, dtype=np.int32),
    )


def template_scan(points, eq_pairs, x_pos: int, y_pos: int) -> np.ndarray:
    return _impl.template_scan(
        np.ascontiguousarray(points, dtype=np.int32),
        np.ascontiguousarray(eq_pairs, dtype=np.int32).reshape(-1, 2),
        x_pos,
        y_pos,
    )
