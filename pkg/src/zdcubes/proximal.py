"""Directional proximality relations extracted from cube sets.

A pair (x, y) lies in the relation for direction j when some full cube
tuple z witnesses it in the shape

    z_0 = x,   z_{e_j} = y,   z_{(eta,0)_j} = z_{(eta,1)_j} for eta != 0,

where (eta,b)_j embeds a (d-1)-vertex by inserting bit b at slot j.  The
intersection over all directions, when it is an invariant equivalence,
produces the maximal factor with unique cube completion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .cube_engine import CubePoint, CubeSet, enumerate_Q, ucpp_check
from .errors import HypothesisError, InputError
from .finite_system import (FactorMap, FiniteZdSystem, PairRelation,
                            is_minimal, quotient)
from .hypercube import Vertex, embed_face


def template_positions(d: int, j: int) -> tuple[list[tuple[int, int]], int, int]:
    """Equal-coordinate position pairs plus the (x, y) positions for the
    direction-j template on a d-cube."""
    if not 1 <= j <= d:
        raise InputError(f"direction {j} out of range 1..{d}")
    pairs = []
    for eta in range(1, 1 << (d - 1)):
        w = Vertex(eta, d - 1)
        pairs.append((embed_face(j, 0, w).mask, embed_face(j, 1, w).mask))
    x_pos = 0
    y_pos = 1 << (j - 1)
    return pairs, x_pos, y_pos


def build_z(x: int, y: int, a_star: tuple[int, ...], j: int) -> CubePoint:
    """Assemble the template cube tuple from a completion a_star, which lists
    the shared values indexed like a based cube point over d-1 directions."""
    width = len(a_star) + 1
    d = 1
    while (1 << (d - 1)) < width:
        d += 1
    if 1 << (d - 1) != width:
        raise InputError(f"completion length {len(a_star)} is not 2^(d-1)-1")
    if not 1 <= j <= d:
        raise InputError(f"direction {j} out of range 1..{d}")
    z = [-1] * (1 << d)
    z[0] = x
    z[1 << (j - 1)] = y
    for eta in range(1, 1 << (d - 1)):
        w = Vertex(eta, d - 1)
        v = a_star[eta - 1]
        z[embed_face(j, 0, w).mask] = v
        z[embed_face(j, 1, w).mask] = v
    return tuple(z)


def _full_dirs(sys: FiniteZdSystem) -> tuple[int, ...]:
    return tuple(range(1, sys.d + 1))


def _require_full_Q(sys: FiniteZdSystem, Q: CubeSet | None, threads: int) -> CubeSet:
    if Q is None:
        return enumerate_Q(sys, _full_dirs(sys), threads=threads)
    if Q.based or Q.dirs != _full_dirs(sys):
        raise InputError("need the full cube set over directions 1..d")
    return Q


def compute_R_j(sys: FiniteZdSystem, j: int, *, Q: CubeSet | None = None,
                threads: int = 1) -> PairRelation:
    """All pairs witnessed by a direction-j template inside the full cube set."""
    Q = _require_full_Q(sys, Q, threads)
    pairs, x_pos, y_pos = template_positions(sys.d, j)
    eq = np.array(pairs, dtype=np.int32).reshape(len(pairs), 2)
    hits = kernels.template_scan(Q.to_array(), eq, x_pos, y_pos)
    found = frozenset(map(tuple, hits.tolist()))
    return PairRelation(sys.n_points, found, sys)


def compute_R(sys: FiniteZdSystem, *, Q: CubeSet | None = None,
              threads: int = 1) -> PairRelation:
    """Intersection of the per-direction relations."""
    Q = _require_full_Q(sys, Q, threads)
    pairs: frozenset[tuple[int, int]] | None = None
    for j in range(1, sys.d + 1):
        rel = compute_R_j(sys, j, Q=Q, threads=threads)
        pairs = rel.pairs if pairs is None else pairs & rel.pairs
    return PairRelation(sys.n_points, pairs, sys)


def compute_R_j_reordered(sys: FiniteZdSystem, j: int, *, threads: int = 1
                          ) -> PairRelation:
    """Same relation extracted from the cube set listing direction j first;
    a cross-check that the template does not depend on direction order."""
    dirs = (j,) + tuple(i for i in range(1, sys.d + 1) if i != j)
    Q = enumerate_Q(sys, dirs, threads=threads)
    pairs, x_pos, y_pos = template_positions(sys.d, 1)
    eq = np.array(pairs, dtype=np.int32).reshape(len(pairs), 2)
    hits = kernels.template_scan(Q.to_array(), eq, x_pos, y_pos)
    return PairRelation(sys.n_points, frozenset(map(tuple, hits.tolist())), sys)


def sections(Q: CubeSet) -> dict[int, frozenset[tuple[int, ...]]]:
    """Group the full cube set by its vertex-0 coordinate; the value sets are
    the possible completions over each base point."""
    if Q.based:
        raise InputError("sections need a full cube set")
    acc: dict[int, set[tuple[int, ...]]] = {}
    for p in Q.points:
        acc.setdefault(p[0], set()).add(p[1:])
    return {x: frozenset(v) for x, v in acc.items()}


@dataclass(frozen=True)
class FiveWayResult:
    """Five formulations of membership for one pair, which agree on minimal
    systems: (1) in every direction relation, (2) the constant-y completion
    is a cube, (3) the pair shares a completion, (4) the pair has identical
    completion sets, (5) in some direction relation."""

    x: int
    y: int
    conds: tuple[bool, bool, bool, bool, bool]
    minimal: bool

    @property
    def hypotheses_met(self) -> bool:
        return self.minimal

    @property
    def all_agree(self) -> bool:
        return len(set(self.conds)) == 1


def characterize(sys: FiniteZdSystem, x: int, y: int, *, Q: CubeSet | None = None,
                 threads: int = 1) -> FiveWayResult:
    Q = _require_full_Q(sys, Q, threads)
    for v in (x, y):
        if not 0 <= v < sys.n_points:
            raise InputError(f"point id {v} out of range")
    rels = [compute_R_j(sys, j, Q=Q, threads=threads) for j in range(1, sys.d + 1)]
    cond1 = all((x, y) in r for r in rels)
    cond2 = ((x,) + (y,) * (Q.width - 1)) in Q
    sec = sections(Q)
    sx, sy = sec.get(x, frozenset()), sec.get(y, frozenset())
    cond3 = bool(sx & sy)
    cond4 = sx == sy
    cond5 = any((x, y) in r for r in rels)
    return FiveWayResult(x=x, y=y, conds=(cond1, cond2, cond3, cond4, cond5),
                         minimal=is_minimal(sys).ok)


def constant_tail_symmetry(sys: FiniteZdSystem, *, Q: CubeSet | None = None,
                           threads: int = 1) -> tuple[bool, tuple[int, int] | None]:
    """(x, y..y) is a cube tuple exactly when (y, x..x) is."""
    Q = _require_full_Q(sys, Q, threads)
    w = Q.width
    for x in range(sys.n_points):
        for y in range(sys.n_points):
            if (((x,) + (y,) * (w - 1)) in Q) != (((y,) + (x,) * (w - 1)) in Q):
                return False, (x, y)
    return True, None


@dataclass(frozen=True)
class EquivalenceReport:
    ok: bool
    reflexive: bool
    refl_witness: int | None
    symmetric: bool
    sym_witness: tuple[int, int] | None
    transitive: bool
    trans_witness: tuple[int, int, int] | None
    invariant: bool
    inv_witness: tuple[tuple[int, int], int] | None


def check_equivalence(rel: PairRelation) -> EquivalenceReport:
    """Reflexive, symmetric, transitive, and generator-invariant."""
    refl, rw = rel.is_reflexive()
    sym, sw = rel.is_symmetric()
    trans, tw = rel.is_transitive()
    inv, iw = rel.is_invariant()
    return EquivalenceReport(ok=refl and sym and trans and inv,
                             reflexive=refl, refl_witness=rw,
                             symmetric=sym, sym_witness=sw,
                             transitive=trans, trans_witness=tw,
                             invariant=inv, inv_witness=iw)


@dataclass(frozen=True)
class ProximalReport:
    relation_sizes: tuple[int, ...]
    intersection_size: int
    equivalence: EquivalenceReport
    is_diagonal: bool
    minimal: bool


def proximal_report(sys: FiniteZdSystem, *, threads: int = 1) -> ProximalReport:
    Q = enumerate_Q(sys, _full_dirs(sys), threads=threads)
    rels = [compute_R_j(sys, j, Q=Q, threads=threads) for j in range(1, sys.d + 1)]
    R = PairRelation(sys.n_points,
                     frozenset.intersection(*(r.pairs for r in rels)), sys)
    return ProximalReport(
        relation_sizes=tuple(len(r) for r in rels),
        intersection_size=len(R),
        equivalence=check_equivalence(R),
        is_diagonal=R.is_diagonal(),
        minimal=is_minimal(sys).ok,
    )


@dataclass(frozen=True)
class PushforwardReport:
    equal: bool
    easy_inclusion: bool
    missing: tuple[int, int] | None  # target pair with no source pair above it
    escaped: tuple[int, int] | None  # image pair outside the target relation
    source_minimal: bool
    source_size: int
    target_size: int


def pushforward_check(pi: FactorMap, *, threads: int = 1) -> PushforwardReport:
    """Does the source relation push forward exactly onto the target relation?
    The forward inclusion holds for any factor map; equality needs minimality."""
    R_src = compute_R(pi.source, threads=threads)
    R_tgt = compute_R(pi.target, threads=threads)
    image = frozenset((pi(x), pi(y)) for x, y in R_src.pairs)
    escaped = None
    for p in sorted(image - R_tgt.pairs):
        escaped = p
        break
    missing = None
    for p in sorted(R_tgt.pairs - image):
        missing = p
        break
    return PushforwardReport(
        equal=escaped is None and missing is None,
        easy_inclusion=escaped is None,
        missing=missing,
        escaped=escaped,
        source_minimal=is_minimal(pi.source).ok,
        source_size=len(R_src),
        target_size=len(R_tgt),
    )


def maximal_ucpp_factor(sys: FiniteZdSystem, *, threads: int = 1
                        ) -> tuple[FiniteZdSystem, FactorMap]:
    """Quotient by the intersection relation and verify the result has unique
    cube completion with a trivial intersection relation of its own."""
    R = compute_R(sys, threads=threads)
    eq = check_equivalence(R)
    if not eq.ok:
        raise HypothesisError(
            "the intersection relation is not an invariant equivalence here, "
            "so the quotient is undefined (expected only on non-minimal input)")
    q_sys, pi = quotient(sys, R)
    Qq = enumerate_Q(q_sys, _full_dirs(q_sys), threads=threads)
    res = ucpp_check(Qq)
    if not res.ok:
        raise AssertionError(
            f"quotient failed unique completion at {res.pair}; this is a bug")
    Rq = compute_R(q_sys, Q=Qq, threads=threads)
    if not Rq.is_diagonal():
        raise AssertionError(
            "quotient has a non-trivial intersection relation; this is a bug")
    return q_sys, pi
