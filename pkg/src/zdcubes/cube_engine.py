"""Directional cube sets of a finite Z^d-system and surgery on cube points.

For directions (j_1..j_k) the cube set Q collects all tuples

    ( T_{j_1}^{n_1 eps_1} ... T_{j_k}^{n_k eps_k} x )_{eps in {0,1}^k}

with x a point and 0 <= n_i < order(T_{j_i}); coordinates sit in canonical
vertex order (hypercube.py).  K^{x0} is the restriction to base point x0
with the eps = 0 coordinate dropped, so its tuples have width 2^k - 1 and
position p corresponds to vertex mask p.

Enumeration runs through the kernel backend in base-point chunks; the chunk
split, a final sort and dedup make the result independent of thread count
and backend.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InputError
from .finite_system import FiniteZdSystem, perm_order, perm_pow
from .hypercube import MAX_DIM, FaceSelector, Vertex, digit_permute

CubePoint = tuple[int, ...]

MAX_ENUM_ROWS = 5_000_000


def _cube_dim(width: int) -> tuple[int, bool]:
    """(k, based) from a tuple width of 2^k or 2^k - 1 (k >= 1)."""
    for k in range(1, MAX_DIM + 1):
        if width == 1 << k:
            return k, False
        if width == (1 << k) - 1:
            return k, True
    raise InputError(f"width {width} is not 2^k or 2^k-1 for any supported k")


@dataclass(frozen=True)
class CubeSet:
    """An immutable, sorted collection of equal-width cube tuples.

    based=True marks a base-point restriction (width 2^k - 1, vertex 0
    dropped).  base keeps the originating system when known; raw sets parsed
    from text have base=None.
    """

    dirs: tuple[int, ...]
    points: tuple[CubePoint, ...]
    based: bool = False
    base: FiniteZdSystem | None = None

    def __post_init__(self) -> None:
        k = len(self.dirs)
        if not 1 <= k <= MAX_DIM:
            raise InputError(f"need 1..{MAX_DIM} directions, got {k}")
        if len(set(self.dirs)) != k:
            raise InputError(f"directions must be distinct, got {self.dirs}")
        width = (1 << k) - 1 if self.based else 1 << k
        pts = tuple(sorted(set(tuple(p) for p in self.points)))
        for p in pts:
            if len(p) != width:
                raise InputError(f"cube tuple width {len(p)}, expected {width}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_member_set", frozenset(pts))

    @property
    def k(self) -> int:
        return len(self.dirs)

    @property
    def width(self) -> int:
        return (1 << self.k) - 1 if self.based else 1 << self.k

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p) -> bool:
        return tuple(p) in self._member_set

    def to_array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.int32).reshape(len(self.points), self.width)

    def to_text(self) -> str:
        lines = [f"cube-set d={self.k} dirs={','.join(str(j) for j in self.dirs)}"]
        lines.extend(",".join(str(v) for v in p) for p in self.points)
        return "\n".join(lines) + "\n"

    def text_sha256(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    @classmethod
    def from_text(cls, text: str, path: str | None = None) -> "CubeSet":
        rows: list[tuple[int, str]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                rows.append((lineno, line))
        if not rows or not rows[0][1].startswith("cube-set"):
            raise InputError("expected 'cube-set d=<k> dirs=<...>' header",
                             path=path, line=rows[0][0] if rows else 1)
        header_line, header = rows[0]
        fields = dict(tok.split("=", 1) for tok in header.split()[1:] if "=" in tok)
        try:
            k = int(fields["d"])
            dirs = tuple(int(t) for t in fields["dirs"].split(","))
        except (KeyError, ValueError):
            raise InputError("malformed cube-set header", path=path, line=header_line)
        if len(dirs) != k:
            raise InputError(f"header says d={k} but lists {len(dirs)} dirs",
                             path=path, line=header_line)
        points = []
        width = None
        for lineno, line in rows[1:]:
            try:
                p = tuple(int(t) for t in line.split(","))
            except ValueError:
                raise InputError(f"non-integer coordinate in {line!r}", path=path, line=lineno)
            if width is None:
                width = len(p)
                if width not in (1 << k, (1 << k) - 1):
                    raise InputError(
                        f"row width {width} matches neither 2^{k} nor 2^{k}-1",
                        path=path, line=lineno)
            elif len(p) != width:
                raise InputError(f"row width {len(p)} != {width}", path=path, line=lineno)
            points.append(p)
        based = width == (1 << k) - 1 if width is not None else False
        return cls(dirs=dirs, points=tuple(points), based=based)


def _pow_tables(sys: FiniteZdSystem, dirs: tuple[int, ...]) -> tuple[list, list[int]]:
    tables = []
    limits = []
    for j in dirs:
        if not 1 <= j <= sys.d:
            raise InputError(f"direction {j} out of range 1..{sys.d}")
        p = sys.perms[j - 1]
        L = perm_order(p)
        tables.append(
            np.array([perm_pow(p, e) for e in range(L)], dtype=np.int32)
        )
        limits.append(L)
    return tables, limits


def _enumerate_rows(sys: FiniteZdSystem, dirs: tuple[int, ...],
                    bases: np.ndarray, threads: int) -> np.ndarray:
    tables, limits = _pow_tables(sys, dirs)
    total = len(bases)
    for L in limits:
        total *= L
    if total > MAX_ENUM_ROWS:
        raise InputError(
            f"enumeration would produce {total} rows (limit {MAX_ENUM_ROWS}); "
            "restrict the directions or the system size")
    stack, offsets = kernels.pack_tables(tables)
    combos = kernels.exponent_combos(limits)
    if threads <= 1 or len(bases) < 2:
        return kernels.enumerate_blocks(stack, offsets, combos, bases)
    chunks = [c for c in np.array_split(bases, threads) if len(c)]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        blocks = list(pool.map(
            lambda c: kernels.enumerate_blocks(stack, offsets, combos, c), chunks))
    return np.vstack(blocks)


def _check_dirs(dirs: tuple[int, ...]) -> None:
    if not dirs:
        raise InputError("need at least one direction")
    if len(set(dirs)) != len(dirs):
        raise InputError(f"directions must be distinct, got {dirs}")


def enumerate_Q(sys: FiniteZdSystem, dirs: tuple[int, ...] | list[int],
                *, threads: int = 1) -> CubeSet:
    """The full directional cube set over every base point."""
    dirs = tuple(dirs)
    _check_dirs(dirs)
    rows = _enumerate_rows(sys, dirs, np.arange(sys.n_points, dtype=np.int32), threads)
    uniq = np.unique(rows, axis=0)
    return CubeSet(dirs=dirs, points=tuple(map(tuple, uniq.tolist())), base=sys)


def enumerate_K(sys: FiniteZdSystem, dirs: tuple[int, ...] | list[int], x0: int,
                *, threads: int = 1) -> CubeSet:
    """The base-point cube set K^{x0}: vertex 0 pinned to x0 and dropped."""
    dirs = tuple(dirs)
    _check_dirs(dirs)
    if not 0 <= x0 < sys.n_points:
        raise InputError(f"base point {x0} out of range")
    rows = _enumerate_rows(sys, dirs, np.array([x0], dtype=np.int32), threads)
    uniq = np.unique(rows[:, 1:], axis=0)
    return CubeSet(dirs=dirs, points=tuple(map(tuple, uniq.tolist())),
                   based=True, base=sys)


@dataclass(frozen=True)
class UcppResult:
    """Outcome of the unique-completion check: no two tuples may agree on
    all coordinates but one."""

    ok: bool
    pair: tuple[CubePoint, CubePoint] | None = None
    vertex: int | None = None  # position where the witness pair differs


def ucpp_check(cubes: CubeSet) -> UcppResult:
    width = cubes.width
    if width < 2:
        raise InputError("unique-completion needs tuples of width >= 2")
    for v in range(width):
        seen: dict[tuple, CubePoint] = {}
        for p in cubes.points:
            key = p[:v] + p[v + 1:]
            other = seen.get(key)
            if other is None:
                seen[key] = p
            elif other[v] != p[v]:
                return UcppResult(ok=False, pair=(other, p), vertex=v)
    return UcppResult(ok=True)


# ---------------------------------------------------------------------------
# surgery on cube points


def _point_dim(a: CubePoint) -> int:
    k, based = _cube_dim(len(a))
    if based:
        raise InputError("operation needs a full-width cube point")
    return k


def glue(a: CubePoint, b: CubePoint, j: int) -> CubePoint:
    """Concatenate along direction j; the upper j-face of a must equal the
    lower j-face of b."""
    a, b = tuple(a), tuple(b)
    k = _point_dim(a)
    if len(b) != len(a):
        raise InputError("cube points have different widths")
    if not 1 <= j <= k:
        raise InputError(f"direction {j} out of range 1..{k}")
    bit = 1 << (j - 1)
    for m in range(1 << k):
        if not m & bit and a[m | bit] != b[m]:
            raise InputError(
                f"faces do not match at vertex mask {m}: "
                f"upper({j}) of a is {a[m | bit]}, lower({j}) of b is {b[m]}")
    return tuple(a[m] if not m & bit else b[m] for m in range(1 << k))


def insert(a: CubePoint, b: CubePoint, j: int, side: str = "upper") -> CubePoint:
    """Replace one j-face of a copy of b.

    side names the face of the result taken from b; the opposite face is the
    reflected copy of a's same-side face, so side="lower" yields
    z_eps = b_eps when eps_j = 0 and z_eps = a_{reflect_j(eps)} otherwise.
    """
    a, b = tuple(a), tuple(b)
    k = _point_dim(a)
    if len(b) != len(a):
        raise InputError("cube points have different widths")
    if not 1 <= j <= k:
        raise InputError(f"direction {j} out of range 1..{k}")
    if side not in ("upper", "lower"):
        raise InputError(f"side must be 'upper' or 'lower', got {side!r}")
    bit = 1 << (j - 1)
    keep = bit if side == "upper" else 0
    out = []
    for m in range(1 << k):
        if (m & bit) == keep:
            out.append(b[m])
        else:
            out.append(a[m ^ bit])
    return tuple(out)


def duplicate(a: CubePoint, dirs_sub: tuple[int, ...],
              dirs_full: tuple[int, ...]) -> CubePoint:
    """Spread a cube point over dirs_sub across the cube over dirs_full:
    coordinate eps of the result reads a at the sub-vertex formed by the
    eps-bits sitting at the slots dirs_sub occupies inside dirs_full."""
    a = tuple(a)
    k = _point_dim(a)
    dirs_sub, dirs_full = tuple(dirs_sub), tuple(dirs_full)
    d = len(dirs_full)
    if len(dirs_sub) != k or len(set(dirs_sub)) != k:
        raise InputError(f"need {k} distinct sub-directions, got {dirs_sub}")
    if not 1 <= d <= MAX_DIM or len(set(dirs_full)) != d:
        raise InputError(f"bad full direction list {dirs_full}")
    try:
        slots = [dirs_full.index(j) for j in dirs_sub]
    except ValueError:
        missing = [j for j in dirs_sub if j not in dirs_full]
        raise InputError(f"sub-directions {missing} not among {dirs_full}")
    out = []
    for m in range(1 << d):
        sub = 0
        for ell, s in enumerate(slots):
            sub |= ((m >> s) & 1) << ell
        out.append(a[sub])
    return tuple(out)


def project(a: CubePoint, sel: FaceSelector) -> CubePoint:
    """Restrict to a face: keep the coordinates matching the pinned bits,
    reindexed canonically over the free directions in increasing order."""
    a = tuple(a)
    k = _point_dim(a)
    if sel.dim != k:
        raise InputError(f"selector dimension {sel.dim} != cube dimension {k}")
    free = sel.free
    if not free:
        raise InputError("selector pins every direction; nothing to project onto")
    out = []
    for w in range(1 << len(free)):
        m = 0
        for j, b in sel.pinned:
            m |= b << (j - 1)
        for ell, j in enumerate(free):
            m |= ((w >> ell) & 1) << (j - 1)
        out.append(a[m])
    return tuple(out)


def digit_permute_point(sigma: tuple[int, ...], a: CubePoint) -> CubePoint:
    """Relabel the cube axes of a point: coordinate eps of the result reads a
    at the vertex whose digit i is eps_{sigma(i)}.

    Sends the cube set over directions (j_1..j_k) onto the one over
    (j_{sigma^{-1}(1)}, .., j_{sigma^{-1}(k)}); with dirs = (sigma(1)..sigma(k))
    the image lands on (1..k).
    """
    a = tuple(a)
    k = _point_dim(a)
    return tuple(a[digit_permute(sigma, Vertex(m, k)).mask] for m in range(1 << k))


def reflect_point(j: int, a: CubePoint) -> CubePoint:
    """Flip digit j of every vertex; an involution on full cube points."""
    a = tuple(a)
    k = _point_dim(a)
    if not 1 <= j <= k:
        raise InputError(f"direction {j} out of range 1..{k}")
    bit = 1 << (j - 1)
    return tuple(a[m ^ bit] for m in range(1 << k))


# ---------------------------------------------------------------------------
# the face group


@dataclass(frozen=True)
class FaceGroupElement:
    """A face-group element for a k-cube over a d-system: exponent face[i]
    of T_{dirs[i]} on the coordinates with eps_i = 1, then the diagonal word
    diag applied to every coordinate."""

    face: tuple[int, ...]
    diag: tuple[int, ...]

    def apply(self, sys: FiniteZdSystem, dirs: tuple[int, ...], p: CubePoint,
              based: bool = False) -> CubePoint:
        k = len(dirs)
        if len(self.face) != k or len(self.diag) != sys.d:
            raise InputError("exponent vectors do not match dimensions")
        offset = 1 if based else 0
        out = list(p)
        for i, j in enumerate(dirs):
            e = self.face[i] % perm_order(sys.perms[j - 1])
            if e == 0:
                continue
            table = perm_pow(sys.perms[j - 1], e)
            for pos in range(len(out)):
                if (pos + offset) >> i & 1:
                    out[pos] = table[out[pos]]
        for j, e in enumerate(self.diag, start=1):
            e %= perm_order(sys.perms[j - 1])
            if e == 0:
                continue
            table = perm_pow(sys.perms[j - 1], e)
            out = [table[v] for v in out]
        return tuple(out)


def face_group_generators(sys: FiniteZdSystem, dirs: tuple[int, ...]
                          ) -> list[FaceGroupElement]:
    """One face generator (and inverse) per cube direction plus one diagonal
    generator (and inverse) per system direction."""
    k = len(dirs)
    gens = []
    for i in range(k):
        for e in (1, -1):
            face = [0] * k
            face[i] = e
            gens.append(FaceGroupElement(tuple(face), (0,) * sys.d))
    for j in range(sys.d):
        for e in (1, -1):
            diag = [0] * sys.d
            diag[j] = e
            gens.append(FaceGroupElement((0,) * k, tuple(diag)))
    return gens


def face_group_orbit(cubes: CubeSet, start: CubePoint) -> CubeSet:
    """Breadth-first closure of {start} under the face-group generators,
    intersected with cubes.  The start must be a member; whether the orbit
    exhausts the set is a separate check."""
    if cubes.base is None:
        raise InputError("cube set carries no base system")
    start = tuple(start)
    if start not in cubes:
        raise InputError("start point is not in the cube set")
    sys = cubes.base
    gens = face_group_generators(sys, cubes.dirs)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = g.apply(sys, cubes.dirs, p, based=cubes.based)
                if q not in seen and q in cubes:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return CubeSet(dirs=cubes.dirs, points=tuple(sorted(seen)),
                   based=cubes.based, base=sys)


def section_of(cubes: CubeSet, x0: int) -> CubeSet:
    """The tuples of a full cube set whose vertex-0 coordinate is x0, with
    that coordinate dropped (for comparison against enumerate_K)."""
    if cubes.based:
        raise InputError("section_of needs a full cube set")
    pts = tuple(p[1:] for p in cubes.points if p[0] == x0)
    return CubeSet(dirs=cubes.dirs, points=pts, based=True, base=cubes.base)
