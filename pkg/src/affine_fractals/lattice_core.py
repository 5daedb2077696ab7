"""Exact discrete centro-affine lattice machinery.

A lattice is a map from integer indices ``(k1, ..., kn)`` (all >= 1) to points.
At each index the *frame* ``(r, r_1, ..., r_n)`` holds the point and its
forward neighbours. One step along axis ``i`` replaces the frame by
``frame @ M_i`` where the frame is treated as a row block of points::

    (r_i, r_i1, ..., r_in) = (r, r_1, ..., r_n) . M_i

Two ambient conventions are supported:

* ``centroaffine`` -- points live in ``n + 1`` dimensions and the frame
  vectors themselves must be linearly independent.
* ``affine`` -- points live in ``n`` dimensions (a hyperplane off the origin,
  translated to R^n) and the edge vectors ``r_i - r`` must be independent.

All arithmetic uses :class:`fractions.Fraction`; nothing here rounds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import (
    CompatibilityError,
    DegenerateFrameError,
    DimensionMismatchError,
    DomainError,
)

Point = tuple  # tuple[Fraction, ...]
Index = tuple  # tuple[int, ...]


# ---------------------------------------------------------------------------
# small exact linear algebra


def as_point(coords: Iterable) -> Point:
    """Convert an iterable of ints/Fractions/strings to a tuple of Fractions."""
    return tuple(Fraction(c) for c in coords)


def as_matrix(rows: Iterable[Iterable]) -> tuple:
    return tuple(as_point(row) for row in rows)


def determinant(rows: Sequence[Sequence]) -> Fraction:
    """Exact determinant by Gaussian elimination over the rationals."""
    size = len(rows)
    a = [list(map(Fraction, row)) for row in rows]
    if any(len(row) != size for row in a):
        raise DimensionMismatchError(f"determinant needs a square matrix, got {size} rows of lengths {[len(r) for r in a]}")
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        p = a[col][col]
        det *= p
        for r in range(col + 1, size):
            f = a[r][col]
            if f:
                f /= p
                row_r, row_c = a[r], a[col]
                for c in range(col + 1, size):
                    row_r[c] -= f * row_c[c]
    return det


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> tuple:
    if len(a[0]) != len(b):
        raise DimensionMismatchError(f"cannot multiply {len(a)}x{len(a[0])} by {len(b)}x{len(b[0])}")
    cols = list(zip(*b))
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in cols) for row in a)


def identity(size: int) -> tuple:
    return tuple(tuple(Fraction(int(r == c)) for c in range(size)) for r in range(size))


def matpow(a: Sequence[Sequence], exponent: int) -> tuple:
    if exponent < 0:
        raise DomainError("negative matrix powers are not supported")
    result = identity(len(a))
    base = tuple(tuple(row) for row in a)
    while exponent:
        if exponent & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        exponent >>= 1
    return result


def _check_same_dim(*points: Point) -> int:
    dims = {len(p) for p in points}
    if len(dims) != 1:
        raise DimensionMismatchError(f"points have differing ambient dimensions {sorted(dims)}")
    return dims.pop()


def _sub(p: Point, q: Point) -> Point:
    return tuple(x - y for x, y in zip(p, q))


def right_multiply(rows: Sequence[Point], matrix: Sequence[Sequence]) -> tuple:
    """Return ``rows . matrix`` where ``rows`` is a block of points.

    Column ``B`` of the result is ``sum_A rows[A] * matrix[A][B]``. Zero
    entries are skipped, which matters for the sparse canonical matrices.
    """
    if len(rows) != len(matrix):
        raise DimensionMismatchError(f"row block of {len(rows)} points against a {len(matrix)}-row matrix")
    dim = len(rows[0])
    out = []
    for col in range(len(matrix[0])):
        acc = [Fraction(0)] * dim
        for point, mrow in zip(rows, matrix):
            w = mrow[col]
            if w:
                for d in range(dim):
                    acc[d] += w * point[d]
        out.append(tuple(acc))
    return tuple(out)


# ---------------------------------------------------------------------------
# domain types


class FrameMode(str, enum.Enum):
    CENTROAFFINE = "centroaffine"
    AFFINE = "affine"


def validate_index(index: Sequence[int], n: int | None = None) -> Index:
    index = tuple(int(k) for k in index)
    if n is not None and len(index) != n:
        raise DimensionMismatchError(f"lattice index {index} has length {len(index)}, expected {n}")
    if any(k < 1 for k in index):
        raise DomainError(f"lattice index {index} has a coordinate below 1")
    return index


def _first_dependent(vectors: Sequence[Point]) -> int | None:
    """Position of the first vector lying in the span of its predecessors."""
    basis: list[list[Fraction]] = []
    pivots: list[int] = []
    for pos, vec in enumerate(vectors):
        v = list(vec)
        for b, p in zip(basis, pivots):
            if v[p]:
                f = v[p] / b[p]
                v = [x - f * y for x, y in zip(v, b)]
        lead = next((c for c, x in enumerate(v) if x), None)
        if lead is None:
            return pos
        basis.append(v)
        pivots.append(lead)
    return None


@dataclass(frozen=True)
class Frame:
    """A base point ``r`` and its ``n`` forward neighbours ``r_1 .. r_n``.

    Independence is checked on construction; a dependent frame raises
    :class:`DegenerateFrameError` naming the offending vector.
    """

    base: Point
    neighbors: tuple
    mode: FrameMode = FrameMode.AFFINE

    def __post_init__(self):
        base = as_point(self.base)
        neighbors = tuple(as_point(p) for p in self.neighbors)
        mode = FrameMode(self.mode)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "neighbors", neighbors)
        object.__setattr__(self, "mode", mode)

        n = len(neighbors)
        if n < 1:
            raise DomainError("a frame needs at least one neighbour")
        dim = _check_same_dim(base, *neighbors)
        expected = n if mode is FrameMode.AFFINE else n + 1
        if dim != expected:
            raise DimensionMismatchError(
                f"{mode.value} frame with {n} neighbours needs ambient dimension {expected}, got {dim}"
            )
        if mode is FrameMode.AFFINE:
            bad = _first_dependent([_sub(p, base) for p in neighbors])
            if bad is not None:
                raise DegenerateFrameError(
                    f"neighbors[{bad}] - base is linearly dependent on the preceding edge vectors"
                )
        else:
            bad = _first_dependent([base, *neighbors])
            if bad is not None:
                name = "base" if bad == 0 else f"neighbors[{bad - 1}]"
                raise DegenerateFrameError(f"{name} is linearly dependent on the preceding frame vectors")

    @property
    def n(self) -> int:
        return len(self.neighbors)

    @property
    def rows(self) -> tuple:
        return (self.base, *self.neighbors)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], mode=FrameMode.AFFINE) -> "Frame":
        return cls(rows[0], tuple(rows[1:]), mode)


@dataclass(frozen=True)
class TransitionMatrix:
    """Matrix ``M_axis`` (axis is 1-based) transporting a frame one step along ``axis``."""

    entries: tuple
    axis: int

    def __post_init__(self):
        entries = as_matrix(self.entries)
        object.__setattr__(self, "entries", entries)
        size = len(entries)
        if size < 3 or any(len(row) != size for row in entries):
            raise DimensionMismatchError(f"transition matrix must be square of size >= 3, got {size} rows")
        if not 1 <= self.axis <= size - 1:
            raise DomainError(f"axis {self.axis} outside 1..{size - 1}")
        first_col = [row[0] for row in entries]
        expected = [Fraction(int(r == self.axis)) for r in range(size)]
        if first_col != expected:
            raise DomainError(f"first column of M{self.axis} must be the unit vector with 1 in row {self.axis + 1}")
        if determinant(entries) == 0:
            raise DegenerateFrameError(f"M{self.axis} is singular")

    @property
    def size(self) -> int:
        return len(self.entries)

    def __matmul__(self, other):
        return matmul(self.entries, other.entries if isinstance(other, TransitionMatrix) else other)


@dataclass(frozen=True)
class InvariantTable:
    """Coefficients ``(ei)_{A,B}``: ``matrices[i-1][A-1][B-1]``."""

    matrices: tuple
    mode: FrameMode = FrameMode.AFFINE

    def __post_init__(self):
        object.__setattr__(self, "matrices", tuple(as_matrix(m) for m in self.matrices))
        object.__setattr__(self, "mode", FrameMode(self.mode))

    @property
    def n(self) -> int:
        return len(self.matrices)

    def entry(self, axis: int, row: int, col: int) -> Fraction:
        """1-based access matching the ``(ei)_{A,B}`` notation."""
        return self.matrices[axis - 1][row - 1][col - 1]

    def as_transition_matrices(self) -> list:
        return [TransitionMatrix(m, axis=i + 1) for i, m in enumerate(self.matrices)]


# ---------------------------------------------------------------------------
# operations


def structure_step(r: Sequence, r_i: Sequence, r_j: Sequence) -> Point:
    """Fourth vertex of a lattice parallelogram: ``r_ij = r_i + r_j - r``."""
    _check_same_dim(r, r_i, r_j)
    return tuple(Fraction(b) + Fraction(c) - Fraction(a) for a, b, c in zip(r, r_i, r_j))


def double_step(r: Sequence, r_i: Sequence) -> Point:
    """Next point on a lattice line: ``r_ii = 2 r_i - r``."""
    _check_same_dim(r, r_i)
    return tuple(2 * Fraction(b) - Fraction(a) for a, b in zip(r, r_i))


def canonical_matrices(n: int) -> list:
    """Transition matrices of the lattice with ``r_ij = r_i + r_j - r``.

    ``M_i`` has first row ``(0, -1, ..., -1)``, row ``i + 1`` equal to
    ``(1, 1, ..., 2, ..., 1)`` with the 2 on the diagonal, and unit rows
    elsewhere.
    """
    if n < 2:
        raise DomainError(f"lattice dimension must be >= 2, got {n}")
    size = n + 1
    out = []
    for axis in range(1, n + 1):
        rows = []
        for r in range(size):
            if r == 0:
                row = [0] + [-1] * n
            elif r == axis:
                row = [1] + [1] * n
                row[axis] = 2
            else:
                row = [int(c == r) for c in range(size)]
            rows.append(row)
        out.append(TransitionMatrix(rows, axis=axis))
    return out


def _entries(m) -> tuple:
    return m.entries if isinstance(m, TransitionMatrix) else as_matrix(m)


def check_compatibility(matrices: Sequence) -> bool:
    """True iff every pair of the (constant) family commutes exactly."""
    mats = [_entries(m) for m in matrices]
    sizes = {len(m) for m in mats}
    if len(sizes) > 1:
        raise DimensionMismatchError(f"matrix family mixes sizes {sorted(sizes)}")
    return all(matmul(a, b) == matmul(b, a) for a, b in combinations(mats, 2))


def check_symmetry(matrices: Sequence) -> bool:
    """True iff ``(ei)_{A,k+1} == (ek)_{A,i+1}`` for every pair of axes."""
    mats = [_entries(m) for m in matrices]
    for i, k in combinations(range(len(mats)), 2):
        for row_i, row_k in zip(mats[i], mats[k]):
            if row_i[k + 1] != row_k[i + 1]:
                return False
    return True


def check_hyperplane_criterion(matrices: Sequence) -> bool:
    """True iff every column of every matrix sums to exactly 1."""
    for m in matrices:
        entries = _entries(m)
        if any(sum(col, Fraction(0)) != 1 for col in zip(*entries)):
            return False
    return True


def frame_transport(frame: Frame, matrices: Sequence[TransitionMatrix], exponents: Sequence[int]) -> Frame:
    """Move ``frame`` by ``exponents`` steps: ``rows . M1^e1 . M2^e2 ... Mn^en``."""
    n = frame.n
    if len(matrices) != n or len(exponents) != n:
        raise DimensionMismatchError(f"need {n} matrices and {n} exponents for an n={n} frame")
    if any(_entries(m).__len__() != n + 1 for m in matrices):
        raise DimensionMismatchError(f"transition matrices must be {n + 1}x{n + 1}")
    if any(e < 0 for e in exponents):
        raise DomainError(f"exponents must be >= 0, got {tuple(exponents)}")
    if not check_compatibility(matrices):
        raise CompatibilityError("transition matrices do not commute; transport would be path dependent")
    rows = frame.rows
    for m, e in zip(matrices, exponents):
        if e:
            rows = right_multiply(rows, matpow(_entries(m), e))
    return Frame.from_rows(rows, frame.mode)


# -- invariants --------------------------------------------------------------


def unit_offset(n: int, *axes: int) -> Index:
    """Offset tuple with a 1 added for each (0-based) axis listed."""
    off = [0] * n
    for a in axes:
        off[a] += 1
    return tuple(off)


def stencil_offsets(n: int) -> list:
    """Offsets of the minimal neighbourhood ``{r, r_i, r_ii, r_ij (i<j)}``."""
    offs = [unit_offset(n)]
    offs += [unit_offset(n, i) for i in range(n)]
    offs += [unit_offset(n, i, i) for i in range(n)]
    offs += [unit_offset(n, i, j) for i, j in combinations(range(n), 2)]
    return offs


def neighborhood_at(points: Mapping, site: Sequence[int]) -> dict | None:
    """Collect the stencil around ``site`` from an index->point mapping.

    Returns ``None`` when any stencil point is missing.
    """
    site = tuple(site)
    n = len(site)
    out = {}
    for off in stencil_offsets(n):
        key = tuple(s + o for s, o in zip(site, off))
        p = points.get(key)
        if p is None:
            return None
        out[off] = p
    return out


def _stencil_point(nbhd: Mapping, n: int, *axes: int) -> Point:
    try:
        return as_point(nbhd[unit_offset(n, *axes)])
    except KeyError:
        raise DomainError(f"neighbourhood is missing offset {unit_offset(n, *axes)}") from None


def _neighborhood_dim(nbhd: Mapping) -> int:
    keys = list(nbhd)
    if not keys:
        raise DomainError("empty neighbourhood")
    return len(keys[0])


def _replace(rows: Sequence, pos: int, vec) -> list:
    out = list(rows)
    out[pos] = vec
    return out


def compute_invariants_affine(neighborhood: Mapping) -> InvariantTable:
    """Invariant table of a lattice lying in R^n, from edge-vector determinant ratios.

    ``neighborhood`` maps offsets (``(0,..,0)``, ``e_i``, ``2e_i``,
    ``e_i+e_j``) to points of ambient dimension ``n``. Rows 2..n+1 come from
    Cramer ratios against ``[r_1 - r, ..., r_n - r]``; row 1 is whatever
    makes each column sum to one.
    """
    n = _neighborhood_dim(neighborhood)
    r = _stencil_point(neighborhood, n)
    ri = [_stencil_point(neighborhood, n, i) for i in range(n)]
    _check_same_dim(r, *ri)
    if len(r) != n:
        raise DimensionMismatchError(f"affine invariants need points in R^{n}, got R^{len(r)}")
    edges = [_sub(p, r) for p in ri]
    denom = determinant(edges)
    if denom == 0:
        bad = _first_dependent(edges)
        raise DegenerateFrameError(f"edge vector r_{bad + 1} - r is dependent on the preceding ones")

    size = n + 1
    matrices = []
    for i in range(n):
        cols = [[Fraction(int(a == i + 1)) for a in range(size)]]
        for j in range(n):
            if j == i:
                vec = _sub(_stencil_point(neighborhood, n, i, i), ri[i])
            else:
                vec = _sub(_stencil_point(neighborhood, n, i, j), r)
            col = [Fraction(0)] * size
            for ell in range(n):
                col[ell + 1] = determinant(_replace(edges, ell, vec)) / denom
            if j == i:
                col[i + 1] += 1
            col[0] = 1 - sum(col[1:], Fraction(0))
            cols.append(col)
        matrices.append(tuple(zip(*cols)))
    return InvariantTable(tuple(matrices), FrameMode.AFFINE)


def compute_invariants_centroaffine(neighborhood: Mapping) -> InvariantTable:
    """Invariant table of a lattice in R^{n+1} from frame determinant ratios.

    ``(ei)_{A,B}`` is the ratio of ``[r, r_1, ..., r_n]`` with slot ``A``
    replaced by the transported vector (``r_i`` for ``B = 1``, ``r_il`` for
    ``B = l + 1``) to the undisturbed frame determinant.
    """
    n = _neighborhood_dim(neighborhood)
    r = _stencil_point(neighborhood, n)
    ri = [_stencil_point(neighborhood, n, i) for i in range(n)]
    _check_same_dim(r, *ri)
    if len(r) != n + 1:
        raise DimensionMismatchError(f"centro-affine invariants need points in R^{n + 1}, got R^{len(r)}")
    frame = [r, *ri]
    denom = determinant(frame)
    if denom == 0:
        bad = _first_dependent(frame)
        name = "r" if bad == 0 else f"r_{bad}"
        raise DegenerateFrameError(f"frame vector {name} is dependent on the preceding ones")

    size = n + 1
    matrices = []
    for i in range(n):
        targets = [ri[i]] + [_stencil_point(neighborhood, n, i, ell) for ell in range(n)]
        cols = [[determinant(_replace(frame, a, t)) / denom for a in range(size)] for t in targets]
        matrices.append(tuple(zip(*cols)))
    return InvariantTable(tuple(matrices), FrameMode.CENTROAFFINE)


def compute_invariants(neighborhood: Mapping) -> InvariantTable:
    """Dispatch on ambient dimension: ``n`` -> affine, ``n + 1`` -> centro-affine."""
    n = _neighborhood_dim(neighborhood)
    dim = len(_stencil_point(neighborhood, n))
    if dim == n:
        return compute_invariants_affine(neighborhood)
    if dim == n + 1:
        return compute_invariants_centroaffine(neighborhood)
    raise DimensionMismatchError(f"points in R^{dim} fit neither mode for an n={n} lattice")


def invariant_tables(points: Mapping, n: int) -> dict:
    """Invariant table at every site whose full stencil is present in ``points``."""
    tables = {}
    for site in sorted(points):
        if len(site) != n:
            raise DimensionMismatchError(f"index {site} does not have length {n}")
        nbhd = neighborhood_at(points, site)
        if nbhd is not None:
            tables[site] = compute_invariants(nbhd)
    return tables


def check_self_similarity(lattice) -> bool:
    """True iff the invariant table is the same at every interior site.

    ``lattice`` is any object with ``n``, ``extent`` and ``points``
    attributes (see :class:`affine_fractals.generator.PointLattice`).
    """
    if any(e < 3 for e in lattice.extent):
        raise DomainError(f"self-similarity needs extent >= 3 on every axis, got {tuple(lattice.extent)}")
    tables = invariant_tables(lattice.points, lattice.n)
    first = next(iter(tables.values()))
    return all(t == first for t in tables.values())
