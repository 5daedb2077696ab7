"""Point generation (recurrence and matrix transport) and mesh assembly."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import lcm
from typing import Sequence

from .errors import CompatibilityError, DimensionMismatchError, DomainError
from .index_sets import FractalKind, Kind, enumerate_cells
from .lattice_core import (
    Frame,
    FrameMode,
    TransitionMatrix,
    as_point,
    canonical_matrices,
    check_compatibility,
    determinant,
    double_step,
    matmul,
    structure_step,
)

DEFAULT_FRAMES = {
    # neighbours are in axis order: r(2,1), r(1,2), ...
    ("sponge", 2): ((0, 0), ((0, 2), (1, 1))),
    ("sponge", 3): ((0, 0, 0), ((1, 1, 0), (0, 2, 0), (0, 0, 3))),
    ("simplex", 2): ((0, 0), ((-2, -1), (1, -2))),
    ("simplex", 3): ((0, 0, 0), ((-1, -1, -1), (1, -1, -1), (1, 1, -1))),
}


def default_frame(kind: Kind | str, n: int) -> Frame:
    """Seed frame used when none is supplied; standard basis for n >= 4."""
    kind = Kind(kind)
    seed = DEFAULT_FRAMES.get((kind.value, n))
    if seed is None:
        if n < 2:
            raise DomainError(f"n must be >= 2, got {n}")
        base = (0,) * n
        seed = (base, tuple(tuple(int(c == i) for c in range(n)) for i in range(n)))
    return Frame(seed[0], seed[1], FrameMode.AFFINE)


@dataclass(frozen=True)
class PointLattice:
    """Points ``r(k)`` for every index ``k`` in ``[1, extent_1] x ... x [1, extent_n]``."""

    n: int
    extent: tuple
    points: dict = field(repr=False, compare=True)

    def __getitem__(self, index):
        return self.points[tuple(index)]

    def indices(self) -> list:
        return sorted(self.points)

    @property
    def ambient_dim(self) -> int:
        return len(next(iter(self.points.values())))

    def frame(self) -> Frame:
        """Frame at the origin index (1, ..., 1)."""
        origin = (1,) * self.n
        neighbors = tuple(self.points[tuple(1 + int(c == i) for c in range(self.n))] for i in range(self.n))
        mode = FrameMode.AFFINE if self.ambient_dim == self.n else FrameMode.CENTROAFFINE
        return Frame(self.points[origin], neighbors, mode)


@dataclass(frozen=True)
class CellGeometry:
    id: int
    base: tuple
    vertices: tuple


@dataclass(frozen=True)
class FractalMesh:
    kind: FractalKind
    frame: Frame
    cells: tuple

    def __len__(self):
        return len(self.cells)


def _check_extent(extent: Sequence[int], n: int) -> tuple:
    extent = tuple(int(e) for e in extent)
    if len(extent) != n:
        raise DimensionMismatchError(f"extent {extent} has length {len(extent)}, expected {n}")
    if any(e < 2 for e in extent):
        raise DomainError(f"extent must be >= 2 on every axis, got {extent}")
    return extent


def _box(extent: Sequence[int]) -> list:
    """Indices of the box sorted by index sum, ties lexicographic."""
    idx = list(product(*(range(1, e + 1) for e in extent)))
    idx.sort(key=lambda k: (sum(k), k))
    return idx


def _step(k: tuple, axis: int, delta: int) -> tuple:
    return k[:axis] + (k[axis] + delta,) + k[axis + 1:]


def generate_points_recurrence(frame: Frame, extent: Sequence[int]) -> PointLattice:
    """Fill the box from the frame with ``r_ij = r_i + r_j - r`` and ``r_ii = 2r_i - r``."""
    n = frame.n
    extent = _check_extent(extent, n)
    origin = (1,) * n
    points = {origin: frame.base}
    for i, p in enumerate(frame.neighbors):
        points[_step(origin, i, 1)] = p
    for k in _box(extent):
        if k in points:
            continue
        grown = [i for i in range(n) if k[i] > 1]
        if len(grown) >= 2:
            i, j = grown[0], grown[1]
            ki, kj = _step(k, i, -1), _step(k, j, -1)
            points[k] = structure_step(points[_step(ki, j, -1)], points[ki], points[kj])
        else:
            (i,) = grown
            points[k] = double_step(points[_step(k, i, -2)], points[_step(k, i, -1)])
    return PointLattice(n, extent, points)


def _validate_family(matrices: Sequence[TransitionMatrix], n: int):
    if len(matrices) != n:
        raise DimensionMismatchError(f"need {n} transition matrices, got {len(matrices)}")
    for m in matrices:
        if m.size != n + 1:
            raise DimensionMismatchError(f"transition matrices must be {n + 1}x{n + 1}, got {m.size}")
    if not check_compatibility(matrices):
        raise CompatibilityError("transition matrices do not commute")


def generate_points_matrix(frame: Frame, matrices: Sequence[TransitionMatrix], extent: Sequence[int]) -> PointLattice:
    """Fill the box by transporting frames: one matrix application per index.

    The frame at ``k`` is obtained from the frame at ``k - e_i`` (``i`` the
    last axis with ``k_i > 1``) by a single right multiplication with
    ``M_i``. Sweeping the box lexicographically guarantees the predecessor
    is always ready.
    """
    n = frame.n
    extent = _check_extent(extent, n)
    _validate_family(matrices, n)
    entries = [m.entries for m in matrices]
    rows = frame.rows
    scale = 1
    if all(x.denominator == 1 for m in entries for row in m for x in row):
        # integral family: run on integers over a common denominator, divide once at the end
        scale = lcm(*(x.denominator for p in rows for x in p))
        rows = tuple(tuple(int(x * scale) for x in p) for p in rows)
        entries = [tuple(tuple(int(x) for x in row) for row in m) for m in entries]
    origin = (1,) * n
    frames = {origin: rows}
    points = {}
    for k in product(*(range(1, e + 1) for e in extent)):
        if k != origin:
            i = max(a for a in range(n) if k[a] > 1)
            frames[k] = _right_multiply_raw(frames[_step(k, i, -1)], entries[i])
        points[k] = frames[k][0]
    if scale != 1 or not isinstance(rows[0][0], Fraction):
        points = {k: tuple(Fraction(x, scale) for x in p) for k, p in points.items()}
    return PointLattice(n, extent, points)


def _right_multiply_raw(rows, matrix):
    # same contract as lattice_core.right_multiply, generic over int/Fraction
    dim = len(rows[0])
    out = []
    for col in range(len(matrix[0])):
        acc = [0] * dim
        for point, mrow in zip(rows, matrix):
            w = mrow[col]
            if w:
                for d in range(dim):
                    acc[d] += w * point[d]
        out.append(tuple(acc))
    return tuple(out)


def required_extent(kind: FractalKind) -> tuple:
    return (kind.side + 1,) * kind.n


def cell_offsets(kind: FractalKind) -> list:
    """Vertex offsets from the anchor in the fixed storage order.

    Sponge: all ``2^n`` corners in binary counter order (axis 1 most
    significant). Simplex: the anchor, then anchor + e_1, ..., anchor + e_n.
    """
    n = kind.n
    if kind.kind is Kind.SPONGE:
        return list(product((0, 1), repeat=n))
    return [(0,) * n] + [tuple(int(c == i) for c in range(n)) for i in range(n)]


def assemble_mesh(kind: FractalKind, lattice: PointLattice) -> FractalMesh:
    if lattice.n != kind.n:
        raise DimensionMismatchError(f"lattice has n={lattice.n}, kind has n={kind.n}")
    need = kind.side + 1
    if any(e < need for e in lattice.extent):
        raise DomainError(f"lattice extent {lattice.extent} too small; need {need} points per axis")
    offsets = cell_offsets(kind)
    pts = lattice.points
    cells = []
    for cid, a in enumerate(enumerate_cells(kind), start=1):
        verts = tuple(pts[tuple(x + o for x, o in zip(a, off))] for off in offsets)
        cells.append(CellGeometry(cid, a, verts))
    return FractalMesh(kind, lattice.frame(), tuple(cells))


def assemble_mesh_cells_only(kind: FractalKind, frame: Frame, matrices: Sequence[TransitionMatrix] | None = None) -> FractalMesh:
    """Build the mesh cell by cell by matrix transport, never materialising the point box.

    ``r(k)`` is the first column of ``frame . M1^(k1-1) ... Mn^(kn-1)``;
    per-axis matrix powers are cached, so memory grows with the number of
    cells only.
    """
    n = kind.n
    if frame.n != n:
        raise DimensionMismatchError(f"frame has n={frame.n}, kind has n={n}")
    if matrices is None:
        matrices = canonical_matrices(n)
    _validate_family(matrices, n)
    size = n + 1
    powers = [[tuple(tuple(Fraction(int(r == c)) for c in range(size)) for r in range(size))] for _ in range(n)]

    def power(axis, e):
        cache = powers[axis]
        while len(cache) <= e:
            cache.append(matmul(cache[-1], matrices[axis].entries))
        return cache[e]

    rows = frame.rows

    def point(k):
        coeff = [[Fraction(int(r == 0))] for r in range(size)]
        for axis in reversed(range(n)):
            if k[axis] > 1:
                coeff = matmul(power(axis, k[axis] - 1), coeff)
        return _right_multiply_raw(rows, coeff)[0]

    offsets = cell_offsets(kind)
    cells = []
    for cid, a in enumerate(enumerate_cells(kind), start=1):
        verts = tuple(point(tuple(x + o for x, o in zip(a, off))) for off in offsets)
        cells.append(CellGeometry(cid, a, verts))
    return FractalMesh(kind, frame, tuple(cells))


def generate_mesh(kind: FractalKind, frame: Frame | None = None, method: str = "recurrence") -> FractalMesh:
    """Convenience: default frame, lattice of the required extent, assembled mesh."""
    if frame is None:
        frame = default_frame(kind.kind, kind.n)
    if method == "recurrence":
        lattice = generate_points_recurrence(frame, required_extent(kind))
    elif method == "matrix":
        lattice = generate_points_matrix(frame, canonical_matrices(kind.n), required_extent(kind))
    elif method == "cells":
        return assemble_mesh_cells_only(kind, frame)
    else:
        raise DomainError(f"unknown generation method {method!r}")
    mesh = assemble_mesh(kind, lattice)
    return FractalMesh(kind, frame, mesh.cells)


def verify_structure(lattice: PointLattice) -> list:
    """Sites and axis pairs where ``r_ij - r_i - r_j + r`` is nonzero.

    Each entry is ``(site, i, j)`` with 1-based axes ``i < j``. An empty
    list means the structure equation holds everywhere in the box.
    """
    if any(e < 2 for e in lattice.extent):
        raise DomainError(f"extent must be >= 2 on every axis, got {lattice.extent}")
    pts = lattice.points
    bad = []
    for k in sorted(pts):
        for i, j in combinations(range(lattice.n), 2):
            if k[i] >= lattice.extent[i] or k[j] >= lattice.extent[j]:
                continue
            ki, kj = _step(k, i, 1), _step(k, j, 1)
            if pts[_step(ki, j, 1)] != structure_step(pts[k], pts[ki], pts[kj]):
                bad.append((k, i + 1, j + 1))
    return bad


def cell_orientation(cell: CellGeometry, kind: FractalKind) -> int:
    """Sign of the determinant of the cell's edge vectors at its anchor (0 if flat)."""
    verts = cell.vertices
    base = verts[0]
    if kind.kind is Kind.SPONGE:
        # corners base + e_i sit at position 2^(n-1-i) in binary counter order
        edges = [verts[2 ** (kind.n - 1 - i)] for i in range(kind.n)]
    else:
        edges = list(verts[1:])
    vecs = [tuple(x - y for x, y in zip(p, base)) for p in edges]
    if len(vecs[0]) != len(vecs):
        raise DimensionMismatchError("orientation needs points of ambient dimension n")
    d = determinant(vecs)
    return (d > 0) - (d < 0)


def map_frame(frame: Frame, linear, translation=None) -> Frame:
    """Image of a frame under ``x -> L x + b`` (exact)."""
    return Frame(map_point(frame.base, linear, translation), tuple(map_point(p, linear, translation) for p in frame.neighbors), frame.mode)


def map_point(p, linear, translation=None):
    p = as_point(p)
    out = [sum((Fraction(a) * x for a, x in zip(row, p)), Fraction(0)) for row in linear]
    if translation is not None:
        out = [x + Fraction(t) for x, t in zip(out, translation)]
    return tuple(out)


__all__ = [
    "PointLattice",
    "CellGeometry",
    "FractalMesh",
    "default_frame",
    "generate_points_recurrence",
    "generate_points_matrix",
    "assemble_mesh",
    "assemble_mesh_cells_only",
    "generate_mesh",
    "verify_structure",
    "required_extent",
    "cell_offsets",
    "cell_orientation",
    "map_frame",
    "map_point",
]
