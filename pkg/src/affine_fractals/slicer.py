"""Integer-time cross sections of a fractal mesh along its last axis.

The last lattice coordinate is read as time; display time is 0-based
(``tau = a_n - 1`` for the bottom of a cell anchored at ``a_n``). A sponge
cell shows up twice, as the facet at its bottom time and the facet at its
top time. A simplex cell shows its n-vertex base facet at the bottom time
and its apex as a single point one step later. Both appearances carry the
cell id as label, so equal labels in adjacent slices name the same cell.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import DomainError
from .generator import FractalMesh, cell_offsets
from .index_sets import FractalKind, Kind


class Role(str, enum.Enum):
    BOTTOM = "bottom"
    TOP = "top"


class Shape(str, enum.Enum):
    FACET = "facet"
    SIMPLEX_FACET = "simplex_facet"
    POINT = "point"


@dataclass(frozen=True)
class SlicePiece:
    label: int
    role: Role
    vertices: tuple
    shape: Shape

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        object.__setattr__(self, "shape", Shape(self.shape))


@dataclass(frozen=True)
class Slice:
    time: int
    pieces: tuple

    def count(self, role=None, shape=None) -> int:
        return sum(
            1 for p in self.pieces
            if (role is None or p.role == Role(role)) and (shape is None or p.shape == Shape(shape))
        )


@dataclass(frozen=True)
class SliceSeries:
    kind: FractalKind
    slices: tuple
    axis: int

    def __len__(self):
        return len(self.slices)


_ROLE_ORDER = {Role.BOTTOM: 0, Role.TOP: 1}


def _project(p):
    return tuple(p[:-1])


def slice_series(mesh: FractalMesh) -> SliceSeries:
    if not mesh.cells:
        raise DomainError("cannot slice an empty mesh")
    kind = mesh.kind
    n = kind.n
    offsets = cell_offsets(kind)
    buckets = {tau: [] for tau in range(kind.side + 1)}

    for cell in mesh.cells:
        t0 = cell.base[-1] - 1
        if kind.kind is Kind.SPONGE:
            bottom = tuple(_project(v) for v, o in zip(cell.vertices, offsets) if o[-1] == 0)
            top = tuple(_project(v) for v, o in zip(cell.vertices, offsets) if o[-1] == 1)
            buckets[t0].append(SlicePiece(cell.id, Role.BOTTOM, bottom, Shape.FACET))
            buckets[t0 + 1].append(SlicePiece(cell.id, Role.TOP, top, Shape.FACET))
        else:
            bottom = tuple(_project(v) for v in cell.vertices[:n])
            apex = (_project(cell.vertices[n]),)
            buckets[t0].append(SlicePiece(cell.id, Role.BOTTOM, bottom, Shape.SIMPLEX_FACET))
            buckets[t0 + 1].append(SlicePiece(cell.id, Role.TOP, apex, Shape.POINT))

    slices = tuple(
        Slice(tau, tuple(sorted(pieces, key=lambda p: (_ROLE_ORDER[p.role], p.label))))
        for tau, pieces in sorted(buckets.items())
    )
    return SliceSeries(kind, slices, axis=n)


def pair_labels(series: SliceSeries) -> list:
    """``(label, tau_bottom, tau_top)`` for every cell, sorted by label."""
    seen = {}
    for s in series.slices:
        for p in s.pieces:
            entry = seen.setdefault(p.label, [None, None])
            slot = 0 if p.role is Role.BOTTOM else 1
            if entry[slot] is not None:
                raise DomainError(f"label {p.label} appears twice as {p.role.value}")
            entry[slot] = s.time
    out = []
    for label, (bottom, top) in sorted(seen.items()):
        if bottom is None or top is None:
            raise DomainError(f"label {label} lacks a {'bottom' if bottom is None else 'top'} piece")
        out.append((label, bottom, top))
    return out
