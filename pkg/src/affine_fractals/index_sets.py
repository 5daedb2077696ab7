"""Colored-cell index sets S_m for sponge and simplex fractals.

A cell is named by its 1-based anchor ``(a_1, ..., a_n)``. Writing
``a_s - 1`` in base 3 (sponge) or base 2 (simplex), every digit position
contributes one digit tuple ``(d_1t, ..., d_nt)``:

* sponge: at most one coordinate digit equals 1 at each position;
* simplex: the tuple is zero or a unit vector.

Membership is decided digit-wise; enumeration takes the Cartesian product
of the allowed digit tuples per position.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product
from math import comb
from typing import Sequence

from .errors import DomainError


class Kind(str, enum.Enum):
    SPONGE = "sponge"
    SIMPLEX = "simplex"


@dataclass(frozen=True)
class FractalKind:
    """Fractal family, lattice dimension ``n`` and recursion level ``m``.

    ``sponge`` is the carpet for n=2 and the Menger sponge for n=3;
    ``simplex`` is the triangle for n=2 and the pyramid for n=3.
    """

    kind: Kind
    n: int
    m: int

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.n < 2:
            raise DomainError(f"n must be >= 2, got {self.n}")
        if self.m < 1:
            raise DomainError(f"m must be >= 1, got {self.m}")

    @property
    def base(self) -> int:
        return 3 if self.kind is Kind.SPONGE else 2

    @property
    def side(self) -> int:
        """Number of cells along each axis of the index box."""
        return self.base ** self.m


@dataclass(frozen=True)
class CellSet:
    kind: FractalKind
    members: tuple

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, item):
        return tuple(item) in self._lookup

    @property
    def _lookup(self):
        cached = self.__dict__.get("_set")
        if cached is None:
            cached = frozenset(self.members)
            object.__setattr__(self, "_set", cached)
        return cached


def _digits(value: int, base: int, m: int) -> list:
    out = []
    for _ in range(m):
        value, d = divmod(value, base)
        out.append(d)
    return out


def _check_range(a: Sequence[int], n: int, side: int) -> tuple:
    a = tuple(int(x) for x in a)
    if len(a) != n:
        raise DomainError(f"cell index {a} has length {len(a)}, expected {n}")
    if any(not 1 <= x <= side for x in a):
        raise DomainError(f"cell index {a} outside [1, {side}]^{n}")
    return a


def sponge_member(a: Sequence[int], n: int, m: int) -> bool:
    a = _check_range(a, n, 3 ** m)
    digits = [_digits(x - 1, 3, m) for x in a]
    return all(sum(1 for d in column if d == 1) <= 1 for column in zip(*digits))


def simplex_member(a: Sequence[int], n: int, m: int) -> bool:
    a = _check_range(a, n, 2 ** m)
    digits = [_digits(x - 1, 2, m) for x in a]
    return all(sum(column) <= 1 for column in zip(*digits))


def is_member(a: Sequence[int], kind: FractalKind) -> bool:
    if kind.kind is Kind.SPONGE:
        return sponge_member(a, kind.n, kind.m)
    return simplex_member(a, kind.n, kind.m)


def digit_tuples(kind: Kind | str, n: int) -> list:
    """Allowed per-position digit tuples."""
    if Kind(kind) is Kind.SPONGE:
        return [t for t in product(range(3), repeat=n) if t.count(1) <= 1]
    return [tuple(int(s == k) for s in range(n)) for k in range(-1, n)]


def enumerate_cells(kind: FractalKind) -> CellSet:
    """All anchors of S_m, in lexicographic order."""
    base = kind.base
    allowed = digit_tuples(kind.kind, kind.n)
    anchors = [(1,) * kind.n]
    weight = 1
    for _ in range(kind.m):
        anchors = [tuple(a + weight * d for a, d in zip(anchor, t)) for anchor in anchors for t in allowed]
        weight *= base
    anchors.sort()
    return CellSet(kind, tuple(anchors))


def count_closed_form(kind: FractalKind) -> int:
    if kind.kind is Kind.SPONGE:
        return (2 ** kind.n + kind.n * 2 ** (kind.n - 1)) ** kind.m
    return (kind.n + 1) ** kind.m


def count_binomial_form(n: int, m: int) -> int:
    """Sponge count written as ``(3^n - C(n,2) 2^(n-2) - ... - C(n,n))^m``."""
    return (3 ** n - sum(comb(n, r) * 2 ** (n - r) for r in range(2, n + 1))) ** m


def triangle_block_matrix(m: int) -> list:
    """0/1 matrix ``A_m`` with ``A_{k+1} = [[A_k, A_k], [A_k, 0]]`` from ``A_1 = [[1,1],[1,0]]``.

    The 1-entry at row ``a``, column ``b`` (1-based) marks the triangle anchored at ``(a, b)``.
    """
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    a = [[1, 1], [1, 0]]
    for _ in range(m - 1):
        size = len(a)
        a = [row + row for row in a] + [row + [0] * size for row in a]
    return a


def block_matrix_positions(matrix: Sequence[Sequence[int]]) -> list:
    return sorted((r + 1, c + 1) for r, row in enumerate(matrix) for c, v in enumerate(row) if v)
