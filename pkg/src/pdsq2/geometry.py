"""Geometry of the unit-distance graph on the integer lattice.

Vertices are integer tuples; two vertices are adjacent when they differ by
one unit step along a single axis.  This module provides finite vertex sets
(shapes) with induced edges, closed neighborhoods, axis-box classification,
the hyperoctahedral symmetry group (signed axis permutations), and canonical
forms under that group.

Everything here is an immutable value; all operations are pure functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import EmptyShapeError, NotConnectedError

Cell = tuple[int, ...]


@lru_cache(maxsize=None)
def unit_steps(n: int) -> tuple[Cell, ...]:
    """The 2n signed unit vectors of Z^n, in a fixed deterministic order."""
    steps = []
    for axis in range(n):
        for sign in (1, -1):
            step = [0] * n
            step[axis] = sign
            steps.append(tuple(step))
    return tuple(steps)


def neighbors(cell: Cell) -> list[Cell]:
    """The 2n lattice neighbors of a cell."""
    return [tuple(c + s for c, s in zip(cell, step)) for step in unit_steps(len(cell))]


def add(a: Cell, b: Cell) -> Cell:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Cell, b: Cell) -> Cell:
    return tuple(x - y for x, y in zip(a, b))


def scale(a: Cell, k: int) -> Cell:
    return tuple(k * x for x in a)


def l1_distance(a: Cell, b: Cell) -> int:
    return sum(abs(x - y) for x, y in zip(a, b))


def is_adjacent(a: Cell, b: Cell) -> bool:
    return l1_distance(a, b) == 1


@dataclass(frozen=True)
class Isometry:
    """A signed axis permutation followed by a translation.

    ``apply`` sends x to sign * x[perm] + shift componentwise, i.e. output
    axis i reads ``signs[i] * x[perm[i]] + shift[i]``.  These maps are exactly
    the isometries of the unit-distance graph that fix the axis directions
    setwise, so they preserve adjacency.
    """

    perm: tuple[int, ...]
    signs: tuple[int, ...]
    shift: Cell

    @staticmethod
    def identity(n: int) -> "Isometry":
        return Isometry(tuple(range(n)), (1,) * n, (0,) * n)

    def apply(self, cell: Cell) -> Cell:
        return tuple(s * cell[p] + t for p, s, t in zip(self.perm, self.signs, self.shift))

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other: (self.compose(other)).apply(x) == self.apply(other.apply(x))."""
        n = len(self.perm)
        perm = tuple(other.perm[self.perm[i]] for i in range(n))
        signs = tuple(self.signs[i] * other.signs[self.perm[i]] for i in range(n))
        shift = tuple(
            self.signs[i] * other.shift[self.perm[i]] + self.shift[i] for i in range(n)
        )
        return Isometry(perm, signs, shift)

    def inverse(self) -> "Isometry":
        n = len(self.perm)
        inv_perm = [0] * n
        for i, p in enumerate(self.perm):
            inv_perm[p] = i
        signs = tuple(self.signs[inv_perm[a]] for a in range(n))
        shift = tuple(-signs[a] * self.shift[inv_perm[a]] for a in range(n))
        return Isometry(tuple(inv_perm), signs, shift)


@lru_cache(maxsize=None)
def signed_permutations(n: int) -> tuple[Isometry, ...]:
    """All 2^n * n! signed axis permutations (no translation part)."""
    out = []
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1, -1), repeat=n):
            out.append(Isometry(perm, signs, (0,) * n))
    return tuple(out)


class Shape:
    """A finite vertex set with the induced unit-distance edges.

    Edges are always derived from the vertex set, never stored, so two shapes
    are equal exactly when their vertex sets are equal.
    """

    __slots__ = ("vertices", "n")

    def __init__(self, vertices):
        cells = frozenset(tuple(int(c) for c in v) for v in vertices)
        if not cells:
            raise EmptyShapeError("shape needs at least one vertex")
        dims = {len(v) for v in cells}
        if len(dims) != 1:
            raise ValueError("mixed dimensions in vertex set")
        object.__setattr__(self, "vertices", cells)
        object.__setattr__(self, "n", dims.pop())

    def __setattr__(self, *a):
        raise AttributeError("Shape is immutable")

    def __eq__(self, other):
        return isinstance(other, Shape) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, cell):
        return tuple(cell) in self.vertices

    def __iter__(self):
        return iter(self.sorted_vertices())

    def __repr__(self):
        return f"Shape({self.sorted_vertices()})"

    def sorted_vertices(self) -> list[Cell]:
        return sorted(self.vertices)

    def edges(self) -> list[tuple[Cell, Cell]]:
        """Unit-distance pairs inside the vertex set, each listed once."""
        out = []
        for v in self.sorted_vertices():
            for w in neighbors(v):
                if w in self.vertices and v < w:
                    out.append((v, w))
        return out

    def translate(self, z: Cell) -> "Shape":
        return Shape(add(v, z) for v in self.vertices)

    def transform(self, iso: Isometry) -> "Shape":
        return Shape(iso.apply(v) for v in self.vertices)

    def bounding_box(self) -> tuple[Cell, Cell]:
        lo = tuple(min(v[i] for v in self.vertices) for i in range(self.n))
        hi = tuple(max(v[i] for v in self.vertices) for i in range(self.n))
        return lo, hi

    def is_connected(self) -> bool:
        todo = [next(iter(self.vertices))]
        seen = {todo[0]}
        while todo:
            v = todo.pop()
            for w in neighbors(v):
                if w in self.vertices and w not in seen:
                    seen.add(w)
                    todo.append(w)
        return len(seen) == len(self.vertices)

    def to_json(self) -> list[list[int]]:
        return [list(v) for v in self.sorted_vertices()]

    @staticmethod
    def from_json(data) -> "Shape":
        return Shape(tuple(v) for v in data)


def unit_square(axes: tuple[int, int], anchor: Cell | None = None, n: int = 3) -> Shape:
    """The 4-cycle {a, a+e_i, a+e_j, a+e_i+e_j} in the (i, j) axis plane."""
    i, j = axes
    if anchor is None:
        anchor = (0,) * n
    ei = tuple(1 if k == i else 0 for k in range(n))
    ej = tuple(1 if k == j else 0 for k in range(n))
    return Shape([anchor, add(anchor, ei), add(anchor, ej), add(add(anchor, ei), ej)])


def closed_neighborhood_shape(theta: Shape) -> Shape:
    """All vertices at graph distance at most 1 from the shape, induced edges.

    For a 4-cycle in Z^3 this is the 20-vertex tile that a perfect dominating
    set with 4-cycle components partitions the lattice into.
    """
    cells = set(theta.vertices)
    for v in theta.vertices:
        cells.update(neighbors(v))
    return Shape(cells)


def classify_component(shape: Shape) -> tuple[int, ...] | None:
    """Axis-box extents (i_1, ..., i_n) when the shape is a full integer box.

    Returns None when the vertex set is not a box (product of paths).  A unit
    square in the first two axes of Z^3 classifies as (2, 2, 1).
    """
    if not shape.is_connected():
        raise NotConnectedError("component classification needs a connected shape")
    lo, hi = shape.bounding_box()
    extents = tuple(h - l + 1 for l, h in zip(lo, hi))
    count = 1
    for e in extents:
        count *= e
    if count != len(shape):
        return None
    for cell in itertools.product(*(range(l, h + 1) for l, h in zip(lo, hi))):
        if cell not in shape.vertices:
            return None
    return extents


def canonical_form(shape: Shape) -> Shape:
    """Least representative of the shape's orbit under signed permutations.

    Every image under the 2^n n! signed axis permutations is translated so its
    minimum corner sits at the origin; the lexicographically least sorted
    vertex list wins.  Two shapes are congruent under signed permutations and
    translations exactly when their canonical forms are equal.
    """
    best = None
    for iso in signed_permutations(shape.n):
        cells = [iso.apply(v) for v in shape.vertices]
        lo = tuple(min(c[i] for c in cells) for i in range(shape.n))
        moved = sorted(sub(c, lo) for c in cells)
        if best is None or moved < best:
            best = moved
    return Shape(best)


@dataclass(frozen=True)
class BoxPatch:
    """An axis-aligned box of cells given by inclusive corner bounds."""

    lo: Cell
    hi: Cell

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("corner dimension mismatch")
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValueError("lo must be <= hi componentwise")

    @property
    def n(self) -> int:
        return len(self.lo)

    def extents(self) -> tuple[int, ...]:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    def cell_count(self) -> int:
        count = 1
        for e in self.extents():
            count *= e
        return count

    def __contains__(self, cell) -> bool:
        return all(l <= c <= h for l, c, h in zip(self.lo, tuple(cell), self.hi))

    def cells(self) -> list[Cell]:
        return list(itertools.product(*(range(l, h + 1) for l, h in zip(self.lo, self.hi))))

    def corners(self) -> list[Cell]:
        return sorted(itertools.product(*((l, h) if l != h else (l,) for l, h in zip(self.lo, self.hi))))

    def expand(self, margin: int) -> "BoxPatch":
        return BoxPatch(
            tuple(l - margin for l in self.lo),
            tuple(h + margin for h in self.hi),
        )

    def interior_contains(self, cell: Cell, margin: int) -> bool:
        return all(l + margin <= c <= h - margin for l, c, h in zip(self.lo, cell, self.hi))
