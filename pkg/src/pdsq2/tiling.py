"""Lattice-like dominating sets, torus quotients, verification, and search.

A perfect dominating set whose induced components are 4-cycles is the same
thing as a partition of the lattice into translated copies of the 20-cell
closed neighborhood of a 4-cycle (three axis-plane orientations).  This
module builds the lattice-like solution from a generator matrix, folds it
onto finite tori, verifies arbitrary placement sets, and searches tori
exhaustively for all solutions via exact cover.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import dlx
from .errors import (
    CoverCriterionError,
    DifferentTorusError,
    IncompatibleTorusError,
    NotAFourCycleError,
    OverlapError,
)
from .geometry import (
    Cell,
    Shape,
    classify_component,
    closed_neighborhood_shape,
    signed_permutations,
    unit_square,
)
from .groups import Homomorphism, hom_from_generator_matrix, restriction_bijective

PLANES: tuple[tuple[int, int], ...] = ((0, 1), (0, 2), (1, 2))

CANONICAL_GENERATOR = ((1, 0, 3), (0, 2, 5), (0, 0, 10))


@lru_cache(maxsize=None)
def square_offsets(plane_index: int) -> tuple[Cell, ...]:
    """The four 4-cycle cells for a plane orientation, anchored at the origin."""
    return tuple(sorted(unit_square(PLANES[plane_index]).vertices))


@lru_cache(maxsize=None)
def tile_offsets(plane_index: int) -> tuple[Cell, ...]:
    """The 20 cells of the closed neighborhood of an anchored 4-cycle.

    Generated from the 4-cycle itself so there is a single source of truth
    for the tile shape.
    """
    sq = unit_square(PLANES[plane_index])
    return tuple(sorted(closed_neighborhood_shape(sq).vertices))


@dataclass(frozen=True)
class Torus:
    """Finite quotient of the lattice with unit-step adjacency modulo periods."""

    moduli: tuple[int, int, int]

    def __post_init__(self):
        if len(self.moduli) != 3 or any(m < 3 for m in self.moduli):
            raise ValueError("torus needs three moduli, each >= 3")

    @property
    def cell_count(self) -> int:
        m = self.moduli
        return m[0] * m[1] * m[2]

    def wrap(self, cell) -> Cell:
        return tuple(int(c) % m for c, m in zip(cell, self.moduli))

    def index(self, cell) -> int:
        x, y, z = self.wrap(cell)
        m = self.moduli
        return (x * m[1] + y) * m[2] + z

    def cell_of(self, idx: int) -> Cell:
        m = self.moduli
        z = idx % m[2]
        y = (idx // m[2]) % m[1]
        x = idx // (m[1] * m[2])
        return (x, y, z)

    def orientation_valid(self, plane_index: int) -> bool:
        """Whether the 20-cell tile embeds without self-collision or double cover."""
        offs = tile_offsets(plane_index)
        wrapped = {self.wrap(o) for o in offs}
        if len(wrapped) != len(offs):
            return False
        square = {self.wrap(o) for o in square_offsets(plane_index)}
        for off in offs:
            w = self.wrap(off)
            if w in square:
                continue
            hits = 0
            for axis in range(3):
                for sign in (1, -1):
                    nb = list(w)
                    nb[axis] = (nb[axis] + sign) % self.moduli[axis]
                    if tuple(nb) in square:
                        hits += 1
            if hits != 1:
                return False
        return True


@dataclass(frozen=True, order=True)
class Placement:
    """One 4-cycle component on a torus: anchor cell plus plane orientation."""

    anchor: Cell
    plane: int

    def square_cells(self, torus: Torus) -> list[Cell]:
        return [torus.wrap(tuple(a + o for a, o in zip(self.anchor, off)))
                for off in square_offsets(self.plane)]

    def tile_cells(self, torus: Torus) -> list[Cell]:
        return [torus.wrap(tuple(a + o for a, o in zip(self.anchor, off)))
                for off in tile_offsets(self.plane)]

    def to_json(self) -> dict:
        return {"anchor": list(self.anchor), "plane": self.plane}

    @staticmethod
    def from_json(data) -> "Placement":
        return Placement(tuple(data["anchor"]), int(data["plane"]))


@dataclass(frozen=True)
class PdsSolution:
    """A set of component placements on a torus."""

    torus: Torus
    placements: tuple[Placement, ...]

    @staticmethod
    def from_placements(torus: Torus, placements) -> "PdsSolution":
        return PdsSolution(torus, tuple(sorted(placements)))

    def s_cells(self) -> set[Cell]:
        out: set[Cell] = set()
        for p in self.placements:
            out.update(p.square_cells(self.torus))
        return out

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "torus": list(self.torus.moduli),
            "placements": [p.to_json() for p in self.placements],
        }

    @staticmethod
    def from_json(data) -> "PdsSolution":
        torus = Torus(tuple(data["torus"]))
        return PdsSolution.from_placements(
            torus, [Placement.from_json(p) for p in data["placements"]]
        )


@dataclass(frozen=True)
class LatticeLikePds:
    """A dominating set whose components are the base translated by a lattice."""

    base: Shape
    generator: tuple[tuple[int, ...], ...]
    phi: Homomorphism

    @property
    def group_order(self) -> int:
        return self.phi.target.order


def build_lattice_like(base: Shape, matrix) -> LatticeLikePds:
    """Construct the lattice-like solution for a base shape and row lattice.

    Succeeds exactly when the quotient map restricted to the base's closed
    neighborhood is a bijection onto the quotient group (the lattice-tiling
    criterion).  Raises OverlapError when two base cells are congruent modulo
    the lattice, CoverCriterionError when the bijection test fails.
    """
    arr = np.asarray(matrix, dtype=np.int64)
    phi = hom_from_generator_matrix(arr)
    vstar = closed_neighborhood_shape(base)
    if len(vstar) != phi.target.order:
        raise CoverCriterionError(
            f"tile has {len(vstar)} cells but the lattice index is {phi.target.order}"
        )
    images = [phi.apply(v) for v in base.sorted_vertices()]
    if len(set(images)) != len(base):
        raise OverlapError("base shape meets one of its own lattice translates")
    if not restriction_bijective(phi, vstar):
        raise CoverCriterionError("quotient map is not bijective on the closed neighborhood")
    gen = tuple(tuple(int(x) for x in row) for row in arr)
    return LatticeLikePds(base, gen, phi)


def canonical_pds() -> LatticeLikePds:
    """The unique (up to congruence) lattice-like solution with 4-cycle components."""
    return build_lattice_like(unit_square((0, 1)), CANONICAL_GENERATOR)


def materialize_on_torus(pds: LatticeLikePds, torus: Torus) -> PdsSolution:
    """Fold the infinite lattice-like solution onto a compatible torus.

    Every period vector m_i * e_i must lie in the kernel of the quotient map,
    i.e. the order of the i-th generator image must divide m_i.
    """
    extents = classify_component(pds.base)
    if extents is None or sorted(extents) != [1, 2, 2]:
        raise NotAFourCycleError("torus materialization needs a 4-cycle base")
    orders = pds.phi.image_orders()
    for m, order in zip(torus.moduli, orders):
        if m % order != 0:
            raise IncompatibleTorusError(
                f"period {m} is not a multiple of the generator image order {order}"
            )
    base_cells = pds.base.sorted_vertices()
    anchor = base_cells[0]
    plane = _plane_of_square(base_cells)
    anchor_value = pds.phi.apply(anchor)
    placements = []
    for x in range(torus.moduli[0]):
        for y in range(torus.moduli[1]):
            for z in range(torus.moduli[2]):
                if pds.phi.apply((x, y, z)) == anchor_value:
                    placements.append(Placement((x, y, z), plane))
    return PdsSolution.from_placements(torus, placements)


def _plane_of_square(cells) -> int:
    lo = tuple(min(c[i] for c in cells) for i in range(3))
    hi = tuple(max(c[i] for c in cells) for i in range(3))
    axes = tuple(i for i in range(3) if hi[i] > lo[i])
    if len(axes) != 2 or len(cells) != 4:
        raise NotAFourCycleError("cells do not form an axis-plane unit square")
    return PLANES.index(axes)


@dataclass
class PdsReport:
    """Violation report for a placement set; empty lists mean a valid solution."""

    bad_domination: list  # (cell, count) for cells outside S with != 1 neighbors in S
    cross_adjacency: list  # (cell_a, cell_b) S-cells adjacent across components
    overlaps: list  # cells claimed by more than one placement

    def ok(self) -> bool:
        return not (self.bad_domination or self.cross_adjacency or self.overlaps)

    def to_json(self) -> dict:
        return {
            "ok": self.ok(),
            "bad_domination": [[list(c), n] for c, n in self.bad_domination],
            "cross_adjacency": [[list(a), list(b)] for a, b in self.cross_adjacency],
            "overlaps": [list(c) for c in self.overlaps],
        }


def verify_pds(sol: PdsSolution) -> PdsReport:
    """Check the defining properties directly on the torus.

    Violations are data, not errors: every cell outside the set must have
    exactly one neighbor in it, and the set's induced components must be
    exactly the placements (no adjacency across placements, no overlap).
    """
    m = sol.torus.moduli
    comp = np.full(m, -1, dtype=np.int32)
    overlaps = []
    for idx, placement in enumerate(sol.placements):
        for cell in placement.square_cells(sol.torus):
            if comp[cell] >= 0:
                overlaps.append(cell)
            comp[cell] = idx
    in_s = comp >= 0
    neighbor_count = np.zeros(m, dtype=np.int32)
    cross = []
    for axis in range(3):
        for sign in (1, -1):
            shifted = np.roll(in_s, sign, axis=axis)
            neighbor_count += shifted
            shifted_comp = np.roll(comp, sign, axis=axis)
            mask = in_s & shifted & (comp != shifted_comp)
            for cell in zip(*np.nonzero(mask)):
                other = tuple(
                    (c - sign) % mm if ax == axis else c
                    for ax, (c, mm) in enumerate(zip(cell, m))
                )
                pair = tuple(sorted((tuple(int(v) for v in cell), other)))
                cross.append(pair)
    bad = []
    outside_bad = (~in_s) & (neighbor_count != 1)
    for cell in zip(*np.nonzero(outside_bad)):
        cell = tuple(int(v) for v in cell)
        bad.append((cell, int(neighbor_count[cell])))
    return PdsReport(sorted(bad), sorted(set(cross)), sorted(set(overlaps)))


@dataclass
class SearchResult:
    """Outcome of an exhaustive torus search."""

    solutions: list[PdsSolution]
    truncated: bool
    nodes: int
    row_count: int
    symmetry_reduced: bool

    def __iter__(self):
        return iter(self.solutions)

    def __len__(self):
        return len(self.solutions)


def _torus_rows(torus: Torus) -> list[Placement]:
    """All valid tile placements on the torus, in deterministic order."""
    placements = []
    for idx in range(torus.cell_count):
        anchor = torus.cell_of(idx)
        for plane in range(3):
            if torus.orientation_valid(plane):
                placements.append(Placement(anchor, plane))
    return placements


def exact_cover_search(
    torus: Torus,
    cap: int | None = None,
    symmetry_reduction: bool = False,
    use_numba: bool | None = None,
) -> SearchResult:
    """All partitions of the torus into 20-cell tiles, i.e. all solutions.

    With ``symmetry_reduction`` the placement anchored at the origin in the
    first axis plane is committed up front.  Every solution class has a
    representative containing that placement (translate the tile covering the
    origin cell there, then rotate its plane into position), so the reduced
    search still witnesses every equivalence class; raw solution counts refer
    to the reduced space.  Results are sorted, deterministically.
    """
    n_cells = torus.cell_count
    if n_cells % 20 != 0:
        return SearchResult([], False, 0, 0, symmetry_reduction)
    placements = _torus_rows(torus)
    rows = [[torus.index(c) for c in p.tile_cells(torus)] for p in placements]
    forced: tuple[int, ...] = ()
    if symmetry_reduction:
        target = Placement((0, 0, 0), 0)
        try:
            forced = (placements.index(target),)
        except ValueError:
            return SearchResult([], False, 0, len(rows), symmetry_reduction)
    cap_value = cap if cap is not None else 10000
    raw, truncated, nodes = dlx.solve_exact_cover(
        n_cells, rows, cap=cap_value, forced_rows=forced, use_numba=use_numba
    )
    solutions = [
        PdsSolution.from_placements(torus, [placements[r] for r in row_ids])
        for row_ids in raw
    ]
    solutions.sort(key=lambda s: tuple(s.placements))
    return SearchResult(solutions, truncated, nodes, len(rows), symmetry_reduction)


def _compatible_isometries(torus: Torus):
    """Signed permutations that act on the torus (permuted axes share moduli)."""
    m = torus.moduli
    return [
        iso
        for iso in signed_permutations(3)
        if all(m[iso.perm[i]] == m[i] for i in range(3))
    ]


def _transform_placement(p: Placement, iso, torus: Torus) -> Placement:
    cells = [torus.wrap(iso.apply(c)) for c in p.square_cells(torus)]
    cell_set = set(cells)
    m = torus.moduli
    for c in cells:
        sq_axes = []
        for axis in range(3):
            nb = list(c)
            nb[axis] = (nb[axis] + 1) % m[axis]
            if tuple(nb) in cell_set:
                sq_axes.append(axis)
        if len(sq_axes) == 2:
            diag = list(c)
            diag[sq_axes[0]] = (diag[sq_axes[0]] + 1) % m[sq_axes[0]]
            diag[sq_axes[1]] = (diag[sq_axes[1]] + 1) % m[sq_axes[1]]
            if tuple(diag) in cell_set:
                return Placement(c, PLANES.index(tuple(sq_axes)))
    raise ValueError("transformed cells do not form a unit square")


def _placement_code(p: Placement, torus: Torus) -> int:
    return torus.index(p.anchor) * 3 + p.plane


def solution_canonical_key(sol: PdsSolution) -> tuple[int, ...]:
    """Invariant under torus translation and compatible signed permutations.

    For each symmetry image, every anchor is tried as the translation that
    moves it to the origin; the lexicographically least sorted code list over
    all choices is the key.  Two solutions on one torus are equivalent
    exactly when their keys agree.
    """
    torus = sol.torus
    m = torus.moduli
    mod = np.array(m, dtype=np.int64)
    best: tuple[int, ...] | None = None
    for iso in _compatible_isometries(torus):
        placed = [_transform_placement(p, iso, torus) for p in sol.placements]
        if not placed:
            return ()
        anchors = np.array([p.anchor for p in placed], dtype=np.int64)
        planes = np.array([p.plane for p in placed], dtype=np.int64)
        # only shifts that send a least-plane anchor to the origin can win
        shifts = anchors[planes == planes.min()]
        moved = (anchors[None, :, :] - shifts[:, None, :]) % mod
        codes = ((moved[..., 0] * m[1] + moved[..., 1]) * m[2] + moved[..., 2]) * 3
        codes = codes + planes[None, :]
        codes.sort(axis=1)
        first = codes[np.lexsort(codes.T[::-1])[0]]
        candidate = tuple(int(c) for c in first)
        if best is None or candidate < best:
            best = candidate
    return best if best is not None else ()


def solution_equivalent(a: PdsSolution, b: PdsSolution) -> bool:
    """Whether a translation plus signed permutation maps one set onto the other."""
    if a.torus != b.torus:
        raise DifferentTorusError("solutions live on different tori")
    return solution_canonical_key(a) == solution_canonical_key(b)


def equivalence_classes(solutions: list[PdsSolution]) -> list[list[PdsSolution]]:
    """Group solutions by canonical key, preserving deterministic order."""
    buckets: dict[tuple[int, ...], list[PdsSolution]] = {}
    for sol in solutions:
        buckets.setdefault(solution_canonical_key(sol), []).append(sol)
    return [buckets[k] for k in sorted(buckets)]
