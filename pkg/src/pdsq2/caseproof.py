"""Forced-domination propagation over finite patches.

The engine works on partial configurations: every cell of a finite box is
committed to the dominating set (InS), committed outside it (OutS), or open.
InS cells must group into 4-cycle components; every OutS cell whose full
neighborhood lies in the patch must end up with exactly one InS neighbor.

Propagation applies four rule families to a fixpoint:

* R1 (dominator uniqueness, forcing in): an OutS cell with no InS neighbor
  and exactly one non-OutS neighbor forces that neighbor into the set.
* R2 (dominator uniqueness, forcing out): once an OutS cell has its
  dominator, every other open neighbor is forced out; the closed
  neighborhood of a committed component, minus the cells its completions
  could still claim, is likewise forced out (the component's 20-cell tile
  territory is settled there).
* R3 (completability): an incomplete component narrows over its candidate
  4-cycle completions; candidates that would double-dominate an already
  dominated cell, or merge two components, are discarded.  A unique
  candidate commits; cells shared by all candidates commit individually.
* R4 (exhaustion): an open cell with no surviving 4-cycle placement through
  it is forced out; a component with no completion, or an OutS cell with no
  possible dominator, is a contradiction.

Configurations may also carry edge-domination constraints: designated edges
whose two endpoints must be dominated by the two ends of a single parallel
edge of the set (the matched-pair frame used by the local case analysis).
Each such constraint keeps a candidate list of the four parallel translates
and contradicts when the list empties.

Every applied rule is logged as a deduction with enough context to recheck
it against the evolving configuration, so certificates replay without the
scheduler (see ``replay_certificate``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    CertificateFormatError,
    InconsistentSeedError,
    NotAFourCycleError,
)
from .geometry import (
    BoxPatch,
    Cell,
    Isometry,
    Shape,
    add,
    classify_component,
    closed_neighborhood_shape,
    neighbors,
    signed_permutations,
    sub,
    unit_square,
)

PLANE_AXES = ((0, 1), (0, 2), (1, 2))


# ---------------------------------------------------------------------------
# Shapes of the local analysis


def theta_prime(theta: Shape) -> BoxPatch:
    """The 4x4x3 box swept out by the closed neighborhood of a 4-cycle."""
    extents = None
    try:
        extents = classify_component(theta)
    except Exception:
        extents = None
    if extents is None or sorted(extents) != [1, 2, 2]:
        raise NotAFourCycleError("expected a unit 4-cycle")
    star = closed_neighborhood_shape(theta)
    lo, hi = star.bounding_box()
    return BoxPatch(lo, hi)


def squares_through(cell: Cell) -> list[frozenset[Cell]]:
    """All twelve 4-cycles containing a cell, in deterministic order."""
    out = []
    for i, j in PLANE_AXES:
        ei = tuple(1 if k == i else 0 for k in range(3))
        ej = tuple(1 if k == j else 0 for k in range(3))
        for di in (0, -1):
            for dj in (0, -1):
                anchor = add(cell, add(tuple(di * x for x in ei), tuple(dj * x for x in ej)))
                out.append(frozenset({
                    anchor, add(anchor, ei), add(anchor, ej), add(add(anchor, ei), ej)
                }))
    return out


def squares_containing(cells) -> list[frozenset[Cell]]:
    """All 4-cycles containing every given cell."""
    cells = set(cells)
    first = min(cells)
    return [sq for sq in squares_through(first) if cells <= sq]


def fits_in_square(cells) -> bool:
    """Whether a cell set is a subset of some unit 4-cycle."""
    cells = set(cells)
    if len(cells) > 4:
        return False
    lo = tuple(min(c[i] for c in cells) for i in range(3))
    hi = tuple(max(c[i] for c in cells) for i in range(3))
    ext = [h - l for l, h in zip(lo, hi)]
    return all(e <= 1 for e in ext) and sum(e == 1 for e in ext) <= 2


def enumerate_one_factors(region) -> list[frozenset[tuple[Cell, Cell]]]:
    """All perfect matchings of the unit-distance graph on a cell set.

    Deterministic order: the least uncovered cell is matched against its
    available neighbors in lexicographic order.  An odd region has none.
    """
    cells = sorted(set(tuple(c) for c in region))
    if len(cells) % 2 != 0:
        return []
    cell_set = set(cells)
    out: list[frozenset[tuple[Cell, Cell]]] = []
    edges: list[tuple[Cell, Cell]] = []
    used: set[Cell] = set()

    def rec():
        free = [c for c in cells if c not in used]
        if not free:
            out.append(frozenset(edges))
            return
        v = free[0]
        for w in sorted(neighbors(v)):
            if w in cell_set and w not in used and w > v or (w in cell_set and w not in used and w < v):
                pass
        for w in sorted(neighbors(v)):
            if w in cell_set and w not in used:
                used.add(v)
                used.add(w)
                edges.append((v, w) if v < w else (w, v))
                rec()
                edges.pop()
                used.discard(v)
                used.discard(w)

    rec()
    return out


# ---------------------------------------------------------------------------
# Partial configurations


@dataclass
class EdgeConstraint:
    """The two cells of ``edge`` must be dominated by one parallel set edge."""

    edge: tuple[Cell, Cell]
    satisfied: bool = False

    def axis(self) -> int:
        diff = sub(self.edge[1], self.edge[0])
        return next(i for i, d in enumerate(diff) if d != 0)


@dataclass
class Contradiction:
    kind: str  # UndominatedVertex | DoublyDominatedVertex | NoOneFactor | NoValidComponentExtension
    witness: tuple  # cell, edge pair, or component cell tuple
    detail: str = ""


@dataclass
class Deduction:
    kind: str  # ForcedInS | ForcedOutS | ForcedEdge | ForcedComponent
    cells: tuple[Cell, ...]
    reason: dict


class PartialConfig:
    """Mutable working state for propagation; copy before branching."""

    def __init__(self, patch: BoxPatch):
        self.patch = patch
        self.in_s: set[Cell] = set()
        self.out_s: set[Cell] = set()
        self.edge_constraints: list[EdgeConstraint] = []
        self.contradiction: Optional[Contradiction] = None

    def copy(self) -> "PartialConfig":
        dup = PartialConfig(self.patch)
        dup.in_s = set(self.in_s)
        dup.out_s = set(self.out_s)
        dup.edge_constraints = [EdgeConstraint(ec.edge, ec.satisfied) for ec in self.edge_constraints]
        dup.contradiction = self.contradiction
        return dup

    # -- derived structure -------------------------------------------------

    def status(self, cell: Cell) -> str:
        if cell in self.in_s:
            return "in"
        if cell in self.out_s:
            return "out"
        return "open"

    def components(self) -> list[frozenset[Cell]]:
        """Connected groups of InS cells, sorted by least cell."""
        seen: set[Cell] = set()
        comps = []
        for cell in sorted(self.in_s):
            if cell in seen:
                continue
            todo = [cell]
            comp = {cell}
            seen.add(cell)
            while todo:
                v = todo.pop()
                for w in neighbors(v):
                    if w in self.in_s and w not in seen:
                        seen.add(w)
                        comp.add(w)
                        todo.append(w)
            comps.append(frozenset(comp))
        return comps

    def component_of(self, cell: Cell) -> frozenset[Cell]:
        todo = [cell]
        comp = {cell}
        while todo:
            v = todo.pop()
            for w in neighbors(v):
                if w in self.in_s and w not in comp:
                    comp.add(w)
                    todo.append(w)
        return frozenset(comp)

    def dominator_of(self, cell: Cell) -> Optional[Cell]:
        """The InS neighbor of an OutS cell, when it already has one."""
        hits = [w for w in neighbors(cell) if w in self.in_s]
        return hits[0] if len(hits) == 1 else (hits[0] if hits else None)

    def is_dominated(self, cell: Cell) -> bool:
        return any(w in self.in_s for w in neighbors(cell))

    # -- assignments (with local consistency checks) -----------------------

    def assign_out(self, cell: Cell) -> Optional[Contradiction]:
        if cell in self.in_s:
            return Contradiction("NoValidComponentExtension", (cell,), "cell forced both ways")
        if cell in self.out_s:
            return None
        self.out_s.add(cell)
        hits = [w for w in neighbors(cell) if w in self.in_s]
        if len(hits) > 1:
            return Contradiction("DoublyDominatedVertex", (cell,), "outside cell with two set neighbors")
        return None

    def assign_in(self, cell: Cell) -> Optional[Contradiction]:
        if cell in self.out_s:
            return Contradiction("UndominatedVertex", (cell,), "cell forced both ways")
        if cell in self.in_s:
            return None
        self.in_s.add(cell)
        comp = self.component_of(cell)
        if not fits_in_square(comp):
            return Contradiction("NoValidComponentExtension", tuple(sorted(comp)), "component cannot lie in one 4-cycle")
        for w in neighbors(cell):
            if w in self.out_s:
                hits = [u for u in neighbors(w) if u in self.in_s]
                if len(hits) > 1:
                    return Contradiction("DoublyDominatedVertex", (w,), "outside cell with two set neighbors")
        return None


# ---------------------------------------------------------------------------
# Candidate enumeration (shared by the prover and the replay checker)


def completion_candidates(config: PartialConfig, comp) -> list[frozenset[Cell]]:
    """Valid 4-cycles extending a committed component (or through open cells).

    A candidate is rejected when one of its new cells is committed out,
    touches a different component, or would hand a second dominator to an
    OutS cell that already has one.
    """
    comp = frozenset(comp)
    if len(comp) == 4:
        return []
    out = []
    for sq in squares_containing(comp):
        if _square_consistent(config, comp, sq):
            out.append(sq)
    return out


def _square_consistent(config: PartialConfig, comp: frozenset, sq: frozenset) -> bool:
    for q in sorted(sq - comp):
        if q in config.out_s:
            return False
        if q in config.in_s:
            # a foreign committed cell may only appear if its whole component
            # fits inside this candidate
            if not config.component_of(q) <= sq:
                return False
            continue
        for w in neighbors(q):
            if w in sq:
                continue
            if w in config.in_s:
                return False  # would merge with a neighboring component
            if w in config.out_s and config.is_dominated(w):
                return False  # would give w a second dominator
    return True


def placement_candidates(config: PartialConfig, cell: Cell) -> list[frozenset[Cell]]:
    """Valid 4-cycles through a single cell (12 geometric candidates)."""
    base = config.component_of(cell) if cell in config.in_s else frozenset({cell})
    out = []
    for sq in squares_through(cell):
        if base <= sq and _square_consistent(config, base & sq if base <= sq else frozenset(), sq):
            out.append(sq)
    return out


def dominator_candidates(config: PartialConfig, cell: Cell) -> list[Cell]:
    """Neighbors that could still dominate an OutS cell (InS or open)."""
    return [w for w in sorted(neighbors(cell)) if w not in config.out_s]


def edge_domination_candidates(config: PartialConfig, ec: EdgeConstraint) -> list[frozenset[Cell]]:
    """Surviving parallel translates that could dominate a constrained edge.

    The dominating pair must be a translate of the edge by one unit step
    perpendicular to it; a candidate dies when a cell is committed out, when
    it would merge into a component that cannot absorb it, or when its
    closed neighborhood would re-dominate an already dominated cell.
    """
    x, y = ec.edge
    axis = ec.axis()
    out = []
    for delta_axis in range(3):
        if delta_axis == axis:
            continue
        for sign in (1, -1):
            step = tuple(sign if k == delta_axis else 0 for k in range(3))
            c1, c2 = add(x, step), add(y, step)
            pair = frozenset({c1, c2})
            # respect dominators that are already settled
            dx = [w for w in neighbors(x) if w in config.in_s]
            dy = [w for w in neighbors(y) if w in config.in_s]
            if dx and c1 not in dx:
                continue
            if dy and c2 not in dy:
                continue
            if _edge_pair_consistent(config, pair, ec.edge):
                out.append(pair)
    return out


def _edge_pair_consistent(config: PartialConfig, pair: frozenset, edge) -> bool:
    edge_cells = set(edge)
    committed = pair & config.in_s
    if any(c in config.out_s for c in pair):
        return False
    # the pair plus any touched components must still fit one 4-cycle
    cluster = set(pair)
    for c in pair:
        for w in neighbors(c):
            if w in config.in_s:
                cluster |= config.component_of(w)
    if not fits_in_square(cluster):
        return False
    if cluster & config.out_s:
        return False
    for c in sorted(pair - committed):
        for w in neighbors(c):
            if w in pair or w in cluster:
                continue
            if w in edge_cells:
                continue  # these are the cells the pair is meant to dominate
            if w in config.out_s and config.is_dominated(w):
                return False
    return True


# ---------------------------------------------------------------------------
# The propagation engine


@dataclass
class PropagationResult:
    config: PartialConfig
    deductions: list[Deduction]
    contradiction: Optional[Contradiction]


DEFAULT_RULE_ORDER = ("bound", "spread", "no_placement", "unique_dominator", "completion", "edge")


def propagate(config: PartialConfig, rule_order=DEFAULT_RULE_ORDER, log: Optional[list] = None) -> PropagationResult:
    """Apply the forced rules to a fixpoint or a contradiction.

    One deduction is applied per iteration, chosen by scanning the rule
    families in ``rule_order`` (cells in lexicographic order inside each
    family), which makes the log deterministic.  The fixpoint itself does
    not depend on the order, only the log does.
    """
    config = config.copy()
    deductions: list[Deduction] = [] if log is None else log
    if config.contradiction is not None:
        return PropagationResult(config, deductions, config.contradiction)
    while True:
        step = _find_deduction(config, rule_order)
        if step is None:
            return PropagationResult(config, deductions, None)
        if isinstance(step, Contradiction):
            config.contradiction = step
            return PropagationResult(config, deductions, step)
        contradiction = apply_deduction(config, step)
        deductions.append(step)
        if contradiction is not None:
            config.contradiction = contradiction
            return PropagationResult(config, deductions, contradiction)


def apply_deduction(config: PartialConfig, ded: Deduction) -> Optional[Contradiction]:
    """Apply one logged deduction to the configuration."""
    if ded.kind == "ForcedOutS":
        return config.assign_out(ded.cells[0])
    if ded.kind == "ForcedInS":
        return config.assign_in(ded.cells[0])
    if ded.kind in ("ForcedEdge", "ForcedComponent"):
        for cell in ded.cells:
            bad = config.assign_in(cell)
            if bad is not None:
                return bad
        if ded.kind == "ForcedEdge":
            for ec in config.edge_constraints:
                if not ec.satisfied and set(ded.reason.get("edge", ())) == set(ec.edge):
                    ec.satisfied = True
        return None
    raise CertificateFormatError(f"unknown deduction kind {ded.kind!r}")


def _find_deduction(config: PartialConfig, rule_order):
    comps = config.components()
    for comp in comps:
        if len(comp) > 4 or not fits_in_square(comp):
            return Contradiction("NoValidComponentExtension", tuple(sorted(comp)), "component exceeds a 4-cycle")
    for rule in rule_order:
        found = _RULES[rule](config, comps)
        if found is not None:
            return found
    return None


def _cells_near_components(config: PartialConfig, comps):
    near: set[Cell] = set()
    for comp in comps:
        for c in comp:
            near.update(neighbors(c))
    return near


def _rule_bound(config: PartialConfig, comps):
    """Tile territory: neighbors of a component no completion can claim are out."""
    for comp in comps:
        if len(comp) < 4:
            reachable: set[Cell] = set()
            for sq in completion_candidates(config, comp):
                reachable |= sq
        else:
            reachable = set(comp)
        for cell in sorted(_neighbor_shell(comp)):
            if cell in reachable or cell not in config.patch:
                continue
            if cell not in config.out_s and cell not in config.in_s:
                return Deduction(
                    "ForcedOutS", (cell,),
                    {"rule": "bound", "component": _cells_json(comp)},
                )
    return None


def _neighbor_shell(comp) -> set[Cell]:
    shell: set[Cell] = set()
    for c in comp:
        shell.update(neighbors(c))
    return shell - set(comp)


def _rule_spread(config: PartialConfig, comps):
    """A dominated OutS cell settles all of its other neighbors to out."""
    for w in sorted(config.out_s):
        dom = [u for u in neighbors(w) if u in config.in_s]
        if len(dom) != 1:
            continue
        for u in sorted(neighbors(w)):
            if u != dom[0] and u not in config.out_s and u not in config.in_s and u in config.patch:
                return Deduction(
                    "ForcedOutS", (u,),
                    {"rule": "second_dominator", "dominated_cell": list(w)},
                )
    return None


def _rule_no_placement(config: PartialConfig, comps):
    """An open cell with no surviving 4-cycle through it cannot be in the set."""
    decided = config.in_s | config.out_s
    frontier: set[Cell] = set()
    for cell in decided:
        for w in neighbors(cell):
            if w not in decided and w in config.patch:
                frontier.add(w)
                for w2 in neighbors(w):
                    if w2 not in decided and w2 in config.patch:
                        frontier.add(w2)
    for cell in sorted(frontier):
        if not placement_candidates(config, cell):
            return Deduction("ForcedOutS", (cell,), {"rule": "no_placement"})
    return None


def _rule_unique_dominator(config: PartialConfig, comps):
    """R1 plus the undominated contradiction for fully enclosed OutS cells."""
    for v in sorted(config.out_s):
        if any(not (w in config.patch) for w in neighbors(v)):
            continue
        if any(w in config.in_s for w in neighbors(v)):
            continue
        cands = [w for w in sorted(neighbors(v)) if w not in config.out_s]
        if not cands:
            return Contradiction("UndominatedVertex", (v,), "no neighbor can dominate this cell")
        if len(cands) == 1:
            return Deduction(
                "ForcedInS", (cands[0],),
                {"rule": "unique_dominator", "dominated_cell": list(v)},
            )
    return None


def _rule_completion(config: PartialConfig, comps):
    """Narrow incomplete components over their completion candidates."""
    for comp in comps:
        if len(comp) >= 4:
            continue
        cands = completion_candidates(config, comp)
        if not cands:
            return Contradiction(
                "NoValidComponentExtension", tuple(sorted(comp)),
                "no 4-cycle completion remains",
            )
        if len(cands) == 1:
            new_cells = tuple(sorted(cands[0] - comp))
            if any(c not in config.patch for c in new_cells):
                continue
            return Deduction(
                "ForcedComponent", new_cells,
                {"rule": "unique_completion", "component": _cells_json(comp)},
            )
        core = set.intersection(*(set(sq) for sq in cands)) - set(comp)
        for cell in sorted(core):
            if cell in config.patch:
                return Deduction(
                    "ForcedInS", (cell,),
                    {"rule": "completion_core", "component": _cells_json(comp)},
                )
    return None


def _rule_edge(config: PartialConfig, comps):
    """Narrow edge-domination constraints over their parallel translates."""
    for ec in config.edge_constraints:
        if ec.satisfied:
            continue
        x, y = ec.edge
        if config.is_dominated(x) and config.is_dominated(y):
            ec.satisfied = True
            continue
        cands = edge_domination_candidates(config, ec)
        if not cands:
            return Contradiction(
                "UndominatedVertex", (x, y),
                "no parallel edge of the set can dominate this edge",
            )
        if len(cands) == 1:
            pair = tuple(sorted(cands[0]))
            if any(c not in config.patch for c in pair):
                continue
            return Deduction(
                "ForcedEdge", pair,
                {"rule": "edge_domination", "edge": [list(x), list(y)]},
            )
    return None


_RULES = {
    "bound": _rule_bound,
    "spread": _rule_spread,
    "no_placement": _rule_no_placement,
    "unique_dominator": _rule_unique_dominator,
    "completion": _rule_completion,
    "edge": _rule_edge,
}


def _cells_json(cells) -> list[list[int]]:
    return [list(c) for c in sorted(cells)]


# ---------------------------------------------------------------------------
# Seeds and certificates


@dataclass
class SeedSpec:
    """Self-contained description of a starting configuration."""

    patch_lo: Cell
    patch_hi: Cell
    components: list[list[Cell]] = field(default_factory=list)
    in_cells: list[Cell] = field(default_factory=list)
    out_cells: list[Cell] = field(default_factory=list)
    edges: list[tuple[Cell, Cell]] = field(default_factory=list)
    one_factor_regions: list[list[Cell]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def build(self) -> PartialConfig:
        config = PartialConfig(BoxPatch(tuple(self.patch_lo), tuple(self.patch_hi)))
        for group in self.components:
            for cell in group:
                if config.assign_in(tuple(cell)) is not None:
                    raise InconsistentSeedError(f"component cell {cell} inconsistent")
        for cell in self.in_cells:
            if config.assign_in(tuple(cell)) is not None:
                raise InconsistentSeedError(f"in cell {cell} inconsistent")
        for cell in self.out_cells:
            if config.assign_out(tuple(cell)) is not None:
                raise InconsistentSeedError(f"out cell {cell} inconsistent")
        for group in self.components:
            comp = config.component_of(tuple(group[0]))
            if comp != frozenset(tuple(c) for c in group):
                raise InconsistentSeedError("seeded components merged unexpectedly")
        for x, y in self.edges:
            x, y = tuple(x), tuple(y)
            if sum(abs(a - b) for a, b in zip(x, y)) != 1:
                raise InconsistentSeedError("edge constraint cells are not adjacent")
            config.edge_constraints.append(EdgeConstraint((x, y)))
        return config

    def to_json(self) -> dict:
        return {
            "patch": {"lo": list(self.patch_lo), "hi": list(self.patch_hi)},
            "components": [[list(c) for c in grp] for grp in self.components],
            "in_cells": [list(c) for c in self.in_cells],
            "out_cells": [list(c) for c in self.out_cells],
            "edges": [[list(x), list(y)] for x, y in self.edges],
            "one_factor_regions": [[list(c) for c in r] for r in self.one_factor_regions],
            "notes": list(self.notes),
        }

    @staticmethod
    def from_json(data) -> "SeedSpec":
        return SeedSpec(
            patch_lo=tuple(data["patch"]["lo"]),
            patch_hi=tuple(data["patch"]["hi"]),
            components=[[tuple(c) for c in grp] for grp in data.get("components", [])],
            in_cells=[tuple(c) for c in data.get("in_cells", [])],
            out_cells=[tuple(c) for c in data.get("out_cells", [])],
            edges=[(tuple(x), tuple(y)) for x, y in data.get("edges", [])],
            one_factor_regions=[[tuple(c) for c in r] for r in data.get("one_factor_regions", [])],
            notes=list(data.get("notes", [])),
        )


@dataclass
class Certificate:
    """A replayable deduction log ending in a contradiction or a fixpoint."""

    name: str
    seed: SeedSpec
    deductions: list[Deduction]
    outcome: dict  # {"result": "contradiction"|"fixpoint", "kind": ..., "witness": ...}
    notes: list[str] = field(default_factory=list)
    schema_version: int = 1

    def is_contradiction(self) -> bool:
        return self.outcome.get("result") == "contradiction"

    def witness(self):
        w = self.outcome.get("witness")
        if w is None:
            return None
        return tuple(tuple(c) for c in w)

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "name": self.name,
            "seed": self.seed.to_json(),
            "deductions": [
                {"kind": d.kind, "cells": [list(c) for c in d.cells], "reason": d.reason}
                for d in self.deductions
            ],
            "outcome": self.outcome,
            "notes": list(self.notes),
        }

    @staticmethod
    def from_json(data) -> "Certificate":
        try:
            deds = [
                Deduction(d["kind"], tuple(tuple(c) for c in d["cells"]), d["reason"])
                for d in data["deductions"]
            ]
            return Certificate(
                name=data.get("name", ""),
                seed=SeedSpec.from_json(data["seed"]),
                deductions=deds,
                outcome=data["outcome"],
                notes=list(data.get("notes", [])),
                schema_version=int(data.get("schema_version", 1)),
            )
        except (KeyError, TypeError) as exc:
            raise CertificateFormatError(f"malformed certificate: {exc}") from exc


def certificate_from_run(name: str, seed: SeedSpec, result: PropagationResult, notes=()) -> Certificate:
    if result.contradiction is not None:
        outcome = {
            "result": "contradiction",
            "kind": result.contradiction.kind,
            "witness": [list(c) for c in result.contradiction.witness],
            "detail": result.contradiction.detail,
        }
    else:
        outcome = {"result": "fixpoint"}
    return Certificate(name, seed, list(result.deductions), outcome, list(notes))


def one_factor_certificate(name: str, seed: SeedSpec, regions, notes=()) -> Certificate:
    """Certificate that each listed region admits no perfect matching."""
    seed.one_factor_regions = [[tuple(c) for c in r] for r in regions]
    witness = [list(min(r)) for r in seed.one_factor_regions]
    outcome = {"result": "contradiction", "kind": "NoOneFactor", "witness": witness,
               "detail": "no perfect matching on the required region(s)"}
    return Certificate(name, seed, [], outcome, list(notes))


# ---------------------------------------------------------------------------
# Independent replay checking


def check_deduction(config: PartialConfig, ded: Deduction) -> bool:
    """Recheck one deduction against the current configuration.

    This recomputes only the rule instance named in the deduction's reason,
    so the checker never depends on the prover's scan order.
    """
    rule = ded.reason.get("rule")
    if ded.kind == "ForcedOutS":
        cell = ded.cells[0]
        if cell in config.in_s or cell in config.out_s or cell not in config.patch:
            return False
        if rule == "bound":
            comp_cells = frozenset(tuple(c) for c in ded.reason["component"])
            comp = config.component_of(min(comp_cells))
            if not comp_cells <= comp:
                return False
            if cell not in _neighbor_shell(comp):
                return False
            reachable = set(comp) if len(comp) >= 4 else set().union(
                *completion_candidates(config, comp)
            ) if completion_candidates(config, comp) else set(comp)
            return cell not in reachable
        if rule == "second_dominator":
            w = tuple(ded.reason["dominated_cell"])
            dom = [u for u in neighbors(w) if u in config.in_s]
            return w in config.out_s and len(dom) == 1 and cell in neighbors(w) and cell != dom[0]
        if rule == "no_placement":
            return not placement_candidates(config, cell)
        return False
    if ded.kind == "ForcedInS":
        cell = ded.cells[0]
        if cell in config.out_s or cell not in config.patch:
            return False
        if rule == "unique_dominator":
            v = tuple(ded.reason["dominated_cell"])
            if v not in config.out_s or any(w in config.in_s for w in neighbors(v)):
                return False
            if any(w not in config.patch for w in neighbors(v)):
                return False
            cands = [w for w in neighbors(v) if w not in config.out_s]
            return cands == [cell]
        if rule == "completion_core":
            comp_cells = frozenset(tuple(c) for c in ded.reason["component"])
            comp = config.component_of(min(comp_cells))
            if not comp_cells <= comp or len(comp) >= 4:
                return False
            cands = completion_candidates(config, comp)
            if not cands:
                return False
            core = set.intersection(*(set(sq) for sq in cands)) - set(comp)
            return cell in core
        return False
    if ded.kind == "ForcedComponent":
        if rule != "unique_completion" and rule != "refuted_alternatives":
            return False
        comp_cells = frozenset(tuple(c) for c in ded.reason["component"])
        comp = config.component_of(min(comp_cells))
        if not comp_cells <= comp or len(comp) >= 4:
            return False
        cands = completion_candidates(config, comp)
        if rule == "unique_completion":
            return len(cands) == 1 and tuple(sorted(cands[0] - comp)) == tuple(sorted(ded.cells))
        # refuted_alternatives: all but one candidate carries an embedded
        # refutation whose seed is this configuration plus that candidate
        refuted = [Certificate.from_json(c) for c in ded.reason.get("refuted", [])]
        target = frozenset(set(comp) | set(ded.cells))
        others = [sq for sq in cands if sq != target]
        if target not in cands:
            return False
        if len(refuted) != len(others):
            return False
        for sq, cert in zip(sorted(others, key=sorted), refuted):
            expected = snapshot_seed(config)
            expected.components = _merge_component_lists(expected, sq)
            if cert.seed.to_json() != expected.to_json():
                return False
            if not cert.is_contradiction() or not replay_certificate(cert):
                return False
        return True
    if ded.kind == "ForcedEdge":
        if rule != "edge_domination":
            return False
        edge = tuple(tuple(c) for c in ded.reason["edge"])
        ec = next((e for e in config.edge_constraints if set(e.edge) == set(edge)), None)
        if ec is None or ec.satisfied:
            return False
        cands = edge_domination_candidates(config, ec)
        return len(cands) == 1 and tuple(sorted(cands[0])) == tuple(sorted(ded.cells))
    return False


def _merge_component_lists(seed: SeedSpec, extra_square) -> list[list[Cell]]:
    groups = [sorted(tuple(c) for c in grp) for grp in seed.components]
    groups.append(sorted(extra_square))
    return groups


def check_contradiction(config: PartialConfig, outcome: dict) -> bool:
    """Recheck the terminal contradiction of a certificate."""
    kind = outcome.get("kind")
    witness = tuple(tuple(c) for c in outcome.get("witness", ()))
    if kind == "UndominatedVertex":
        if len(witness) == 1:
            v = witness[0]
            if v not in config.out_s:
                return False
            if any(w not in config.patch for w in neighbors(v)):
                return False
            if any(w in config.in_s for w in neighbors(v)):
                return False
            return not [w for w in neighbors(v) if w not in config.out_s]
        if len(witness) == 2:
            ec = next((e for e in config.edge_constraints if set(e.edge) == set(witness)), None)
            if ec is None or ec.satisfied:
                return False
            return not edge_domination_candidates(config, ec)
        return False
    if kind == "DoublyDominatedVertex":
        v = witness[0]
        return v in config.out_s and len([w for w in neighbors(v) if w in config.in_s]) >= 2
    if kind == "NoValidComponentExtension":
        cells = frozenset(witness)
        if not cells <= config.in_s:
            return False
        comp = config.component_of(min(cells))
        if not fits_in_square(comp):
            return True
        return len(comp) < 4 and not completion_candidates(config, comp)
    if kind == "NoOneFactor":
        return False  # handled at the certificate level (needs the regions)
    return False


def replay_certificate(cert: Certificate) -> bool:
    """Recheck every deduction and the terminal outcome, step by step.

    Returns False at the first unjustified step.  Malformed certificates
    raise CertificateFormatError instead.
    """
    if not isinstance(cert, Certificate):
        raise CertificateFormatError("not a certificate")
    try:
        config = cert.seed.build()
    except InconsistentSeedError:
        return False
    if cert.outcome.get("kind") == "NoOneFactor":
        if cert.deductions:
            return False
        regions = cert.seed.one_factor_regions
        if not regions:
            return False
        return all(not enumerate_one_factors(region) for region in regions)
    for i, ded in enumerate(cert.deductions):
        if not check_deduction(config, ded):
            return False
        bad = apply_deduction(config, ded)
        if bad is not None:
            # a contradiction raised while applying must be the declared end
            return (
                i == len(cert.deductions) - 1
                and cert.outcome.get("result") == "contradiction"
                and cert.outcome.get("kind") == bad.kind
            )
    if cert.outcome.get("result") == "contradiction":
        return check_contradiction(config, cert.outcome)
    return config.contradiction is None


def snapshot_seed(config: PartialConfig, notes=()) -> SeedSpec:
    """Freeze the current configuration as a self-contained seed."""
    comps = [sorted(c) for c in config.components()]
    return SeedSpec(
        patch_lo=config.patch.lo,
        patch_hi=config.patch.hi,
        components=comps,
        in_cells=[],
        out_cells=sorted(config.out_s),
        edges=[ec.edge for ec in config.edge_constraints if not ec.satisfied],
        notes=list(notes),
    )


# ---------------------------------------------------------------------------
# Branching search (local rigidity and corner sweeps)


@dataclass
class RigidityResult:
    status: str  # "rigid" | "completions" | "budget_exceeded"
    radius: int
    completions: list[tuple[Cell, ...]]  # sorted InS restrictions to the branch box
    certificates: list[Certificate]
    nodes: int


def _stabilizer_of_base_square() -> list[Isometry]:
    """The 16 congruences fixing the 4-cycle {0,e1,e2,e1+e2} setwise."""
    square = frozenset(unit_square((0, 1)).vertices)
    out = []
    for lin in signed_permutations(3):
        image = [lin.apply(c) for c in square]
        lo = tuple(min(c[i] for c in image) for i in range(3))
        shift = tuple(-l for l in lo)
        iso = Isometry(lin.perm, lin.signs, shift)
        if frozenset(iso.apply(c) for c in square) == square:
            out.append(iso)
    return out


def _resolved(config: PartialConfig, cell: Cell) -> bool:
    if cell in config.in_s:
        return len(config.component_of(cell)) == 4
    if cell in config.out_s:
        return config.is_dominated(cell)
    return False


def _branch_options(config: PartialConfig, cell: Cell) -> list[frozenset[Cell]]:
    """All valid 4-cycles whose 20-cell territory covers the cell."""
    options = []
    if cell not in config.out_s:
        options.extend(placement_candidates(config, cell))
    if cell not in config.in_s:
        for nb in sorted(neighbors(cell)):
            if nb in config.out_s:
                continue
            for sq in placement_candidates(config, nb):
                if cell not in sq and sq not in options:
                    # nb would dominate cell from this square
                    options.append(sq)
    uniq = []
    for sq in sorted(options, key=sorted):
        if sq not in uniq:
            uniq.append(sq)
    return uniq


def branch_search(
    config: PartialConfig,
    region: list[Cell],
    budget: int = 100000,
    first_completion_only: bool = False,
    collect_certificates: bool = False,
    max_completions: int = 10000,
):
    """Exhaustive search over component placements resolving a cell region.

    Returns (completions, certificates, nodes, exhausted).  Completions are
    recorded as the sorted InS cells restricted to the region.  Certificates
    are refutation logs for first-level branches (when requested).
    """
    nodes = 0
    completions: list[tuple[Cell, ...]] = []
    seen: set[tuple[Cell, ...]] = set()
    certs: list[Certificate] = []
    exhausted = True

    def rec(cfg: PartialConfig, depth: int) -> bool:
        nonlocal nodes, exhausted
        nodes += 1
        if nodes > budget:
            exhausted = False
            return False
        result = propagate(cfg)
        if result.contradiction is not None:
            if collect_certificates and depth == 0:
                certs.append(certificate_from_run("branch", snapshot_seed(cfg), result))
            return False
        cfg = result.config
        target = None
        for cell in region:
            if not _resolved(cfg, cell):
                target = cell
                break
        if target is None:
            key = tuple(sorted(c for c in cfg.in_s if c in region_set))
            if key not in seen:
                seen.add(key)
                completions.append(key)
            return first_completion_only or len(completions) >= max_completions
        options = _branch_options(cfg, target)
        if not options:
            return False
        for sq in options:
            child = cfg.copy()
            ok = True
            for c in sorted(sq):
                if c not in child.patch:
                    ok = False
                    break
                if child.assign_in(c) is not None:
                    ok = False
                    break
            if not ok:
                continue
            if rec(child, depth + 1):
                return True
        return False

    region = sorted(tuple(c) for c in region)
    region_set = set(region)
    rec(config, 0)
    return completions, certs, nodes, exhausted


def local_rigidity_search(radius: int = 2, budget: int = 200000) -> RigidityResult:
    """Resolve every cell around the base 4-cycle out to the given radius.

    Branches over all consistent component placements, propagates each
    branch, and compares the surviving resolved configurations against the
    lattice-like solution, up to the 16 congruences fixing the base 4-cycle.
    The smallest radius at which only matching completions survive is a
    measured result of running this search, never an input.
    """
    if radius < 2:
        raise ValueError("radius must be >= 2")
    inner = BoxPatch((-radius, -radius, -radius), (radius + 1, radius + 1, radius))
    patch = inner.expand(3)
    seed = SeedSpec(
        patch_lo=patch.lo,
        patch_hi=patch.hi,
        components=[sorted(unit_square((0, 1)).vertices)],
    )
    config = seed.build()
    completions, certs, nodes, exhausted = branch_search(
        config, inner.cells(), budget=budget, collect_certificates=False
    )
    if not exhausted:
        return RigidityResult("budget_exceeded", radius, completions, certs, nodes)
    canon = _canonical_restriction(inner)
    stab = _stabilizer_of_base_square()
    non_matching = []
    for comp in completions:
        cells = frozenset(comp)
        if not any(frozenset(iso.apply(c) for c in cells) == canon for iso in stab):
            non_matching.append(comp)
    if non_matching:
        return RigidityResult("completions", radius, non_matching, certs, nodes)
    return RigidityResult("rigid", radius, completions, certs, nodes)


def _canonical_restriction(box: BoxPatch) -> frozenset[Cell]:
    """InS cells of the lattice-like solution inside a box."""
    from .tiling import canonical_pds

    phi = canonical_pds().phi
    targets = {phi.apply(c) for c in unit_square((0, 1)).vertices}
    return frozenset(c for c in box.cells() if phi.apply(c) in targets)
