"""Reclamation and allocation policies.

Three configurations: ``eager`` reclaims at the end of every function,
``lazy`` only at the top of the call graph, and ``square`` decides per
reclamation point with a cost comparison and places ancilla with a locality
score.

Cost of uncomputing now (C1) versus holding garbage until the parent cleans
up (C0), for a function at nesting level l with communication factor s:

    C1 = n_active * g_uncomp * s * 2**l
    C0 = n_anc * g_p * s * sqrt((n_active + n_anc) / n_active)

The 2**l term prices recursive recomputation; the square root prices the
area expansion caused by reserving garbage qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from sqir.alloc import AllocationState, HeapEntry
from sqir.errors import ProgramError
from sqir.machine import Cell, CommMode, Machine, distance


class PolicyKind(str, Enum):
    EAGER = "eager"
    LAZY = "lazy"
    SQUARE = "square"


class Decision(Enum):
    UNCOMPUTE = "uncompute"
    TRANSFER = "transfer"


@dataclass(frozen=True)
class CostInputs:
    n_active: int
    n_anc: int
    g_uncomp: int
    g_p: int
    s: float
    level: int

    def __post_init__(self) -> None:
        if min(self.n_active, self.n_anc, self.g_uncomp, self.g_p, self.level) < 0:
            raise ProgramError("cost inputs must be nonnegative")
        if self.s < 0:
            raise ProgramError("communication factor must be nonnegative")


def cost_uncompute(c: CostInputs) -> float:
    """C1: price of uncomputing and reclaiming right now."""
    return c.n_active * c.g_uncomp * c.s * (2.0 ** c.level)


def cost_no_uncompute(c: CostInputs) -> float:
    """C0: price of holding the garbage live until the parent's cleanup."""
    if c.n_active < 1:
        raise ProgramError("cost_no_uncompute needs at least one active qubit")
    expansion = math.sqrt((c.n_active + c.n_anc) / c.n_active)
    return c.n_anc * c.g_p * c.s * expansion


def reclaim_decision(c: CostInputs) -> Decision:
    """Uncompute when C1 <= C0 (ties favor reclamation)."""
    return Decision.UNCOMPUTE if cost_uncompute(c) <= cost_no_uncompute(c) else Decision.TRANSFER


def policy_free(kind: PolicyKind, level: int, c: Optional[CostInputs]) -> Decision:
    """Decision at a Free marker.  The top level always uncomputes."""
    if level == 0:
        return Decision.UNCOMPUTE
    if kind is PolicyKind.EAGER:
        return Decision.UNCOMPUTE
    if kind is PolicyKind.LAZY:
        return Decision.TRANSFER
    if c is None:
        raise ProgramError("square policy needs cost inputs")
    return reclaim_decision(c)


class CommEstimator:
    """Running average of routing effort per two-qubit gate in one module.

    Lattice machines feed swap-chain lengths, FT machines feed blocked braid
    attempts.  The estimate is clamped to >= 1 so a perfectly connected
    machine cannot zero out both sides of the cost comparison.
    """

    def __init__(self) -> None:
        self.total = 0.0
        self.count = 0

    def add(self, amount: float) -> None:
        self.total += amount
        self.count += 1

    def value(self) -> float:
        if self.count == 0:
            return 1.0
        return max(1.0, self.total / self.count)


@dataclass(frozen=True)
class LaaWeights:
    alpha: float = 0.5  # cycles of serialization per unit score
    beta: float = 1.0  # area-expansion weight


@dataclass(frozen=True)
class SiteChoice:
    """One allocation slot: either a heap qubit to reuse or a fresh cell."""

    entry: Optional[HeapEntry]
    cell: Optional[Cell]
    score: float


def _centroid(cells: Iterable[Cell]) -> Optional[tuple[float, float]]:
    cells = list(cells)
    if not cells:
        return None
    return (
        sum(c[0] for c in cells) / len(cells),
        sum(c[1] for c in cells) / len(cells),
    )


def _dist_to(m: Machine, cell: Cell, point: tuple[float, float]) -> float:
    if m.mode is CommMode.FULL:
        return 0.0
    return abs(cell[0] - point[0]) + abs(cell[1] - point[1])


def _bbox_half_perimeter(cells: Iterable[Cell]) -> int:
    cells = list(cells)
    if not cells:
        return 0
    rows = [c[0] for c in cells]
    cols = [c[1] for c in cells]
    return (max(rows) - min(rows)) + (max(cols) - min(cols))


def score_heap_candidate(
    m: Machine,
    entry: HeapEntry,
    target: tuple[float, float],
    now: int,
    weights: LaaWeights,
) -> float:
    # reuse never expands the live area: zero area penalty
    busy = max(0, entry.busy_until - now)
    return _dist_to(m, entry.cell, target) + weights.alpha * busy


def score_fresh_candidate(
    m: Machine,
    cell: Cell,
    target: tuple[float, float],
    live_cells: list[Cell],
    weights: LaaWeights,
) -> float:
    before = _bbox_half_perimeter(live_cells)
    after = _bbox_half_perimeter(live_cells + [cell])
    return _dist_to(m, cell, target) + weights.beta * (after - before)


def choose_sites(
    n: int,
    interact_cells: list[Cell],
    state: AllocationState,
    m: Machine,
    now: int,
    weights: LaaWeights,
) -> Optional[list[SiteChoice]]:
    """Locality-aware selection of ``n`` allocation slots.

    For every slot the best heap qubit and the best fresh cell are scored on
    interaction distance, serialization (how long the candidate stays busy)
    and area expansion; the cheaper side wins, ties going to the heap.
    Returns None when the request cannot be satisfied (pending).

    The interaction set comes from looking ahead in the requesting code block;
    when it is empty the centroid of live qubits (or the grid center) stands
    in for it.
    """
    if state.free_capacity() < n:
        return None
    live_cells = [c for c in state.live.values() if c is not None]
    target = _centroid(interact_cells) or _centroid(live_cells)
    if target is None:
        if m.mode is CommMode.FULL:
            target = (0.0, 0.0)
        else:
            target = ((m.height - 1) / 2.0, (m.width - 1) / 2.0)

    taken_entries: list[HeapEntry] = []
    taken_cells: list[Cell] = []
    choices: list[SiteChoice] = []
    free_cells = None
    if m.mode is not CommMode.FULL:
        free_cells = [c for c in m.cells() if c not in state.cell_owner]

    for _ in range(n):
        best_heap: Optional[tuple[float, HeapEntry]] = None
        for entry in state.heap:
            if entry in taken_entries:
                continue
            score = score_heap_candidate(m, entry, target, now, weights)
            key = (score, entry.busy_until, entry.qubit)
            if best_heap is None or key < best_heap[0]:
                best_heap = (key, entry)

        best_fresh: Optional[tuple[float, Cell]] = None
        if m.mode is CommMode.FULL:
            best_fresh = ((0.0, 0, 0), None)  # virtual cell, no geometry
        else:
            area_cells = live_cells + taken_cells
            for cell in free_cells:
                if cell in taken_cells:
                    continue
                score = score_fresh_candidate(m, cell, target, area_cells, weights)
                key = (score, m.cell_index(cell))
                if best_fresh is None or key < best_fresh[0]:
                    best_fresh = (key, cell)

        if best_heap is not None and (best_fresh is None or best_heap[0][0] <= best_fresh[0][0]):
            choices.append(SiteChoice(entry=best_heap[1], cell=None, score=best_heap[0][0]))
            taken_entries.append(best_heap[1])
        elif best_fresh is not None:
            choices.append(SiteChoice(entry=None, cell=best_fresh[1], score=best_fresh[0][0]))
            if best_fresh[1] is not None:
                taken_cells.append(best_fresh[1])
        else:
            return None
    return choices


def naive_sites(n: int, state: AllocationState, m: Machine) -> Optional[list[SiteChoice]]:
    """Baseline allocator: pop the heap LIFO, then fresh cells in row-major
    order.  Returns None when the request cannot be satisfied."""
    if state.free_capacity() < n:
        return None
    choices: list[SiteChoice] = []
    heap_left = list(reversed(state.heap))  # LIFO
    fresh_iter = None
    if m.mode is not CommMode.FULL:
        fresh_iter = iter([c for c in m.cells() if c not in state.cell_owner])
    for _ in range(n):
        if heap_left:
            choices.append(SiteChoice(entry=heap_left.pop(0), cell=None, score=0.0))
            continue
        if m.mode is CommMode.FULL:
            choices.append(SiteChoice(entry=None, cell=None, score=0.0))
            continue
        cell = next(fresh_iter, None)
        if cell is None:
            return None
        choices.append(SiteChoice(entry=None, cell=cell, score=0.0))
    return choices
