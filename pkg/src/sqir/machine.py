"""Target machine models and routing primitives.

Three communication modes:

* ``lattice`` -- 2D grid, nearest-neighbor two-qubit gates, long-distance
  interactions resolved by chains of SWAP gates (3 CNOT cycles each).
* ``full`` -- all-to-all connectivity, no routing cost.
* ``ft`` -- error-corrected grid where a two-qubit gate claims an L-shaped
  route between the operand sites for one CNOT duration.  Routes may extend
  to any length at constant latency but two routes active in overlapping
  cycles may not share a cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from sqir.errors import ProgramError
from sqir.ir import GateKind

Cell = tuple[int, int]  # (row, col)


class CommMode(str, Enum):
    LATTICE = "lattice"
    FULL = "full"
    FT = "ft"


def _default_cycles() -> dict[GateKind, int]:
    return {kind: 1 for kind in GateKind if kind is not GateKind.SWAP}


@dataclass(frozen=True)
class Machine:
    mode: CommMode
    width: int = 0
    height: int = 0
    max_qubits: int = 0
    gate_cycles: dict[GateKind, int] = field(default_factory=_default_cycles)

    def __post_init__(self) -> None:
        if self.mode is not CommMode.FULL:
            if self.width < 1 or self.height < 1:
                raise ProgramError(f"{self.mode.value} machine needs a positive grid")
            if self.max_qubits > self.capacity():
                raise ProgramError(
                    f"max_qubits {self.max_qubits} exceeds grid capacity {self.capacity()}"
                )
        if self.max_qubits < 1:
            raise ProgramError("max_qubits must be >= 1")
        for kind, dur in self.gate_cycles.items():
            if dur < 1:
                raise ProgramError(f"duration for {kind.value} must be >= 1")

    def capacity(self) -> int:
        """Number of usable qubit sites on the grid."""
        if self.mode is CommMode.FT:
            # Logical qubits sit on even-even cells; odd rows/columns are
            # routing channels.
            return ((self.width + 1) // 2) * ((self.height + 1) // 2)
        return self.width * self.height

    def duration(self, kind: GateKind) -> int:
        if kind is GateKind.SWAP:
            return 3 * self.gate_cycles[GateKind.CNOT]
        return self.gate_cycles[kind]

    def cells(self) -> Iterable[Cell]:
        """All qubit sites in row-major order."""
        if self.mode is CommMode.FT:
            for r in range(0, self.height, 2):
                for c in range(0, self.width, 2):
                    yield (r, c)
        else:
            for r in range(self.height):
                for c in range(self.width):
                    yield (r, c)

    def check_cell(self, cell: Cell) -> None:
        r, c = cell
        if not (0 <= r < self.height and 0 <= c < self.width):
            raise ProgramError(f"cell {cell} outside {self.width}x{self.height} grid")

    def cell_index(self, cell: Cell) -> int:
        return cell[0] * self.width + cell[1]


def lattice(width: int, height: int, max_qubits: int = 0) -> Machine:
    return Machine(CommMode.LATTICE, width, height, max_qubits or width * height)


def fully_connected(max_qubits: int) -> Machine:
    return Machine(CommMode.FULL, 0, 0, max_qubits)


def ft_grid(width: int, height: int, max_qubits: int = 0) -> Machine:
    m = Machine(CommMode.FT, width, height, max_qubits or 1)
    if max_qubits == 0:
        m = Machine(CommMode.FT, width, height, m.capacity())
    return m


def distance(m: Machine, a: Cell, b: Cell) -> int:
    """Manhattan distance on grids; 0 on fully-connected machines."""
    if m.mode is CommMode.FULL:
        return 0
    m.check_cell(a)
    m.check_cell(b)
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


@dataclass(frozen=True)
class SwapChain:
    """Shortest row-first path from a to b; the mover stops adjacent to b."""

    path: tuple[Cell, ...]
    swap_count: int
    duration_cycles: int


def swap_path(m: Machine, a: Cell, b: Cell) -> list[Cell]:
    """Row coordinate first, then column; includes both endpoints."""
    m.check_cell(a)
    m.check_cell(b)
    path = [a]
    r, c = a
    step = 1 if b[0] > r else -1
    while r != b[0]:
        r += step
        path.append((r, c))
    step = 1 if b[1] > c else -1
    while c != b[1]:
        c += step
        path.append((r, c))
    return path


def swap_route(m: Machine, a: Cell, b: Cell) -> SwapChain:
    """Swap chain moving the qubit at ``a`` next to ``b``.

    distance d needs d-1 swaps; updating the logical-physical map is the
    caller's job.
    """
    if m.mode is not CommMode.LATTICE:
        raise ProgramError("swap_route requires a lattice machine")
    if a == b:
        raise ProgramError("swap_route endpoints must differ")
    path = swap_path(m, a, b)
    swaps = max(0, len(path) - 2)
    return SwapChain(
        path=tuple(path),
        swap_count=swaps,
        duration_cycles=3 * swaps * m.gate_cycles[GateKind.CNOT],
    )


@dataclass(frozen=True)
class BraidRoute:
    """Cells claimed by one two-qubit interaction on the FT grid."""

    cells: frozenset[Cell]
    start_cycle: int
    end_cycle: int

    def overlaps(self, start: int, end: int) -> bool:
        return self.start_cycle < end and start < self.end_cycle


def _l_path(m: Machine, a: Cell, b: Cell, corner: Cell) -> tuple[Cell, ...]:
    cells = list(dict.fromkeys(swap_path(m, a, corner) + swap_path(m, corner, b)))
    return tuple(cells)


def braid_candidates(m: Machine, a: Cell, b: Cell) -> tuple[tuple[Cell, ...], ...]:
    """The two L-shaped candidate paths: horizontal-first, then vertical-first."""
    h_first = _l_path(m, a, b, corner=(a[0], b[1]))  # travel along a's row first
    v_first = _l_path(m, a, b, corner=(b[0], a[1]))  # travel along a's column first
    return (h_first, v_first)


def channel_route(m: Machine, a: Cell, b: Cell) -> tuple[Cell, ...]:
    """Detour route whose interior only uses odd-row/odd-column channel cells.

    Used as a fallback when both plain L candidates are permanently blocked by
    resident qubits; with logical qubits on even-even sites its interior can
    never cross an occupied site.
    """
    corridor_row = a[0] + 1 if a[0] + 1 < m.height else a[0] - 1
    corridor_col = b[1] + 1 if b[1] + 1 < m.width else b[1] - 1
    cells: list[Cell] = [a]
    cells += swap_path(m, (corridor_row, a[1]), (corridor_row, corridor_col))
    cells += swap_path(m, (corridor_row, corridor_col), (b[0], corridor_col))
    cells.append(b)
    return tuple(dict.fromkeys(cells))


def braid_route(
    m: Machine,
    a: Cell,
    b: Cell,
    active: Iterable[BraidRoute],
    start_cycle: int = 0,
    blocked: frozenset[Cell] = frozenset(),
) -> Optional[BraidRoute]:
    """First L orientation (horizontal-first, then vertical-first) whose cells
    avoid every active route and every blocked cell; None when both conflict.

    ``blocked`` carries cells occupied by resident qubits (endpoints are
    always allowed).  Latency is length-independent: one CNOT duration.
    """
    if m.mode is not CommMode.FT:
        raise ProgramError("braid_route requires an ft machine")
    end = start_cycle + m.gate_cycles[GateKind.CNOT]
    active = [r for r in active if r.overlaps(start_cycle, end)]
    occupied = blocked - {a, b}
    for cand in braid_candidates(m, a, b):
        cells = frozenset(cand)
        if cells & occupied:
            continue
        if any(cells & r.cells for r in active):
            continue
        return BraidRoute(cells=cells, start_cycle=start_cycle, end_cycle=end)
    return None
