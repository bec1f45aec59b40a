"""Qubit lifecycle bookkeeping: liveness, the LIFO ancilla heap, the
logical-to-physical map, usage segments, and pending allocation requests.

All times are integer cycles.  A qubit is *live* from allocation until it is
pushed back to the heap; heap residence is excluded from usage segments, so
the sum of segment lengths is exactly the active quantum volume.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from sqir.errors import DeadlockError, ProgramError
from sqir.machine import Cell


@dataclass(frozen=True)
class UsageSegment:
    qubit: int
    t_i: int
    t_f: int

    def __post_init__(self) -> None:
        if self.t_f < self.t_i or self.t_i < 0:
            raise ProgramError(f"bad usage segment [{self.t_i}, {self.t_f}) for q{self.qubit}")

    @property
    def length(self) -> int:
        return self.t_f - self.t_i


@dataclass
class HeapEntry:
    qubit: int
    cell: Optional[Cell]
    busy_until: int  # cycle at which the previous use finished


@dataclass
class PendingRequest:
    """Unfulfilled allocation; FIFO-resolved as qubits return to the heap.

    ``retry`` re-attempts the whole request and returns the granted qubit ids
    or None while resources are still short.
    """

    count: int
    tag: str
    retry: Optional[Callable[[], Optional[list[int]]]] = None
    result: Optional[list[int]] = None


class AllocationState:
    """Mutable allocation state owned by a single scheduler instance."""

    def __init__(self, max_qubits: int):
        self.max_qubits = max_qubits
        self.live: dict[int, Optional[Cell]] = {}
        self.heap: list[HeapEntry] = []  # stack: reclaimed qubits, top at end
        self.pending: deque[PendingRequest] = deque()
        self.segments: list[UsageSegment] = []
        self.open_segments: dict[int, int] = {}  # qubit -> t_i
        self.cell_owner: dict[Cell, int] = {}
        self._next_id = 0

    # --- queries -----------------------------------------------------------

    @property
    def n_active(self) -> int:
        return len(self.live)

    def heap_qubits(self) -> list[int]:
        return [e.qubit for e in self.heap]

    def cell_of(self, qubit: int) -> Optional[Cell]:
        if qubit in self.live:
            return self.live[qubit]
        for entry in self.heap:
            if entry.qubit == qubit:
                return entry.cell
        return None

    def free_capacity(self) -> int:
        return self.max_qubits - self.n_active

    # --- lifecycle ---------------------------------------------------------

    def new_qubit(self, cell: Optional[Cell], t: int) -> int:
        """Bring a brand-new qubit into the live set at ``cell``."""
        if self.n_active >= self.max_qubits:
            raise DeadlockError("live qubit cap exceeded")
        if cell is not None:
            if cell in self.cell_owner:
                raise ProgramError(f"cell {cell} already occupied")
            self.cell_owner[cell] = self._next_id
        qid = self._next_id
        self._next_id += 1
        self.live[qid] = cell
        self.open_segments[qid] = t
        return qid

    def pop_entry(self, entry: HeapEntry, t: int) -> int:
        """Move a specific heap entry back to the live set (reuse at its cell)."""
        if self.n_active >= self.max_qubits:
            raise DeadlockError("live qubit cap exceeded")
        self.heap.remove(entry)
        self.live[entry.qubit] = entry.cell
        self.open_segments[entry.qubit] = max(t, entry.busy_until)
        return entry.qubit

    def pop(self, t: int) -> int:
        """LIFO pop: most recently reclaimed qubit first."""
        if not self.heap:
            raise ProgramError("pop from empty ancilla heap")
        return self.pop_entry(self.heap[-1], t)

    def heap_push(self, qubits: Iterable[int], t: int) -> list[UsageSegment]:
        """Reclaim live qubits: close their segments at ``t`` and stack them.

        The caller guarantees the qubits are back in |0> (via uncomputation or
        because they were never entangled).
        """
        closed = []
        for q in qubits:
            if q not in self.live:
                raise ProgramError(f"heap_push of non-live qubit {q}")
            t_i = self.open_segments.pop(q)
            seg = UsageSegment(q, t_i, max(t, t_i))
            self.segments.append(seg)
            closed.append(seg)
            self.heap.append(HeapEntry(qubit=q, cell=self.live.pop(q), busy_until=seg.t_f))
        return closed

    def retire(self, qubits: Iterable[int], t: int) -> None:
        """Close segments at end of program without returning qubits to the heap."""
        for q in qubits:
            if q in self.open_segments:
                t_i = self.open_segments.pop(q)
                self.segments.append(UsageSegment(q, t_i, max(t, t_i)))
                self.live.pop(q, None)

    def swap_positions(self, cell_a: Cell, cell_b: Cell) -> None:
        """Exchange the occupants (live or heap-resident) of two cells."""
        qa = self.cell_owner.pop(cell_a, None)
        qb = self.cell_owner.pop(cell_b, None)
        if qa is not None:
            self.cell_owner[cell_b] = qa
            self._set_cell(qa, cell_b)
        if qb is not None:
            self.cell_owner[cell_a] = qb
            self._set_cell(qb, cell_a)

    def _set_cell(self, qubit: int, cell: Cell) -> None:
        if qubit in self.live:
            self.live[qubit] = cell
            return
        for entry in self.heap:
            if entry.qubit == qubit:
                entry.cell = cell
                return
        raise ProgramError(f"qubit {qubit} is neither live nor heap-resident")

    def touch_heap_entry(self, qubit: int, t: int) -> None:
        """Record that a heap-resident qubit was disturbed until cycle ``t``."""
        for entry in self.heap:
            if entry.qubit == qubit:
                entry.busy_until = max(entry.busy_until, t)
                return

    # --- pending queue -----------------------------------------------------

    def enqueue_pending(self, count: int, tag: str) -> PendingRequest:
        req = PendingRequest(count=count, tag=tag)
        self.pending.append(req)
        return req

    def resolve_pending(self) -> list[PendingRequest]:
        """Fulfill queued requests in FIFO order while resources allow.

        Resolution stops at the first request that still cannot run, so later
        arrivals never jump the queue.
        """
        fulfilled = []
        while self.pending:
            req = self.pending[0]
            ids = req.retry() if req.retry is not None else None
            if ids is None:
                break
            req.result = ids
            fulfilled.append(req)
            self.pending.popleft()
        return fulfilled

    def check_deadlock(self, in_flight: bool) -> None:
        """Raise when requests are pending and nothing can ever feed the heap."""
        if self.pending and not in_flight:
            req = self.pending[0]
            raise DeadlockError(
                f"allocation of {req.count} qubit(s) for {req.tag} can never be "
                f"fulfilled (cap {self.max_qubits}, {self.n_active} live)"
            )
