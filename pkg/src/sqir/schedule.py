"""Instrumentation-driven simulation of a reversible program.

The scheduler walks the call tree once, in program order.  Every Allocate and
Free marker becomes a policy invocation; every gate is scheduled as soon as
its operands are free, after resolving connectivity (swap chains on lattices,
braid claims on error-corrected grids).

Reclamation semantics: each dynamic call leaves a record of what it executed.
A function that *uncomputes* at its Free runs its cleanup (derived inverse or
explicit block) and pushes its ancilla to the heap.  A function that
*transfers* leaves its ancilla live as garbage; the record is discharged later
when an ancestor runs its own derived inverse, which walks records backwards:

* a transferred child is undone in place (inverse store, inverse compute,
  then its ancilla finally return to the heap);
* a self-cleaned child has to be *re-executed* -- recompute, un-store,
  uncompute again -- which is what makes nested eager reclamation cost
  2**level in the worst case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from sqir.alloc import AllocationState, UsageSegment
from sqir.errors import DeadlockError, ProgramError, VerifyError
from sqir.ir import (
    ArgSlice,
    Block,
    BlockKind,
    Call,
    CallGraph,
    FuncDef,
    Gate,
    GateKind,
    InverseCall,
    Program,
    QubitRef,
    decompose_toffoli,
    derive_uncompute,
    gate_inverse,
    validate_program,
)
from sqir.machine import (
    BraidRoute,
    Cell,
    CommMode,
    Machine,
    braid_route,
    channel_route,
    distance,
    swap_path,
)
from sqir.metrics import MetricsReport, NoiseModel, build_report
from sqir.ir import UncomputeMode
from sqir.policy import (
    CommEstimator,
    CostInputs,
    Decision,
    LaaWeights,
    PolicyKind,
    choose_sites,
    cost_no_uncompute,
    cost_uncompute,
    naive_sites,
    policy_free,
)

Env = dict[str, tuple[int, ...]]


@dataclass(frozen=True)
class GateEvent:
    kind: GateKind
    qubits: tuple[int, ...]
    cells: tuple[Optional[Cell], ...]
    start: int
    end: int
    fn: str
    block: str
    routing: bool = False
    inserted_swaps: int = 0
    braid_retries: int = 0


@dataclass(frozen=True)
class FreeDecision:
    fn: str
    level: int
    decision: Decision
    c1: Optional[float] = None
    c0: Optional[float] = None
    n_active: Optional[int] = None
    n_anc: Optional[int] = None
    g_uncomp: Optional[int] = None
    g_p: Optional[int] = None
    s: Optional[float] = None


@dataclass
class Timeline:
    events: list[GateEvent]
    segments: list[UsageSegment]
    makespan: int
    block_runs: dict[tuple[str, BlockKind], int]
    decisions: list[FreeDecision]
    roles: dict[int, str]  # qubit id -> "register" | "ancilla"


class _Status:
    OPEN = "open"
    SELF_CLEANED = "self_cleaned"
    GARBAGE = "garbage"
    NO_ANC = "no_anc"


@dataclass
class CallRecord:
    """What one dynamic function invocation actually executed."""

    fn: FuncDef
    env: Env
    level: int
    compute_items: list[Union[Gate, "CallRecord"]] = field(default_factory=list)
    status: str = _Status.OPEN
    cleaned_via: str = ""  # "auto" | "explicit" when status == SELF_CLEANED
    own_compute_gates: int = 0
    tree_size: int = 0


@dataclass
class _Frame:
    record: CallRecord
    entry_clock: int
    pending: dict[str, object] = field(default_factory=dict)  # anc name -> request
    transfers: list[CallRecord] = field(default_factory=list)


@dataclass(frozen=True)
class SimOptions:
    verify: bool = False
    check_uncompute: bool = False
    laa: LaaWeights = field(default_factory=LaaWeights)
    noise: NoiseModel = field(default_factory=NoiseModel)


def _garbage_qubits(record: CallRecord) -> int:
    total = sum(len(record.env[name]) for name, _ in record.fn.ancillas)
    for item in record.compute_items:
        if isinstance(item, CallRecord) and item.status == _Status.GARBAGE:
            total += _garbage_qubits(item)
    return total


class Scheduler:
    def __init__(
        self,
        program: Program,
        machine: Machine,
        policy: PolicyKind,
        options: SimOptions,
    ):
        self.program = program
        self.machine = machine
        self.policy = policy
        self.options = options
        self.cg: CallGraph = validate_program(program)
        self.state = AllocationState(machine.max_qubits)
        self.ready: dict[int, int] = {}
        self.roles: dict[int, str] = {}
        self.events: list[GateEvent] = []
        self.block_runs: dict[tuple[str, BlockKind], int] = {}
        self.decisions: list[FreeDecision] = []
        self.estimators: dict[str, CommEstimator] = {}
        self.classical = program.is_classical()
        self.shadow: Optional[dict[int, int]] = {} if (options.verify and self.classical) else None
        self._braid_buckets: dict[int, list[frozenset[Cell]]] = {}
        self._static_size_cache: dict[str, int] = {}
        self._decompose = machine.mode is not CommMode.FULL

        if options.check_uncompute:
            self._check_explicit_uncomputes()

    # ------------------------------------------------------------------ api

    def run(self) -> Timeline:
        main = self.program.entry_func()
        if main.params:
            raise ProgramError("entry function may not take parameters")
        record = self._exec_instance(main, [], parent=None, parent_rest=0)
        if self.state.live:
            raise VerifyError(f"{len(self.state.live)} qubit(s) still live at program end")
        makespan = max((e.end for e in self.events), default=0)
        return Timeline(
            events=self.events,
            segments=self.state.segments,
            makespan=makespan,
            block_runs=self.block_runs,
            decisions=self.decisions,
            roles=self.roles,
        )

    # ------------------------------------------------------- instance walk

    def _exec_instance(
        self,
        fn: FuncDef,
        args: list[tuple[int, ...]],
        parent: Optional[_Frame],
        parent_rest: int,
    ) -> CallRecord:
        frame = self._open_frame(fn, args)
        self._run_compute(frame)
        self._run_store(frame)
        if fn.ancillas:
            self._settle_pending(frame)
            self._decide_and_free(frame, parent, parent_rest)
        else:
            frame.record.status = _Status.NO_ANC
        frame.record.tree_size = self._tree_size(frame.record)
        if frame.transfers:
            if parent is None:
                # Deferred garbage comes home at the top: undo the entry body.
                self._undo_record(frame.record, {})
                frame.transfers.clear()
            else:
                parent.transfers.extend(frame.transfers)
                frame.transfers.clear()
        if parent is None:
            self._finish_main(frame)
        return frame.record

    def _open_frame(self, fn: FuncDef, args: list[tuple[int, ...]]) -> _Frame:
        env: Env = {}
        for (pname, width), ids in zip(fn.params, args):
            if len(ids) != width:
                raise ProgramError(f"{fn.name}: parameter {pname} width mismatch")
            env[pname] = tuple(ids)
        entry_clock = max((self.ready[q] for ids in args for q in ids), default=0)
        record = CallRecord(fn=fn, env=env, level=self.cg.levels[fn.name])
        frame = _Frame(record=record, entry_clock=entry_clock)
        role = "register" if fn.name == self.program.entry else "ancilla"
        for aname, width in fn.ancillas:
            self._request_array(frame, aname, width, role)
        return frame

    def _finish_main(self, frame: _Frame) -> None:
        # Anything still open belongs to the entry function's register; close
        # segments at last touch.  All true ancilla must be heap-resident.
        for q in sorted(self.state.live):
            if self.roles.get(q) == "ancilla":
                raise VerifyError(f"ancilla qubit {q} never reclaimed")
        for q in sorted(self.state.live):
            self.state.retire([q], self.ready.get(q, 0))

    # --------------------------------------------------------- allocation

    def _request_array(self, frame: _Frame, name: str, width: int, role: str) -> None:
        fn = frame.record.fn

        def attempt() -> Optional[list[int]]:
            now = frame.entry_clock
            if self.policy is PolicyKind.SQUARE:
                interact = self._lookahead_cells(frame, name)
                choices = choose_sites(
                    width, interact, self.state, self.machine, now, self.options.laa
                )
            else:
                choices = naive_sites(width, self.state, self.machine)
            if choices is None:
                return None
            ids = []
            for choice in choices:
                if choice.entry is not None:
                    qid = self.state.pop_entry(choice.entry, now)
                else:
                    qid = self.state.new_qubit(choice.cell, now)
                self.ready[qid] = self.state.open_segments[qid]
                self.roles[qid] = role
                if self.shadow is not None:
                    self.shadow[qid] = 0
                ids.append(qid)
            frame.record.env[name] = tuple(ids)
            frame.pending.pop(name, None)
            return ids

        if attempt() is None:
            req = self.state.enqueue_pending(width, f"{fn.name}.{name}")
            req.retry = attempt
            frame.pending[name] = req

    def _lookahead_cells(self, frame: _Frame, anc_name: str) -> list[Cell]:
        """Cells of already-placed qubits that gates in this compute block will
        touch together with the ancilla being allocated."""
        fn = frame.record.fn
        cells: list[Cell] = []
        for item in fn.compute.items:
            if not isinstance(item, Gate):
                continue
            names = {q.name for q in item.operands}
            if anc_name not in names:
                continue
            for q in item.operands:
                if q.name == anc_name:
                    continue
                ids = frame.record.env.get(q.name)
                if ids is None:
                    continue
                cell = self.state.live.get(ids[q.index])
                if cell is not None:
                    cells.append(cell)
        return cells

    def _settle_pending(self, frame: _Frame) -> None:
        if frame.pending:
            self.state.resolve_pending()
        if frame.pending:
            self.state.check_deadlock(in_flight=False)

    def _touches_pending(self, frame: _Frame, item) -> bool:
        if not frame.pending:
            return False
        if isinstance(item, Gate):
            return any(q.name in frame.pending for q in item.operands)
        if isinstance(item, Call):
            return any(a.name in frame.pending for a in item.args)
        return True

    # ------------------------------------------------------------- blocks

    def _bump(self, fn: str, kind: BlockKind) -> None:
        key = (fn, kind)
        self.block_runs[key] = self.block_runs.get(key, 0) + 1

    def _run_compute(self, frame: _Frame) -> None:
        fn = frame.record.fn
        if not fn.compute.items:
            return
        self._bump(fn.name, BlockKind.COMPUTE)
        for item in fn.compute.items:
            if frame.pending:
                self.state.resolve_pending()
                if self._touches_pending(frame, item):
                    self.state.check_deadlock(in_flight=False)
            if isinstance(item, Gate):
                self._emit_gate(item, frame.record.env, {}, frame.record, "compute")
                frame.record.compute_items.append(item)
            elif isinstance(item, Call):
                child = self._exec_call(frame, item)
                frame.record.compute_items.append(child)
            else:
                raise ProgramError(f"unexpected compute item {item!r}")

    def _exec_call(self, frame: _Frame, call: Call) -> CallRecord:
        fn = frame.record.fn
        callee = self.program.functions[call.callee]
        args = [self._resolve_slice(frame.record.env, a, {}) for a in call.args]
        rest = self._static_rest(fn, call, frame)
        return self._exec_instance(callee, args, parent=frame, parent_rest=rest)

    def _run_store(self, frame: _Frame) -> None:
        fn = frame.record.fn
        if not fn.store.items:
            return
        self._bump(fn.name, BlockKind.STORE)
        for item in fn.store.items:
            if frame.pending:
                self.state.resolve_pending()
                if self._touches_pending(frame, item):
                    self.state.check_deadlock(in_flight=False)
            self._emit_gate(item, frame.record.env, {}, frame.record, "store")

    # ------------------------------------------------------- free / undo

    def _decide_and_free(self, frame: _Frame, parent: Optional[_Frame], parent_rest: int) -> None:
        record = frame.record
        fn = record.fn
        level = record.level
        own_anc = [q for name, _ in fn.ancillas for q in record.env[name]]
        n_anc = len(own_anc) + sum(_garbage_qubits(r) for r in frame.transfers)

        cost: Optional[CostInputs] = None
        if self.policy is PolicyKind.SQUARE and level > 0:
            cost = CostInputs(
                n_active=self.state.n_active,
                n_anc=n_anc,
                g_uncomp=self._est_uncompute_gates(record),
                g_p=parent_rest + (self._parent_unc_estimate(parent) if parent else 0),
                s=self._estimator(fn.name).value(),
                level=level,
            )
        decision = policy_free(self.policy, level, cost)
        self.decisions.append(
            FreeDecision(
                fn=fn.name,
                level=level,
                decision=decision,
                c1=None if cost is None else cost_uncompute(cost),
                c0=None if cost is None else cost_no_uncompute(cost),
                n_active=None if cost is None else cost.n_active,
                n_anc=None if cost is None else cost.n_anc,
                g_uncomp=None if cost is None else cost.g_uncomp,
                g_p=None if cost is None else cost.g_p,
                s=None if cost is None else cost.s,
            )
        )

        if decision is Decision.UNCOMPUTE:
            if frame.transfers or fn.uncompute_mode is UncomputeMode.AUTO:
                # Derived inverse of the recorded compute; also discharges any
                # garbage records held from children.
                self._undo_record(record, {})
                record.cleaned_via = "auto"
            else:
                self._run_explicit_uncompute(record, {})
                record.cleaned_via = "explicit"
            frame.transfers.clear()
            self._push_clean(own_anc)
            record.status = _Status.SELF_CLEANED
        else:
            record.status = _Status.GARBAGE
            if parent is None:
                raise ProgramError("cannot transfer garbage out of the entry function")
            parent.transfers.append(record)

    def _run_explicit_uncompute(self, record: CallRecord, remap: dict[int, int]) -> None:
        fn = record.fn
        if not fn.uncompute.items:
            return
        self._bump(fn.name, BlockKind.UNCOMPUTE)
        for item in fn.uncompute.items:
            self._emit_gate(item, record.env, remap, record, "uncompute")

    def _undo_record(self, record: CallRecord, remap: dict[int, int]) -> None:
        """Schedule the exact inverse of a recorded compute execution."""
        fn = record.fn
        if record.compute_items:
            self._bump(fn.name, BlockKind.COMPUTE)
        for item in reversed(record.compute_items):
            if isinstance(item, Gate):
                self._emit_gate(gate_inverse(item), record.env, remap, record, "uncompute")
            else:
                self._undo_instance(item, remap)

    def _undo_store(self, record: CallRecord, env: Env, remap: dict[int, int]) -> None:
        fn = record.fn
        if not fn.store.items:
            return
        self._bump(fn.name, BlockKind.STORE)
        for item in reversed(fn.store.items):
            self._emit_gate(gate_inverse(item), env, remap, record, "uncompute")

    def _undo_instance(self, record: CallRecord, remap: dict[int, int]) -> None:
        """Invert the net effect of one recorded call."""
        if record.status == _Status.GARBAGE:
            # Net effect was compute+store; garbage ancilla are still live and
            # finally come home here.
            self._undo_store(record, record.env, remap)
            self._undo_record(record, remap)
            own = [q for name, _ in record.fn.ancillas for q in record.env[name]]
            self._push_clean([remap.get(q, q) for q in own])
            record.status = _Status.SELF_CLEANED
            record.cleaned_via = "auto"
            return
        if record.status == _Status.NO_ANC:
            self._undo_store(record, record.env, remap)
            self._undo_record(record, remap)
            return
        if record.status != _Status.SELF_CLEANED:
            raise ProgramError(f"cannot undo open call record for {record.fn.name}")

        fn = record.fn
        if record.cleaned_via == "explicit":
            # (compute; store; explicit-cleanup) inverted: run the cleanup
            # backwards on fresh scratch, un-store, then walk the recorded
            # compute backwards.
            anc2 = self._alloc_like(record, remap)
            remap2 = dict(remap)
            for name, _ in fn.ancillas:
                for old, new in zip(record.env[name], anc2[name]):
                    remap2[old] = new
            if fn.uncompute.items:
                self._bump(fn.name, BlockKind.UNCOMPUTE)
                for item in reversed(fn.uncompute.items):
                    self._emit_gate(gate_inverse(item), record.env, remap2, record, "uncompute")
            self._undo_store(record, record.env, remap2)
            self._undo_record(record, remap2)
            self._push_clean([q for name, _ in fn.ancillas for q in anc2[name]])
        else:
            # Self-cleaned with a derived inverse: undoing it means running the
            # whole thing again -- recompute, un-store, uncompute.  This is the
            # recursive-recomputation price of nested reclamation.
            args = [
                tuple(remap.get(q, q) for q in record.env[pname]) for pname, _ in fn.params
            ]
            redo = self._exec_compute_only(fn, args)
            self._undo_store(record, redo.record.env, {})
            self._undo_record(redo.record, {})
            own = [q for name, _ in fn.ancillas for q in redo.record.env[name]]
            self._push_clean(own)

    def _exec_compute_only(self, fn: FuncDef, args: list[tuple[int, ...]]) -> _Frame:
        frame = self._open_frame(fn, args)
        self._run_compute(frame)
        self._settle_pending(frame)
        # Children that deferred cleanup to us are discharged by the caller's
        # immediate undo of this record.
        return frame

    def _alloc_like(self, record: CallRecord, remap: dict[int, int]) -> Env:
        """Fresh scratch shaped like the record's ancilla declarations."""
        fn = record.fn
        frame = _Frame(record=CallRecord(fn=fn, env=dict(record.env), level=record.level), entry_clock=0)
        arg_ids = [remap.get(q, q) for name, _ in fn.params for q in record.env[name]]
        frame.entry_clock = max((self.ready[q] for q in arg_ids), default=0)
        out: Env = {}
        for aname, width in fn.ancillas:
            self._request_array(frame, aname, width, "ancilla")
            self._settle_pending(frame)
            out[aname] = frame.record.env[aname]
        return out

    def _push_clean(self, qubits: list[int]) -> None:
        for q in qubits:
            dirty = (
                self.shadow is not None
                and self.roles.get(q) == "ancilla"
                and self.shadow.get(q, 0) != 0
            )
            if dirty:
                raise VerifyError(f"qubit {q} pushed to heap in state |1>")
            self.state.heap_push([q], self.ready.get(q, 0))

    # ------------------------------------------------------------ costing

    def _estimator(self, fn_name: str) -> CommEstimator:
        est = self.estimators.get(fn_name)
        if est is None:
            est = self.estimators[fn_name] = CommEstimator()
        return est

    def _gate_weight(self, kind: GateKind) -> int:
        if kind is GateKind.TOFFOLI and self._decompose:
            return 15
        return 1

    def _static_block_gates(self, block: Block) -> int:
        return sum(
            self._gate_weight(i.kind) for i in block.items if isinstance(i, Gate)
        )

    def _static_size(self, fn_name: str) -> int:
        cached = self._static_size_cache.get(fn_name)
        if cached is not None:
            return cached
        fn = self.program.functions[fn_name]
        total = self._static_block_gates(fn.compute) + self._static_block_gates(fn.store)
        for item in fn.compute.items:
            if isinstance(item, Call):
                total += self._static_size(item.callee)
        self._static_size_cache[fn_name] = total
        return total

    def _static_rest(self, fn: FuncDef, call: Call, frame: _Frame) -> int:
        """Static gate count from just after ``call`` to the end of the
        enclosing compute block."""
        items = fn.compute.items
        idx = len(frame.record.compute_items)  # current position in the walk
        total = 0
        for item in items[idx + 1 :]:
            if isinstance(item, Gate):
                total += self._gate_weight(item.kind)
            elif isinstance(item, Call):
                total += self._static_size(item.callee)
        return total

    def _tree_size(self, record: CallRecord) -> int:
        total = record.own_compute_gates
        for item in record.compute_items:
            if isinstance(item, CallRecord):
                mult = 2 if item.status == _Status.SELF_CLEANED else 1
                total += mult * item.tree_size
        return total

    def _est_uncompute_gates(self, record: CallRecord) -> int:
        fn = record.fn
        if fn.uncompute_mode is UncomputeMode.EXPLICIT and fn.uncompute.items:
            return self._static_block_gates(fn.uncompute)
        return self._tree_size_now(record)

    def _tree_size_now(self, record: CallRecord) -> int:
        total = record.own_compute_gates
        for item in record.compute_items:
            if isinstance(item, CallRecord):
                mult = 2 if item.status == _Status.SELF_CLEANED else 1
                total += mult * (item.tree_size or self._tree_size_now(item))
        return total

    def _parent_unc_estimate(self, parent: _Frame) -> int:
        fn = parent.record.fn
        total = self._static_block_gates(fn.compute)
        for item in parent.record.compute_items:
            if isinstance(item, CallRecord):
                mult = 2 if item.status == _Status.SELF_CLEANED else 1
                total += mult * item.tree_size
        return total

    # ---------------------------------------------------------- emission

    def _resolve_slice(self, env: Env, arg: ArgSlice, remap: dict[int, int]) -> tuple[int, ...]:
        ids = env[arg.name][arg.lo : arg.hi]
        return tuple(remap.get(q, q) for q in ids)

    def _bind(self, env: Env, remap: dict[int, int], ref: QubitRef) -> int:
        q = env[ref.name][ref.index]
        return remap.get(q, q)

    def _emit_gate(
        self,
        gate: Gate,
        env: Env,
        remap: dict[int, int],
        record: CallRecord,
        block: str,
    ) -> None:
        qids = tuple(self._bind(env, remap, ref) for ref in gate.operands)
        if self.shadow is not None:
            self._shadow_apply(gate.kind, qids)
        if gate.kind is GateKind.TOFFOLI and self._decompose:
            bind = dict(zip(gate.operands, qids))
            for part in decompose_toffoli(gate):
                self._schedule(part.kind, tuple(bind[o] for o in part.operands), record, block)
            if block == "compute":
                record.own_compute_gates += 15
            return
        self._schedule(gate.kind, qids, record, block)
        if block == "compute":
            record.own_compute_gates += 1

    def _schedule(self, kind: GateKind, qids: tuple[int, ...], record: CallRecord, block: str) -> None:
        for q in qids:
            if q not in self.state.live:
                raise ProgramError(f"gate on non-live qubit {q} in {record.fn.name}")
        mode = self.machine.mode
        if mode is CommMode.LATTICE and len(qids) == 2:
            self._schedule_lattice_2q(kind, qids, record, block)
        elif mode is CommMode.FT and len(qids) == 2:
            self._schedule_braid_2q(kind, qids, record, block)
        else:
            start = max(self.ready[q] for q in qids)
            dur = self.machine.duration(kind)
            self._commit_event(kind, qids, start, start + dur, record, block)

    def _commit_event(
        self,
        kind: GateKind,
        qids: tuple[int, ...],
        start: int,
        end: int,
        record: CallRecord,
        block: str,
        routing: bool = False,
        inserted_swaps: int = 0,
        braid_retries: int = 0,
    ) -> None:
        cells = tuple(self.state.live.get(q) for q in qids)
        self.events.append(
            GateEvent(
                kind=kind,
                qubits=qids,
                cells=cells,
                start=start,
                end=end,
                fn=record.fn.name,
                block=block,
                routing=routing,
                inserted_swaps=inserted_swaps,
                braid_retries=braid_retries,
            )
        )
        for q in qids:
            self.ready[q] = end

    def _shadow_apply(self, kind: GateKind, qids: tuple[int, ...]) -> None:
        s = self.shadow
        if kind is GateKind.X:
            s[qids[0]] ^= 1
        elif kind is GateKind.CNOT:
            s[qids[1]] ^= s[qids[0]]
        elif kind is GateKind.TOFFOLI:
            s[qids[2]] ^= s[qids[0]] & s[qids[1]]
        elif kind is GateKind.SWAP:
            s[qids[0]], s[qids[1]] = s[qids[1]], s[qids[0]]

    # ------------------------------------------------------------ routing

    def _schedule_lattice_2q(
        self, kind: GateKind, qids: tuple[int, ...], record: CallRecord, block: str
    ) -> None:
        m = self.machine
        q1, q2 = qids
        swaps = 0
        last_end = 0
        while True:
            c1 = self.state.live[q1]
            c2 = self.state.live[q2]
            if distance(m, c1, c2) <= 1:
                break
            if swaps == 0:
                # later-ready operand walks; ties move the smaller cell index
                r1, r2 = self.ready[q1], self.ready[q2]
                if r1 != r2:
                    mover = q1 if r1 > r2 else q2
                else:
                    mover = q1 if m.cell_index(c1) < m.cell_index(c2) else q2
            mcell = self.state.live[mover]
            ocell = self.state.live[q2 if mover == q1 else q1]
            step = swap_path(m, mcell, ocell)[1]
            occupant = self.state.cell_owner.get(step)
            start = max(self.ready[mover], last_end)
            touched = [mover]
            if occupant is not None:
                if occupant in self.state.live:
                    start = max(start, self.ready[occupant])
                    touched.append(occupant)
                else:
                    for entry in self.state.heap:
                        if entry.qubit == occupant:
                            start = max(start, entry.busy_until)
            end = start + 3 * m.gate_cycles[GateKind.CNOT]
            self.events.append(
                GateEvent(
                    kind=GateKind.SWAP,
                    qubits=tuple(touched),
                    cells=(mcell, step),
                    start=start,
                    end=end,
                    fn=record.fn.name,
                    block=block,
                    routing=True,
                )
            )
            for q in touched:
                self.ready[q] = end
            if occupant is not None and occupant not in self.state.live:
                self.state.touch_heap_entry(occupant, end)
            self.state.swap_positions(mcell, step)
            last_end = end
            swaps += 1
        start = max(self.ready[q1], self.ready[q2], last_end)
        dur = self.machine.duration(kind)
        self._commit_event(
            kind, qids, start, start + dur, record, block, inserted_swaps=swaps
        )
        self._estimator(record.fn.name).add(swaps)

    def _schedule_braid_2q(
        self, kind: GateKind, qids: tuple[int, ...], record: CallRecord, block: str
    ) -> None:
        m = self.machine
        q1, q2 = qids
        c1 = self.state.live[q1]
        c2 = self.state.live[q2]
        dur = self.machine.duration(kind)
        live_cells = frozenset(c for c in self.state.live.values() if c is not None)
        t = max(self.ready[q1], self.ready[q2])
        retries = 0
        while True:
            route = self._try_braid(c1, c2, t, dur, live_cells)
            if route is not None:
                break
            retries += 1
            t += 1
        for cyc in range(route.start_cycle, route.end_cycle):
            self._braid_buckets.setdefault(cyc, []).append(route.cells)
        self._commit_event(
            kind, qids, t, t + dur, record, block, braid_retries=retries
        )
        self._estimator(record.fn.name).add(retries)

    def _try_braid(
        self, c1: Cell, c2: Cell, t: int, dur: int, live_cells: frozenset[Cell]
    ) -> Optional[BraidRoute]:
        m = self.machine
        active_cells: list[frozenset[Cell]] = []
        for cyc in range(t, t + dur):
            active_cells.extend(self._braid_buckets.get(cyc, ()))
        active = [BraidRoute(cells=cells, start_cycle=t, end_cycle=t + dur) for cells in active_cells]
        route = braid_route(m, c1, c2, active, start_cycle=t, blocked=live_cells)
        if route is not None:
            return BraidRoute(cells=route.cells, start_cycle=t, end_cycle=t + dur)
        # Both plain L shapes may be permanently blocked by resident qubits;
        # fall back to a channel detour (odd rows/columns only), which can be
        # blocked only by other braids.
        direct = braid_route(m, c1, c2, [], start_cycle=t, blocked=live_cells)
        if direct is not None:
            return None  # blocked by traffic, not by occupancy: retry later
        cells = frozenset(channel_route(m, c1, c2))
        if (cells - {c1, c2}) & live_cells:
            raise ProgramError(f"no braid route between {c1} and {c2}")
        if any(cells & other for other in active_cells):
            return None
        return BraidRoute(cells=cells, start_cycle=t, end_cycle=t + dur)

    # ------------------------------------------------------------- checks

    def _check_explicit_uncomputes(self) -> None:
        for fn in self.program.functions.values():
            if fn.uncompute_mode is not UncomputeMode.EXPLICIT or not fn.uncompute.items:
                continue
            derived = derive_uncompute(fn.compute)
            if tuple(fn.uncompute.items) != derived.items:
                raise VerifyError(
                    f"{fn.name}: explicit Uncompute block differs from the derived inverse"
                )


def simulate(
    program: Program,
    machine: Machine,
    policy: PolicyKind,
    options: SimOptions = SimOptions(),
) -> tuple[Timeline, MetricsReport]:
    """Run the compile-time simulation and report resource metrics."""
    scheduler = Scheduler(program, machine, policy, options)
    timeline = scheduler.run()
    report = build_report(timeline, options.noise)
    return timeline, report
