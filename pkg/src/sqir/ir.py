"""Reversible-program IR: gates, code blocks, function definitions, call graph.

Everything here is immutable after construction and safe to share across
threads.  Gate operands are function-scoped references; binding to concrete
qubits happens in the scheduler.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from sqir.errors import ProgramError


class GateKind(str, Enum):
    X = "X"
    H = "H"
    T = "T"
    TDG = "Tdg"
    CNOT = "CNOT"
    TOFFOLI = "Toffoli"
    SWAP = "SWAP"


GATE_ARITY: dict[GateKind, int] = {
    GateKind.X: 1,
    GateKind.H: 1,
    GateKind.T: 1,
    GateKind.TDG: 1,
    GateKind.CNOT: 2,
    GateKind.SWAP: 2,
    GateKind.TOFFOLI: 3,
}

# Gates whose action is a permutation of computational basis states; only
# these are covered by the bit-vector shadow simulator.
CLASSICAL_KINDS = frozenset({GateKind.X, GateKind.CNOT, GateKind.TOFFOLI, GateKind.SWAP})

_ADJOINT = {GateKind.T: GateKind.TDG, GateKind.TDG: GateKind.T}


@dataclass(frozen=True)
class QubitRef:
    """A wire reference scoped to one function: array name + element index."""

    name: str
    index: int

    def __str__(self) -> str:
        return f"{self.name}[{self.index}]"


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    operands: tuple[QubitRef, ...]

    def __post_init__(self) -> None:
        want = GATE_ARITY[self.kind]
        if len(self.operands) != want:
            raise ProgramError(
                f"{self.kind.value} takes {want} operand(s), got {len(self.operands)}"
            )
        if len(set(self.operands)) != len(self.operands):
            raise ProgramError(f"duplicate operand in {self.kind.value} gate")

    def __str__(self) -> str:
        return f"{self.kind.value}({', '.join(str(q) for q in self.operands)})"


def gate_inverse(g: Gate) -> Gate:
    """Inverse gate; T and Tdg swap, every other supported kind is self-inverse."""
    return Gate(_ADJOINT.get(g.kind, g.kind), g.operands)


def decompose_toffoli(g: Gate) -> list[Gate]:
    """Standard 15-gate Clifford+T network for a Toffoli (2 H, 7 T/Tdg, 6 CNOT).

    Acts only on the gate's three operands.
    """
    if g.kind is not GateKind.TOFFOLI:
        raise ProgramError("decompose_toffoli expects a Toffoli gate")
    a, b, c = g.operands
    k = GateKind
    seq = [
        (k.H, (c,)),
        (k.CNOT, (b, c)),
        (k.TDG, (c,)),
        (k.CNOT, (a, c)),
        (k.T, (c,)),
        (k.CNOT, (b, c)),
        (k.TDG, (c,)),
        (k.CNOT, (a, c)),
        (k.T, (b,)),
        (k.T, (c,)),
        (k.H, (c,)),
        (k.CNOT, (a, b)),
        (k.T, (a,)),
        (k.TDG, (b,)),
        (k.CNOT, (a, b)),
    ]
    return [Gate(kind, ops) for kind, ops in seq]


@dataclass(frozen=True)
class ArgSlice:
    """Call argument: a half-open slice [lo, hi) of a caller array."""

    name: str
    lo: int
    hi: int

    @property
    def width(self) -> int:
        return self.hi - self.lo

    def __str__(self) -> str:
        if self.lo == 0 and self.hi == -1:  # unresolved whole-array marker
            return self.name
        if self.width == 1:
            return f"{self.name}[{self.lo}]"
        return f"{self.name}[{self.lo}:{self.hi}]"


@dataclass(frozen=True)
class Call:
    callee: str
    args: tuple[ArgSlice, ...]

    def __str__(self) -> str:
        return f"{self.callee}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class InverseCall:
    """Marker produced by derive_uncompute: undo the callee's whole effect."""

    call: Call


Item = Union[Gate, Call, InverseCall]


class BlockKind(Enum):
    COMPUTE = "Compute"
    STORE = "Store"
    UNCOMPUTE = "Uncompute"


@dataclass(frozen=True)
class Block:
    kind: BlockKind
    items: tuple[Item, ...] = ()

    def __len__(self) -> int:
        return len(self.items)


class UncomputeMode(Enum):
    AUTO = "auto"
    EXPLICIT = "explicit"


def derive_uncompute(block: Block) -> Block:
    """Reverse the block, inverting each gate and flipping call markers.

    Applying it twice yields the original item sequence.
    """
    out: list[Item] = []
    for item in reversed(block.items):
        if isinstance(item, Gate):
            out.append(gate_inverse(item))
        elif isinstance(item, Call):
            out.append(InverseCall(item))
        elif isinstance(item, InverseCall):
            out.append(item.call)
        else:
            raise ProgramError(f"cannot invert block item {item!r}")
    return Block(BlockKind.UNCOMPUTE, tuple(out))


@dataclass(frozen=True)
class FuncDef:
    """One module: formal parameters, local ancilla, and the three blocks.

    ``uncompute_mode`` is AUTO when the source said ``Uncompute { auto }``;
    a missing Uncompute block parses as an empty explicit block (the function
    never undoes its own compute work at its reclamation point).
    """

    name: str
    params: tuple[tuple[str, int], ...]
    ancillas: tuple[tuple[str, int], ...]
    compute: Block
    store: Block
    uncompute: Block
    uncompute_mode: UncomputeMode

    def width(self, name: str) -> int:
        for n, w in self.params + self.ancillas:
            if n == name:
                return w
        raise ProgramError(f"{self.name}: unknown wire array {name!r}")

    def is_ancilla(self, name: str) -> bool:
        return any(n == name for n, _ in self.ancillas)

    def declares(self, name: str) -> bool:
        return any(n == name for n, _ in self.params + self.ancillas)

    def calls(self) -> list[Call]:
        out = [i for i in self.compute.items if isinstance(i, Call)]
        out += [i for i in self.store.items if isinstance(i, Call)]
        return out


@dataclass(frozen=True)
class Program:
    functions: dict[str, FuncDef]
    entry: str = "main"

    def entry_func(self) -> FuncDef:
        return self.functions[self.entry]

    def is_classical(self) -> bool:
        """True when every gate is a basis-state permutation (X/CNOT/Toffoli/SWAP)."""
        for fn in self.functions.values():
            for block in (fn.compute, fn.store, fn.uncompute):
                for item in block.items:
                    if isinstance(item, Gate) and item.kind not in CLASSICAL_KINDS:
                        return False
        return True


@dataclass(frozen=True)
class CallGraph:
    """Static call structure with per-function nesting levels.

    ``level`` is the longest caller chain from the entry function (entry = 0);
    only functions reachable from the entry are included.
    """

    children: dict[str, tuple[str, ...]]
    levels: dict[str, int]


def build_call_graph(program: Program) -> CallGraph:
    if program.entry not in program.functions:
        raise ProgramError(f"no entry function {program.entry!r}")
    children: dict[str, tuple[str, ...]] = {}
    for name, fn in program.functions.items():
        children[name] = tuple(c.callee for c in fn.calls())

    # Longest path from the entry; cycle detection via DFS colors.
    levels: dict[str, int] = {}
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    def visit(name: str, level: int) -> None:
        if state.get(name) == 1:
            raise ProgramError(f"recursive call involving {name!r}")
        if levels.get(name, -1) < level:
            levels[name] = level
        elif state.get(name) == 2:
            return
        state[name] = 1
        for child in children.get(name, ()):
            if child not in program.functions:
                raise ProgramError(f"{name}: call to undefined function {child!r}")
            visit(child, levels[name] + 1)
        state[name] = 2

    visit(program.entry, 0)
    # Re-propagate: a deeper path found later must push descendants down too.
    changed = True
    while changed:
        changed = False
        for name, lvl in list(levels.items()):
            for child in children.get(name, ()):
                if levels.get(child, -1) < lvl + 1:
                    levels[child] = lvl + 1
                    changed = True
    return CallGraph(children=children, levels=levels)


def function_level(cg: CallGraph, name: str) -> int:
    """Nesting level of ``name`` (entry has level 0, max over caller paths)."""
    try:
        return cg.levels[name]
    except KeyError:
        raise ProgramError(f"function {name!r} not reachable from entry") from None


def validate_program(program: Program) -> CallGraph:
    """Structural checks beyond the grammar; returns the call graph.

    Verifies call targets and argument widths, forbids call-sites in Store
    blocks and in explicit Uncompute blocks, checks wire references, and
    rejects recursion.
    """
    cg = build_call_graph(program)
    for fn in program.functions.values():
        _check_block_refs(program, fn, fn.compute)
        _check_block_refs(program, fn, fn.store)
        _check_block_refs(program, fn, fn.uncompute)
        for item in fn.store.items:
            if isinstance(item, (Call, InverseCall)):
                raise ProgramError(f"{fn.name}: Store blocks may not contain call-sites")
        if fn.uncompute_mode is UncomputeMode.EXPLICIT:
            for item in fn.uncompute.items:
                if isinstance(item, (Call, InverseCall)):
                    raise ProgramError(
                        f"{fn.name}: explicit Uncompute blocks may contain gates only"
                    )
    return cg


def _check_block_refs(program: Program, fn: FuncDef, block: Block) -> None:
    for item in block.items:
        if isinstance(item, Gate):
            for q in item.operands:
                if not fn.declares(q.name):
                    raise ProgramError(f"{fn.name}: undeclared wire {q}")
                if not 0 <= q.index < fn.width(q.name):
                    raise ProgramError(f"{fn.name}: index out of range in {q}")
        elif isinstance(item, Call):
            callee = program.functions.get(item.callee)
            if callee is None:
                raise ProgramError(f"{fn.name}: call to undefined function {item.callee!r}")
            if len(item.args) != len(callee.params):
                raise ProgramError(
                    f"{fn.name}: {item.callee} takes {len(callee.params)} argument(s), "
                    f"got {len(item.args)}"
                )
            for arg, (pname, pwidth) in zip(item.args, callee.params):
                if not fn.declares(arg.name):
                    raise ProgramError(f"{fn.name}: undeclared wire array {arg.name!r}")
                if not (0 <= arg.lo < arg.hi <= fn.width(arg.name)):
                    raise ProgramError(f"{fn.name}: bad slice {arg} of {arg.name}")
                if arg.width != pwidth:
                    raise ProgramError(
                        f"{fn.name}: argument {arg} has width {arg.width}, "
                        f"{item.callee} parameter {pname} expects {pwidth}"
                    )
