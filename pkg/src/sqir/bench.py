"""Benchmark program generators.

* ``gen_adder(n)`` -- in-place controlled addition: |ctrl, a, b> becomes
  |ctrl, a+b mod 2^(n+1), b> when ctrl is set.  Built from majority-carry
  ripples: one module per output bit recomputes the carry chain into scratch,
  writes its sum bit, and uncomputes the chain, so every module is a genuine
  reclamation site.
* ``gen_multiplier(n)`` -- out-of-place controlled schoolbook multiplier
  calling a compact controlled-adder submodule once per operand bit.
* ``gen_synthetic(params)`` -- seeded random modular programs with a call
  tree of exact depth, bounded fan-out, inputs, ancilla and gates.
* ``gen_nested_chain(L, g)`` -- linear nest used to pin down the recomputation
  blowup of nested reclamation.

All generated programs use classical gates only (X/CNOT/Toffoli), so the
bit-vector shadow oracle applies everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from sqir.errors import ProgramError
from sqir.ir import (
    ArgSlice,
    Block,
    BlockKind,
    Call,
    FuncDef,
    Gate,
    GateKind,
    Program,
    QubitRef,
    UncomputeMode,
)
from sqir.rng import CounterRng


def _g(kind: GateKind, *refs: tuple[str, int]) -> Gate:
    return Gate(kind, tuple(QubitRef(n, i) for n, i in refs))


def _fn(
    name: str,
    params: list[tuple[str, int]],
    ancillas: list[tuple[str, int]],
    compute: list,
    store: list,
    uncompute: list | None,
    auto: bool,
) -> FuncDef:
    return FuncDef(
        name=name,
        params=tuple(params),
        ancillas=tuple(ancillas),
        compute=Block(BlockKind.COMPUTE, tuple(compute)),
        store=Block(BlockKind.STORE, tuple(store)),
        uncompute=Block(BlockKind.UNCOMPUTE, tuple(uncompute or [])),
        uncompute_mode=UncomputeMode.AUTO if auto else UncomputeMode.EXPLICIT,
    )


def _whole(fn_arrays: dict[str, int], name: str) -> ArgSlice:
    return ArgSlice(name, 0, fn_arrays[name])


# --------------------------------------------------------------- adders


def _carry_chain(depth: int) -> list[Gate]:
    """Toffoli network filling c[j] with the carry into bit j+1, reading a/b."""
    T = GateKind.TOFFOLI
    gates = [_g(T, ("a", 0), ("b", 0), ("c", 0))]
    for j in range(1, depth):
        gates += [
            _g(T, ("a", j), ("b", j), ("c", j)),
            _g(T, ("a", j), ("c", j - 1), ("c", j)),
            _g(T, ("b", j), ("c", j - 1), ("c", j)),
        ]
    return gates


def gen_adder(n: int) -> Program:
    """Controlled n-bit in-place adder; the a register is n+1 bits wide and
    receives the sum including the carry bit."""
    if n < 1:
        raise ProgramError("adder width must be >= 1")
    T = GateKind.TOFFOLI
    functions: dict[str, FuncDef] = {}
    top_items: list = []

    # One module per sum bit, highest first so carry recomputation always
    # reads un-summed lower bits.
    cout = f"carrybit{n}"
    functions[cout] = _fn(
        cout,
        params=[("ctrl", 1), ("a", n + 1), ("b", n)],
        ancillas=[("c", n)],
        compute=_carry_chain(n),
        store=[_g(T, ("ctrl", 0), ("c", n - 1), ("a", n))],
        uncompute=None,
        auto=True,
    )
    top_items.append(Call(cout, (ArgSlice("ctrl", 0, 1), ArgSlice("a", 0, n + 1), ArgSlice("b", 0, n))))

    for k in range(n - 1, 0, -1):
        name = f"sumbit{k}"
        functions[name] = _fn(
            name,
            params=[("ctrl", 1), ("a", n + 1), ("b", n)],
            ancillas=[("c", k)],
            compute=_carry_chain(k),
            store=[
                _g(T, ("ctrl", 0), ("b", k), ("a", k)),
                _g(T, ("ctrl", 0), ("c", k - 1), ("a", k)),
            ],
            uncompute=None,
            auto=True,
        )
        top_items.append(
            Call(name, (ArgSlice("ctrl", 0, 1), ArgSlice("a", 0, n + 1), ArgSlice("b", 0, n)))
        )

    add = f"add{n}"
    functions[add] = _fn(
        add,
        params=[("ctrl", 1), ("a", n + 1), ("b", n)],
        ancillas=[],
        compute=top_items,
        store=[_g(T, ("ctrl", 0), ("b", 0), ("a", 0))],
        uncompute=None,
        auto=False,
    )
    functions["main"] = _fn(
        "main",
        params=[],
        ancillas=[("ctrl", 1), ("a", n + 1), ("b", n)],
        compute=[Call(add, (ArgSlice("ctrl", 0, 1), ArgSlice("a", 0, n + 1), ArgSlice("b", 0, n)))],
        store=[],
        uncompute=None,
        auto=False,
    )
    return Program(functions=functions)


def compact_ctrl_adder(n: int, name: str) -> FuncDef:
    """Single-module controlled adder (A += B when ctrl) with an explicit
    cleanup block.

    The cleanup recomputes each carry from the already-summed A bits, adding
    control-conditioned correction terms, so it stays valid whether or not the
    sum was written.  Used inside the multiplier to keep its footprint small.
    """
    T = GateKind.TOFFOLI
    store = [_g(T, ("ctrl", 0), ("c", n - 1), ("a", n))]
    for k in range(n - 1, 0, -1):
        store += [
            _g(T, ("ctrl", 0), ("b", k), ("a", k)),
            _g(T, ("ctrl", 0), ("c", k - 1), ("a", k)),
        ]
    store.append(_g(T, ("ctrl", 0), ("b", 0), ("a", 0)))

    cleanup: list[Gate] = []
    for j in range(n - 1, 0, -1):
        cleanup += [
            _g(T, ("a", j), ("b", j), ("c", j)),
            _g(T, ("a", j), ("c", j - 1), ("c", j)),
            _g(T, ("b", j), ("c", j - 1), ("c", j)),
            _g(T, ("ctrl", 0), ("b", j), ("c", j)),
            _g(T, ("ctrl", 0), ("c", j - 1), ("c", j)),
        ]
    cleanup += [
        _g(T, ("a", 0), ("b", 0), ("c", 0)),
        _g(T, ("ctrl", 0), ("b", 0), ("c", 0)),
    ]
    return _fn(
        name,
        params=[("ctrl", 1), ("a", n + 1), ("b", n)],
        ancillas=[("c", n)],
        compute=_carry_chain(n),
        store=store,
        uncompute=cleanup,
        auto=False,
    )


def gen_multiplier(n: int) -> Program:
    """Controlled out-of-place multiplier: |ctrl, a, b, 0> -> |ctrl, a, b, ab>.

    Shift-and-add into a scratch product register, then a stored copy-out, so
    skipping or deferring any reclamation never corrupts the result path.
    """
    if n < 1:
        raise ProgramError("multiplier width must be >= 1")
    T = GateKind.TOFFOLI
    adder_name = f"cadd{n}"
    functions: dict[str, FuncDef] = {adder_name: compact_ctrl_adder(n, adder_name)}

    compute: list = []
    for j in range(n):
        compute.append(_g(T, ("ctrl", 0), ("a", j), ("t", 0)))
        compute.append(
            Call(
                adder_name,
                (ArgSlice("t", 0, 1), ArgSlice("p", j, j + n + 1), ArgSlice("b", 0, n)),
            )
        )
        compute.append(_g(T, ("ctrl", 0), ("a", j), ("t", 0)))
    store = [_g(GateKind.CNOT, ("p", i), ("out", i)) for i in range(2 * n)]

    mul = f"mul{n}"
    functions[mul] = _fn(
        mul,
        params=[("ctrl", 1), ("a", n), ("b", n), ("out", 2 * n)],
        ancillas=[("p", 2 * n), ("t", 1)],
        compute=compute,
        store=store,
        uncompute=None,
        auto=True,
    )
    functions["main"] = _fn(
        "main",
        params=[],
        ancillas=[("ctrl", 1), ("a", n), ("b", n), ("out", 2 * n)],
        compute=[
            Call(
                mul,
                (
                    ArgSlice("ctrl", 0, 1),
                    ArgSlice("a", 0, n),
                    ArgSlice("b", 0, n),
                    ArgSlice("out", 0, 2 * n),
                ),
            )
        ],
        store=[],
        uncompute=None,
        auto=False,
    )
    return Program(functions=functions)


# ------------------------------------------------------------ nested chain


def gen_nested_chain(levels: int, gates_per_level: int = 4) -> Program:
    """Linear nest main -> lvl1 -> ... -> lvlL; every level owns one scratch
    wire and uncomputes automatically."""
    if levels < 1:
        raise ProgramError("chain depth must be >= 1")
    functions: dict[str, FuncDef] = {}
    for k in range(1, levels + 1):
        compute: list = []
        for i in range(gates_per_level):
            if i % 2 == 0:
                compute.append(_g(GateKind.CNOT, ("q", i % 2), ("w", 0)))
            else:
                compute.append(_g(GateKind.TOFFOLI, ("q", 0), ("q", 1), ("w", 0)))
        if k < levels:
            compute.append(Call(f"lvl{k + 1}", (ArgSlice("q", 0, 2),)))
        functions[f"lvl{k}"] = _fn(
            f"lvl{k}",
            params=[("q", 2)],
            ancillas=[("w", 1)],
            compute=compute,
            store=[],
            uncompute=None,
            auto=True,
        )
    functions["main"] = _fn(
        "main",
        params=[],
        ancillas=[("q", 2)],
        compute=[Call("lvl1", (ArgSlice("q", 0, 2),))],
        store=[],
        uncompute=None,
        auto=False,
    )
    return Program(functions=functions)


# --------------------------------------------------------------- synthetic


@dataclass(frozen=True)
class SyntheticParams:
    levels: int
    max_callees: int
    max_inputs: int
    max_ancilla: int
    max_gates: int
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.levels, self.max_callees, self.max_inputs, self.max_ancilla, self.max_gates) < 1:
            raise ProgramError("synthetic parameters must be >= 1")


def _random_gates(rng: CounterRng, wires: list[tuple[str, int]], count: int) -> list[Gate]:
    gates = []
    for _ in range(count):
        kind = rng.choice([GateKind.X, GateKind.CNOT, GateKind.CNOT, GateKind.TOFFOLI])
        arity = {GateKind.X: 1, GateKind.CNOT: 2, GateKind.TOFFOLI: 3}[kind]
        if len(wires) < arity:
            kind, arity = GateKind.X, 1
        ops = rng.sample(wires, arity)
        gates.append(Gate(kind, tuple(QubitRef(n, i) for n, i in ops)))
    return gates


def gen_synthetic(p: SyntheticParams) -> Program:
    """Random modular program, deterministic in the seed.

    The call tree has depth exactly ``p.levels`` below main; each function
    has at most ``max_callees`` children, bounded input/ancilla widths, and a
    classical compute block with every scratch wire touched at least once.
    Store blocks stay empty so every function is garbage-free when uncomputed.
    """
    functions: dict[str, FuncDef] = {}

    def build(path: str, depth: int, forced: bool, donor_width: int) -> tuple[str, int]:
        rng = CounterRng(p.seed, f"fn:{path}")
        name = f"syn_{path}"
        width = rng.randint(1, min(p.max_inputs, donor_width))
        n_anc = rng.randint(1, p.max_ancilla)
        wires = [("q", i) for i in range(width)] + [("a", i) for i in range(n_anc)]

        if depth < p.levels:
            floor = 1 if forced else 0
            n_children = rng.randint(floor, p.max_callees)
        else:
            n_children = 0
        children: list[Call] = []
        for idx in range(n_children):
            child_name, child_width = build(
                f"{path}_{idx}", depth + 1, forced and idx == 0, max(width, n_anc)
            )
            donors = [d for d in (("q", width), ("a", n_anc)) if d[1] >= child_width]
            donor = rng.choice(donors)
            lo = rng.randint(0, donor[1] - child_width)
            children.append(Call(child_name, (ArgSlice(donor[0], lo, lo + child_width),)))

        gates: list[Gate] = []
        for i in range(n_anc):  # touch every scratch wire at least once
            other = rng.choice(wires[: width + i])
            gates.append(Gate(GateKind.CNOT, (QubitRef(*other), QubitRef("a", i))))
        n_gates = rng.randint(max(1, n_anc), p.max_gates)
        gates += _random_gates(rng, wires, max(0, n_gates - n_anc))

        items: list = list(gates)
        for call in children:
            items.insert(rng.randint(0, len(items)), call)

        functions[name] = _fn(
            name,
            params=[("q", width)],
            ancillas=[("a", n_anc)],
            compute=items,
            store=[],
            uncompute=None,
            auto=True,
        )
        return name, width

    rng = CounterRng(p.seed, "main")
    reg_width = p.max_inputs
    n_roots = rng.randint(1, p.max_callees)
    calls = []
    for idx in range(n_roots):
        name, width = build(str(idx), 1, forced=idx == 0, donor_width=reg_width)
        lo = rng.randint(0, reg_width - width)
        calls.append(Call(name, (ArgSlice("q", lo, lo + width),)))
    functions["main"] = _fn(
        "main",
        params=[],
        ancillas=[("q", reg_width)],
        compute=calls,
        store=[],
        uncompute=None,
        auto=False,
    )
    return Program(functions=functions)


# ----------------------------------------------------------------- presets


def load_preset(name: str) -> SyntheticParams:
    """Load a named synthetic preset from the packaged key=value files."""
    try:
        text = resources.files("sqir.presets").joinpath(f"{name}.preset").read_text()
    except FileNotFoundError:
        raise ProgramError(f"unknown preset {name!r}") from None
    values: dict[str, int] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition("=")
        values[key.strip()] = int(val.strip())
    return SyntheticParams(**values)


def preset_names() -> list[str]:
    out = []
    for entry in resources.files("sqir.presets").iterdir():
        if entry.name.endswith(".preset"):
            out.append(entry.name[: -len(".preset")])
    return sorted(out)


def bench_program(spec: str) -> Program:
    """Benchmark dispatcher for names like ``adder4``, ``adder:8``,
    ``multiplier3``, ``chain:3``, or a synthetic preset name."""
    name, _, arg = spec.partition(":")
    if name == "adder":
        return gen_adder(int(arg or 4))
    if name == "multiplier":
        return gen_multiplier(int(arg or 3))
    if name == "chain":
        parts = arg.split(",") if arg else ["3"]
        gates = int(parts[1]) if len(parts) > 1 else 4
        return gen_nested_chain(int(parts[0]), gates)
    if name == "adder4":
        return gen_adder(4)
    if name == "multiplier3":
        return gen_multiplier(3)
    return gen_synthetic(load_preset(spec))
