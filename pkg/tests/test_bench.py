"""Functional correctness of generated benchmarks against the flat-expansion
classical oracle, plus generator determinism and structure bounds."""

from __future__ import annotations

import pytest

from oracles import flatten_program, pack_trials, run_classical, unpack_trials
from sqir.bench import (
    SyntheticParams,
    bench_program,
    gen_adder,
    gen_multiplier,
    gen_nested_chain,
    gen_synthetic,
    load_preset,
    preset_names,
)
from sqir.ir import build_call_graph, validate_program
from sqir.parse import parse_program, pretty_print


def _simulate_adder(n: int, trials: list[tuple[int, int, int]]) -> list[tuple[int, int]]:
    """Run (ctrl, a, b) triples through the flat oracle; returns (a', b')."""
    program = gen_adder(n)
    gates, arrays, total = flatten_program(program)
    init = {}
    init[arrays["ctrl"][0]] = pack_trials([c for c, _, _ in trials])
    for bit, wire in enumerate(arrays["a"]):
        init[wire] = pack_trials([(a >> bit) & 1 for _, a, _ in trials])
    for bit, wire in enumerate(arrays["b"]):
        init[wire] = pack_trials([(b >> bit) & 1 for _, _, b in trials])
    final = run_classical(gates, init, total)
    out = []
    for t in range(len(trials)):
        a_val = sum(
            ((final[wire] >> t) & 1) << bit for bit, wire in enumerate(arrays["a"])
        )
        b_val = sum(
            ((final[wire] >> t) & 1) << bit for bit, wire in enumerate(arrays["b"])
        )
        out.append((a_val, b_val))
    return out


@pytest.mark.parametrize("n", [1, 2, 3])
def test_adder_exhaustive(n):
    trials = [
        (c, a, b)
        for c in (0, 1)
        for a in range(2 ** (n + 1))
        for b in range(2**n)
    ]
    results = _simulate_adder(n, trials)
    for (c, a, b), (a_out, b_out) in zip(trials, results):
        want = (a + b) % 2 ** (n + 1) if c else a
        assert a_out == want, (c, a, b)
        assert b_out == b


def test_adder4_examples():
    results = _simulate_adder(4, [(1, 3, 5), (0, 9, 6), (1, 15, 1)])
    assert results[0][0] == 8
    assert results[1] == (9, 6)
    assert results[2][0] == 16  # carry into bit 4


def _simulate_multiplier(n: int, trials: list[tuple[int, int, int]]) -> list[int]:
    program = gen_multiplier(n)
    gates, arrays, total = flatten_program(program)
    init = {}
    init[arrays["ctrl"][0]] = pack_trials([c for c, _, _ in trials])
    for bit, wire in enumerate(arrays["a"]):
        init[wire] = pack_trials([(a >> bit) & 1 for _, a, _ in trials])
    for bit, wire in enumerate(arrays["b"]):
        init[wire] = pack_trials([(b >> bit) & 1 for _, _, b in trials])
    final = run_classical(gates, init, total)
    outs = []
    for t in range(len(trials)):
        outs.append(
            sum(((final[wire] >> t) & 1) << bit for bit, wire in enumerate(arrays["out"]))
        )
    return outs


@pytest.mark.parametrize("n", [1, 2])
def test_multiplier_exhaustive(n):
    trials = [
        (c, a, b) for c in (0, 1) for a in range(2**n) for b in range(2**n)
    ]
    outs = _simulate_multiplier(n, trials)
    for (c, a, b), out in zip(trials, outs):
        assert out == (a * b if c else 0), (c, a, b)


def test_multiplier3_examples():
    outs = _simulate_multiplier(3, [(1, 3, 5), (0, 3, 5), (1, 0, 7)])
    assert outs == [15, 0, 0]


def test_multiplier_inputs_survive():
    program = gen_multiplier(2)
    gates, arrays, total = flatten_program(program)
    init = {arrays["ctrl"][0]: pack_trials([1])}
    init[arrays["a"][0]] = pack_trials([1])
    init[arrays["a"][1]] = pack_trials([1])
    init[arrays["b"][0]] = pack_trials([1])
    final = run_classical(gates, init, total)
    assert final[arrays["a"][0]] == 1 and final[arrays["a"][1]] == 1
    assert final[arrays["b"][0]] == 1 and final[arrays["b"][1]] == 0
    # every non-register wire (scratch) ends clean
    register = {w for wires in arrays.values() for w in wires}
    for wire, val in final.items():
        if wire not in register:
            assert val == 0, wire


def test_adder_scratch_ends_clean():
    program = gen_adder(3)
    gates, arrays, total = flatten_program(program)
    init = {
        arrays["ctrl"][0]: pack_trials([1, 1, 0, 1]),
        arrays["a"][0]: pack_trials([1, 0, 1, 1]),
        arrays["a"][2]: pack_trials([0, 1, 1, 1]),
        arrays["b"][1]: pack_trials([1, 1, 0, 1]),
    }
    final = run_classical(gates, init, total)
    register = {w for wires in arrays.values() for w in wires}
    for wire, val in final.items():
        if wire not in register:
            assert val == 0


def test_nested_chain_shape():
    program = gen_nested_chain(4, gates_per_level=3)
    cg = build_call_graph(program)
    assert cg.levels["lvl4"] == 4
    for k in range(1, 4):
        fn = program.functions[f"lvl{k}"]
        calls = fn.calls()
        assert len(calls) == 1 and calls[0].callee == f"lvl{k + 1}"
    assert program.functions["lvl4"].calls() == []


def test_synthetic_deterministic_in_seed():
    p = SyntheticParams(levels=3, max_callees=3, max_inputs=6, max_ancilla=3, max_gates=10, seed=99)
    assert pretty_print(gen_synthetic(p)) == pretty_print(gen_synthetic(p))
    other = SyntheticParams(
        levels=3, max_callees=3, max_inputs=6, max_ancilla=3, max_gates=10, seed=100
    )
    assert pretty_print(gen_synthetic(p)) != pretty_print(gen_synthetic(other))


def test_synthetic_depth_exact():
    for seed in range(5):
        p = SyntheticParams(
            levels=3, max_callees=2, max_inputs=5, max_ancilla=2, max_gates=8, seed=seed
        )
        cg = build_call_graph(gen_synthetic(p))
        assert max(cg.levels.values()) == 3


def test_synthetic_depth_one_has_no_nested_calls():
    p = SyntheticParams(levels=1, max_callees=3, max_inputs=4, max_ancilla=2, max_gates=6, seed=3)
    program = gen_synthetic(p)
    for name, fn in program.functions.items():
        if name != "main":
            assert fn.calls() == []


def test_synthetic_respects_bounds():
    p = SyntheticParams(levels=3, max_callees=2, max_inputs=5, max_ancilla=3, max_gates=7, seed=12)
    program = gen_synthetic(p)
    for name, fn in program.functions.items():
        if name == "main":
            continue
        assert sum(w for _, w in fn.params) <= p.max_inputs
        assert sum(w for _, w in fn.ancillas) <= p.max_ancilla
        gates = [i for i in fn.compute.items if not hasattr(i, "callee")]
        assert 1 <= len(gates) <= p.max_gates
        assert len(fn.calls()) <= p.max_callees


@pytest.mark.parametrize("seed", range(8))
def test_synthetic_round_trip_identity(seed):
    """compute followed by the derived inverse returns every wire to its
    initial value (random basis states packed into bit columns)."""
    p = SyntheticParams(levels=3, max_callees=2, max_inputs=5, max_ancilla=3, max_gates=10, seed=seed)
    program = gen_synthetic(p)
    gates, arrays, total = flatten_program(program)
    init = {w: pack_trials([(17 * w + 31 * t) % 2 for t in range(64)]) for w in arrays.get("q", [])}
    final = run_classical(gates, init, total)
    for w in range(total):
        assert final.get(w, 0) == init.get(w, 0)


def test_generated_programs_validate_and_round_trip():
    programs = [
        gen_adder(4),
        gen_multiplier(3),
        gen_nested_chain(3),
        gen_synthetic(
            SyntheticParams(levels=2, max_callees=2, max_inputs=4, max_ancilla=2, max_gates=6, seed=1)
        ),
    ]
    for program in programs:
        validate_program(program)
        assert parse_program(pretty_print(program)) == program


def test_presets_load_and_generate():
    names = preset_names()
    assert {"jasmine-s", "elsa-s", "belle-s", "jasmine", "elsa", "belle"} <= set(names)
    for name in ("jasmine-s", "elsa-s", "belle-s"):
        params = load_preset(name)
        program = gen_synthetic(params)
        validate_program(program)


def test_bench_dispatcher():
    assert "add4" in bench_program("adder4").functions
    assert "add8" in bench_program("adder:8").functions
    assert "mul3" in bench_program("multiplier3").functions
    assert "lvl3" in bench_program("chain:3").functions
    assert "main" in bench_program("belle-s").functions
