"""Command-line entry point.

Single runs produce one JSON report object; passing comma-separated values to
--policy and/or --arch turns the invocation into a sweep that emits a JSON
array with one row per combination.  Exit codes: 0 success, 1 bad input or
configuration, 2 allocation deadlock, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from sqir.bench import bench_program, gen_synthetic, SyntheticParams
from sqir.errors import DeadlockError, ParseError, ProgramError, SqirError, VerifyError
from sqir.machine import CommMode, Machine
from sqir.metrics import NoiseModel, usage_trace
from sqir.parse import parse_file
from sqir.policy import LaaWeights, PolicyKind
from sqir.schedule import SimOptions, simulate

_EXIT_OK = 0
_EXIT_BAD_INPUT = 1
_EXIT_DEADLOCK = 2
_EXIT_VERIFY = 3


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sqir",
        description="Compile-time resource simulator for modular reversible programs",
    )
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="FILE", help=".sqir source file")
    src.add_argument(
        "--bench",
        metavar="NAME[:params]",
        help="built-in benchmark (adder4, adder:N, multiplier3, multiplier:N, "
        "chain:L[,g], jasmine-s, elsa-s, belle-s, jasmine, elsa, belle)",
    )
    src.add_argument(
        "--synthetic",
        metavar="l,d,nq,na,ng,seed",
        help="random modular program from raw parameters",
    )
    ap.add_argument("--policy", default="square", help="eager|lazy|square (comma list sweeps)")
    ap.add_argument("--arch", default="lattice", help="lattice|full|ft (comma list sweeps)")
    ap.add_argument("--grid", metavar="WxH", help="grid size, required for lattice/ft")
    ap.add_argument("--max-qubits", type=int, default=0, metavar="N")
    ap.add_argument(
        "--noise",
        metavar="eps1,eps2,t1us,t2us,cyclens",
        help="noise model parameters (default 0.001,0.01,50,70,100)",
    )
    ap.add_argument("--report", metavar="FILE", help="write the JSON report here (default stdout)")
    ap.add_argument("--trace", metavar="FILE", help="write a cycle,active_qubits CSV (single runs)")
    ap.add_argument("--verify", action="store_true", help="run the bit-vector shadow checks")
    ap.add_argument(
        "--check-uncompute",
        action="store_true",
        help="require explicit Uncompute blocks to equal the derived inverse",
    )
    ap.add_argument("--jobs", type=int, default=1, metavar="N", help="parallel sweep rows")
    ap.add_argument("--laa-alpha", type=float, default=0.5, help="serialization weight")
    ap.add_argument("--laa-beta", type=float, default=1.0, help="area-expansion weight")
    return ap


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        w, _, h = text.lower().partition("x")
        width, height = int(w), int(h)
    except ValueError:
        raise ProgramError(f"bad grid {text!r}, expected WxH") from None
    if width < 1 or height < 1:
        raise ProgramError(f"bad grid {text!r}, sides must be >= 1")
    return width, height


def _parse_noise(text: str | None) -> NoiseModel:
    if not text:
        return NoiseModel()
    parts = text.split(",")
    if len(parts) != 5:
        raise ProgramError("--noise expects eps1,eps2,t1us,t2us,cyclens")
    e1, e2, t1, t2, tau = (float(p) for p in parts)
    return NoiseModel(eps_single=e1, eps_two=e2, t1_us=t1, t2_us=t2, cycle_ns=tau)


def _load_program(args: argparse.Namespace):
    if args.input:
        return parse_file(args.input)
    if args.bench:
        return bench_program(args.bench)
    parts = args.synthetic.split(",")
    if len(parts) != 6:
        raise ProgramError("--synthetic expects l,d,nq,na,ng,seed")
    l, d, nq, na, ng, seed = (int(p) for p in parts)
    return gen_synthetic(
        SyntheticParams(
            levels=l, max_callees=d, max_inputs=nq, max_ancilla=na, max_gates=ng, seed=seed
        )
    )


def _build_machine(arch: str, grid: str | None, max_qubits: int) -> Machine:
    try:
        mode = CommMode(arch)
    except ValueError:
        raise ProgramError(f"unknown arch {arch!r}") from None
    if mode is CommMode.FULL:
        return Machine(mode, 0, 0, max_qubits or 1_000_000)
    if not grid:
        raise ProgramError(f"--grid is required for {arch}")
    width, height = _parse_grid(grid)
    probe = Machine(mode, width, height, 1)
    return Machine(mode, width, height, max_qubits or probe.capacity())


def _grid_label(machine: Machine) -> str | None:
    if machine.mode is CommMode.FULL:
        return None
    return f"{machine.width}x{machine.height}"


def run_one(program, policy: str, arch: str, args: argparse.Namespace) -> dict:
    machine = _build_machine(arch, args.grid, args.max_qubits)
    options = SimOptions(
        verify=args.verify,
        check_uncompute=args.check_uncompute,
        laa=LaaWeights(alpha=args.laa_alpha, beta=args.laa_beta),
        noise=_parse_noise(args.noise),
    )
    timeline, report = simulate(program, machine, PolicyKind(policy), options)
    row = {
        "policy": policy,
        "arch": arch,
        "grid": _grid_label(machine),
        "gate_count": report.gate_count,
        "swap_count": report.swap_count,
        "braid_retries": report.braid_retry_count,
        "qubit_count": report.qubit_count,
        "depth_cycles": report.circuit_depth,
        "aqv": report.aqv,
        "success_rate": report.success_rate,
        "cer_decisions": [
            {
                "function": d.fn,
                "level": d.level,
                "decision": d.decision.value,
                "c1": d.c1,
                "c0": d.c0,
            }
            for d in timeline.decisions
        ],
    }
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write("cycle,active_qubits\n")
            for cycle, active in usage_trace(timeline):
                fh.write(f"{cycle},{active}\n")
    return row


def _sweep_row(payload) -> dict:
    program, policy, arch, args = payload
    try:
        return run_one(program, policy, arch, args)
    except DeadlockError as exc:
        return {"policy": policy, "arch": arch, "error": str(exc), "exit_code": _EXIT_DEADLOCK}
    except VerifyError as exc:
        return {"policy": policy, "arch": arch, "error": str(exc), "exit_code": _EXIT_VERIFY}
    except SqirError as exc:
        return {"policy": policy, "arch": arch, "error": str(exc), "exit_code": _EXIT_BAD_INPUT}


def _emit(args: argparse.Namespace, payload) -> None:
    text = json.dumps(payload, indent=2)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def main(argv: list[str] | None = None) -> int:
    ap = build_arg_parser()
    args = ap.parse_args(argv)
    policies = [p.strip() for p in args.policy.split(",") if p.strip()]
    archs = [a.strip() for a in args.arch.split(",") if a.strip()]
    if not policies or not archs:
        print("error: empty --policy or --arch", file=sys.stderr)
        return _EXIT_BAD_INPUT

    for p in policies:
        if p not in {k.value for k in PolicyKind}:
            print(f"error: unknown policy {p!r}", file=sys.stderr)
            return _EXIT_BAD_INPUT

    try:
        program = _load_program(args)
    except (ParseError, ProgramError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_BAD_INPUT

    if len(policies) == 1 and len(archs) == 1:
        try:
            row = run_one(program, policies[0], archs[0], args)
        except DeadlockError as exc:
            print(f"deadlock: {exc}", file=sys.stderr)
            return _EXIT_DEADLOCK
        except VerifyError as exc:
            print(f"verification failed: {exc}", file=sys.stderr)
            return _EXIT_VERIFY
        except SqirError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return _EXIT_BAD_INPUT
        _emit(args, row)
        return _EXIT_OK

    if args.trace:
        print("error: --trace applies to single runs only", file=sys.stderr)
        return _EXIT_BAD_INPUT
    jobs = [(program, p, a, args) for p in policies for a in archs]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    _emit(args, rows)
    return _EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
