"""sqir: compiler and compile-time resource simulator for modular reversible
quantum programs.

Programs are written in a small C-like DSL (``.sqir`` files) built around
compute/store/uncompute code blocks with explicit ancilla allocation and
reclamation points.  The simulator walks the call tree, lets a reclamation
policy decide at every ``Free`` whether to uncompute or defer garbage to the
caller, inserts swap chains (2D lattice) or braids (error-corrected grid) for
two-qubit gates, and reports active quantum volume, gate/swap/depth counts and
an analytical worst-case success rate.
"""

from sqir.ir import (
    Gate,
    GateKind,
    Program,
    QubitRef,
    decompose_toffoli,
    derive_uncompute,
    gate_inverse,
)
from sqir.machine import CommMode, Machine
from sqir.metrics import MetricsReport, NoiseModel
from sqir.parse import parse_program, pretty_print
from sqir.policy import Decision, PolicyKind
from sqir.schedule import SimOptions, Timeline, simulate

__version__ = "0.1.0"

__all__ = [
    "CommMode",
    "Decision",
    "Gate",
    "GateKind",
    "Machine",
    "MetricsReport",
    "NoiseModel",
    "PolicyKind",
    "Program",
    "QubitRef",
    "SimOptions",
    "Timeline",
    "decompose_toffoli",
    "derive_uncompute",
    "gate_inverse",
    "parse_program",
    "pretty_print",
    "simulate",
]
