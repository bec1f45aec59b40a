"""Shared program sources and builders for tests."""

from __future__ import annotations

from sqir.parse import parse_program

FIG_STYLE_SOURCE = """
module fun1(qbit in[3], qbit out[1]) {
  qbit anc[1];
  Allocate(anc, 1);
  Compute {
    Toffoli(in[0], in[1], in[2]);
    CNOT(in[2], anc[0]);
    Toffoli(in[1], in[0], anc[0]);
  }
  Store {
    CNOT(anc[0], out[0]);
  }
  Uncompute {
    Toffoli(in[1], in[0], anc[0]);
    CNOT(in[2], anc[0]);
    Toffoli(in[0], in[1], in[2]);
  }
  Free(anc, 1);
}

module main() {
  qbit new[4];
  Allocate(new, 4);
  fun1(new[0:3], new[3]);
  Free(new, 4);
}
"""


def fig_style_program():
    return parse_program(FIG_STYLE_SOURCE)


def single_cnot_program():
    return parse_program(
        "module main() { qbit q[2]; Allocate(q, 2); CNOT(q[0], q[1]); Free(q, 2); }"
    )


def parallel_cnots_program():
    return parse_program(
        """
        module main() {
          qbit q[4];
          Allocate(q, 4);
          CNOT(q[0], q[1]);
          CNOT(q[2], q[3]);
          Free(q, 4);
        }
        """
    )
