"""Cost model, reclamation decisions, communication estimator, allocation scoring."""

from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sqir.alloc import AllocationState
from sqir.errors import ProgramError
from sqir.machine import fully_connected, lattice
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
    reclaim_decision,
)


def _inputs(**kw) -> CostInputs:
    base = dict(n_active=1, n_anc=1, g_uncomp=1, g_p=1, s=1.0, level=0)
    base.update(kw)
    return CostInputs(**base)


# --- uncompute cost -----------------------------------------------------------


def test_cost_uncompute_direct_arithmetic():
    c = _inputs(n_active=4, g_uncomp=10, s=1.5, level=2)
    assert cost_uncompute(c) == pytest.approx(240.0)


def test_cost_uncompute_identity_exponent():
    assert cost_uncompute(_inputs(level=0)) == pytest.approx(1.0)


def test_cost_uncompute_nothing_to_undo():
    assert cost_uncompute(_inputs(g_uncomp=0, level=3)) == 0.0


# --- holding cost ----------------------------------------------------------------


def test_cost_no_uncompute_direct_arithmetic():
    c = _inputs(n_anc=2, g_p=50, s=2.0, n_active=8)
    assert cost_no_uncompute(c) == pytest.approx(200 * math.sqrt(10 / 8))
    assert cost_no_uncompute(c) == pytest.approx(223.60679, abs=1e-4)


def test_cost_no_uncompute_no_garbage():
    assert cost_no_uncompute(_inputs(n_anc=0, g_p=99)) == 0.0


def test_cost_no_uncompute_unit_case():
    c = _inputs(n_anc=1, n_active=1, g_p=10, s=1.0)
    assert cost_no_uncompute(c) == pytest.approx(10 * math.sqrt(2))


def test_cost_no_uncompute_rejects_zero_active():
    with pytest.raises(ProgramError):
        cost_no_uncompute(_inputs(n_active=0))


# --- decision -------------------------------------------------------------------


def test_decision_transfer_when_uncompute_expensive():
    c = _inputs(n_active=8, n_anc=2, g_uncomp=20, g_p=50, s=2.0, level=1)
    assert cost_uncompute(c) == pytest.approx(640.0)
    assert cost_no_uncompute(c) == pytest.approx(223.60679, abs=1e-4)
    assert reclaim_decision(c) is Decision.TRANSFER


def test_decision_free_uncompute():
    assert reclaim_decision(_inputs(g_uncomp=0, g_p=0)) is Decision.UNCOMPUTE


def test_decision_tie_favors_reclamation():
    # exact tie: C1 = 1*6*1*1 = 6 and C0 = 3*1*1*sqrt(4/1) = 6
    c = _inputs(n_active=1, n_anc=3, g_uncomp=6, g_p=1, s=1.0, level=0)
    assert cost_uncompute(c) == cost_no_uncompute(c)
    assert reclaim_decision(c) is Decision.UNCOMPUTE


@given(
    st.integers(1, 50),
    st.integers(0, 50),
    st.integers(0, 500),
    st.integers(0, 500),
    st.floats(0.01, 100.0),
    st.integers(0, 8),
    st.floats(0.01, 1000.0),
)
def test_decision_scale_invariant_in_s(n_active, n_anc, g_uncomp, g_p, s, level, factor):
    base = _inputs(n_active=n_active, n_anc=n_anc, g_uncomp=g_uncomp, g_p=g_p, s=s, level=level)
    scaled = _inputs(
        n_active=n_active, n_anc=n_anc, g_uncomp=g_uncomp, g_p=g_p, s=s * factor, level=level
    )
    assert reclaim_decision(base) is reclaim_decision(scaled)


# --- policy dispatch ---------------------------------------------------------------


def test_policy_free_eager_always_uncomputes():
    assert policy_free(PolicyKind.EAGER, 3, None) is Decision.UNCOMPUTE


def test_policy_free_lazy_defers_below_top():
    assert policy_free(PolicyKind.LAZY, 1, None) is Decision.TRANSFER
    assert policy_free(PolicyKind.LAZY, 0, None) is Decision.UNCOMPUTE


def test_policy_free_square_delegates():
    cheap = _inputs(n_active=1, n_anc=5, g_uncomp=1, g_p=100, level=1)
    assert policy_free(PolicyKind.SQUARE, 1, cheap) is Decision.UNCOMPUTE
    dear = _inputs(n_active=8, n_anc=2, g_uncomp=20, g_p=50, s=2.0, level=1)
    assert policy_free(PolicyKind.SQUARE, 1, dear) is Decision.TRANSFER


# --- communication estimator ----------------------------------------------------------


def test_estimator_default():
    assert CommEstimator().value() == 1.0


def test_estimator_running_mean():
    est = CommEstimator()
    est.add(2)
    est.add(4)
    assert est.value() == 3.0


def test_estimator_clamped_to_one():
    est = CommEstimator()
    for _ in range(10):
        est.add(0)
    assert est.value() == 1.0


# --- allocation scoring -----------------------------------------------------------------


def test_choose_sites_prefers_adjacent_heap_qubit():
    m = lattice(6, 6)
    state = AllocationState(36)
    anchor = state.new_qubit((2, 2), 0)  # the interaction partner
    helper = state.new_qubit((2, 3), 0)
    state.heap_push([helper], 0)  # idle, adjacent to the anchor
    choices = choose_sites(1, [(2, 2)], state, m, now=0, weights=LaaWeights())
    assert choices is not None and choices[0].entry is not None
    assert choices[0].entry.qubit == helper


def test_choose_sites_empty_heap_takes_nearest_fresh_cell():
    m = lattice(5, 5)
    state = AllocationState(25)
    state.new_qubit((2, 2), 0)
    choices = choose_sites(1, [(2, 2)], state, m, now=0, weights=LaaWeights())
    assert choices is not None and choices[0].entry is None
    assert choices[0].cell in {(1, 2), (2, 1), (2, 3), (3, 2)}


def test_choose_sites_busy_heap_loses_to_equal_distance_fresh():
    # score(heap)  = dist + alpha*(busy-now) = 1 + 0.5*40 = 21
    # score(fresh) = dist + beta*bbox_growth = 1 + 1*1    = 2
    m = lattice(6, 6)
    state = AllocationState(36)
    state.new_qubit((2, 2), 0)
    parked = state.new_qubit((2, 3), 0)
    state.heap_push([parked], 40)  # just pushed by a long uncompute tail
    choices = choose_sites(1, [(2, 2)], state, m, now=0, weights=LaaWeights())
    assert choices is not None
    assert choices[0].entry is None
    assert choices[0].cell is not None


def test_choose_sites_pending_when_capacity_exhausted():
    m = lattice(2, 2)
    state = AllocationState(2)
    state.new_qubit((0, 0), 0)
    state.new_qubit((0, 1), 0)
    assert choose_sites(1, [], state, m, now=0, weights=LaaWeights()) is None


def test_choose_sites_deterministic():
    m = lattice(6, 6)

    def run():
        state = AllocationState(36)
        state.new_qubit((1, 1), 0)
        h = state.new_qubit((4, 4), 0)
        state.heap_push([h], 7)
        picks = choose_sites(3, [(1, 1)], state, m, now=0, weights=LaaWeights())
        return [(c.entry.qubit if c.entry else None, c.cell) for c in picks]

    assert run() == run()


def test_naive_sites_pops_heap_before_fresh():
    m = lattice(4, 4)
    state = AllocationState(16)
    a = state.new_qubit((0, 0), 0)
    b = state.new_qubit((0, 1), 0)
    state.heap_push([a], 1)
    state.heap_push([b], 2)
    choices = naive_sites(3, state, m)
    assert [c.entry.qubit if c.entry else None for c in choices] == [b, a, None]
    assert choices[2].cell == (0, 2)  # first free cell in row-major order


def test_naive_sites_fully_connected_never_needs_cells():
    m = fully_connected(4)
    state = AllocationState(4)
    choices = naive_sites(4, state, m)
    assert len(choices) == 4
    assert naive_sites(5, state, m) is None
