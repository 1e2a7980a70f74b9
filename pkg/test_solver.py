"""
Tests for monitored MINRES: rotations, the recurrence, stopping rules and
the stored history.

Run with: pytest test_solver.py
"""

from dataclasses import replace
import tracemalloc

import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose, assert_array_equal

from blockminres.core import (
    BlockDiagPreconditioner,
    BlockPartition,
    BlockSolve,
    DegenerateRotationError,
    IndefinitePreconditionerError,
    InputError,
    SaddleOperator,
    SparseLUBlockSolve,
)
from blockminres.problems import gen_least_norm, gen_least_squares, gen_stokes_mac
from blockminres.solver import (
    SolverOptions,
    TerminationReason,
    finalize_history,
    givens,
    init_state,
    solve,
    step,
    update_block_fractions,
)
from blockminres.verify import explicit_block_norms


def _two_by_two():
    K = SaddleOperator.from_matrix(np.array([[2.0, 1.0], [1.0, 0.0]]))
    part = BlockPartition([("u", [0]), ("p", [1])])
    return K, part


def _suite():
    for seed in (42, 1):
        for gen in (gen_least_norm, gen_least_squares):
            problem = gen(100, 30, seed)
            for name in ("P1", "P2"):
                yield problem, problem.preconditioner(name)
    stokes = gen_stokes_mac(16, 8)
    yield stokes, stokes.preconditioner("P2")


# Givens rotations and fraction updates

def test_givens_three_four_five():
    c, s, r = givens(3.0, 4.0)
    assert (c, s, r) == (pytest.approx(0.6), pytest.approx(0.8), pytest.approx(5.0))
    assert c * c + s * s == pytest.approx(1.0, abs=1e-15)


def test_givens_trivial_rotations():
    assert givens(2.5, 0.0) == (1.0, 0.0, 2.5)
    assert givens(0.0, 1.5) == (0.0, 1.0, 1.5)


def test_givens_zero_vector():
    with pytest.raises(DegenerateRotationError):
        givens(0.0, 0.0)


def test_update_block_fractions_limits():
    assert update_block_fractions(0.3, 0.1, 0.7, c=0.0, s=1.0) == pytest.approx(0.3)
    assert update_block_fractions(0.3, 0.1, 0.7, c=1.0, s=0.0) == pytest.approx(0.7)
    assert update_block_fractions(1.0, 0.0, 1.0, c=0.6, s=0.8) == pytest.approx(1.0)


def test_update_block_fractions_clamps_and_vectorizes():
    assert update_block_fractions(1.0, -1e-3, 1.0, c=0.6, s=0.8) == 1.0
    out = update_block_fractions(np.array([0.2, 0.8]), np.array([0.0, 0.0]), np.array([0.5, 0.5]), c=1.0, s=0.0)
    assert_allclose(out, [0.5, 0.5])


# Initialization

def test_init_state_three_four_five():
    K = SaddleOperator.from_matrix(sp.identity(2))
    part = BlockPartition([("u", [0]), ("p", [1])])
    state = init_state(K, None, part, np.array([3.0, 4.0]))
    assert state.gamma1 == pytest.approx(5.0)
    assert_allclose(state.v, [0.6, 0.8])
    assert_allclose(state.psi, [0.36, 0.64])
    assert_allclose(state.eta_blocks, [3.0, 4.0])
    assert state.c == state.c_prev == 1.0
    assert state.s == state.s_prev == 0.0
    assert len(state.rows) == 1


def test_init_state_exact_initial_guess():
    K, part = _two_by_two()
    state = init_state(K, None, part, np.array([1.0, 0.0]), x0=np.array([0.0, 1.0]))
    assert state.terminated
    assert state.reason == TerminationReason.CONVERGED
    assert state.rows[0].eta == 0.0
    assert state.rows[0].eta_blocks == (0.0, 0.0)


def test_init_state_eta0_matches_oracle():
    problem = gen_least_norm(100, 30, 42)
    P = problem.preconditioner("P2")
    state = init_state(problem.operator, P, problem.partition, problem.rhs)
    total, blocks = explicit_block_norms(problem.operator, P, problem.partition, problem.rhs, np.zeros(problem.n))
    assert state.gamma1 == pytest.approx(total, rel=1e-14)
    assert_allclose(state.eta_blocks, blocks, rtol=1e-12)


class _NegativeSolve(BlockSolve):
    kind = "negative"

    def solve(self, r):
        return -r

    def matrix(self):
        return -sp.identity(self.size, format="csr")


def test_init_state_indefinite_preconditioner():
    K, part = _two_by_two()
    pre = BlockDiagPreconditioner([_NegativeSolve("u", 1), _NegativeSolve("p", 1)])
    with pytest.raises(IndefinitePreconditionerError) as err:
        init_state(K, pre, part, np.array([1.0, 0.0]))
    assert err.value.block == "u"


def _masked_indefinite_setup():
    """Sparse-LU velocity block with eigenvalue -0.94 next to a heavy pressure block."""
    part = BlockPartition.from_sizes([("u", 12), ("p", 3)])
    T = sp.diags([1.0, 1.0, 1.0], [-1, 0, 1], shape=(12, 12)).tocsr()
    pre = BlockDiagPreconditioner.from_matrices(part, [T, 1e-4 * sp.identity(3, format="csr")], dense_limit=4)
    assert isinstance(pre.solves[0], SparseLUBlockSolve)
    evals, evecs = np.linalg.eigh(T.toarray())
    assert evals[0] < -0.9
    return part, pre, evecs[:, 0]


def test_negative_block_masked_by_positive_total_at_start():
    part, pre, e = _masked_indefinite_setup()
    K = SaddleOperator.from_matrix(sp.identity(15))
    f = np.concatenate([e, np.ones(3)])
    assert np.dot(pre.apply_inverse(part, f), f) > 0
    with pytest.raises(IndefinitePreconditionerError) as err:
        init_state(K, pre, part, f)
    assert err.value.block == "u"


def test_negative_block_masked_by_positive_total_mid_run():
    part, pre, e = _masked_indefinite_setup()
    B = np.outer([1.0, 0.0, 0.0], e)
    K = SaddleOperator.from_blocks(sp.csr_matrix((12, 12)), B, np.diag([1.0, 2.0, 3.0]))
    f = np.concatenate([np.zeros(12), np.ones(3)])
    state = init_state(K, pre, part, f)
    assert state.psi[0] == 0.0

    with pytest.raises(IndefinitePreconditionerError) as err:
        step(state)
    assert err.value.block == "u"
    assert all(min(row.psi) >= 0.0 for row in state.rows)

    rows = []
    with pytest.raises(IndefinitePreconditionerError):
        solve(K, pre, part, f, callback=rows.append)
    assert [row.j for row in rows] == [0]


def test_init_state_dimension_mismatch():
    K, part = _two_by_two()
    with pytest.raises(InputError):
        init_state(K, None, part, np.ones(3))
    with pytest.raises(InputError):
        init_state(K, None, BlockPartition.from_sizes([("u", 2), ("p", 1)]), np.ones(3))


# Single steps and small systems

def test_identity_system_converges_in_one_step():
    rng = np.random.default_rng(4)
    f = rng.standard_normal(5)
    K = SaddleOperator.from_matrix(sp.identity(5))
    part = BlockPartition.from_sizes([("u", 3), ("p", 2)])
    x, history = solve(K, None, part, f)
    assert history.iterations == 1
    assert history.reason == TerminationReason.CONVERGED
    assert history.final_eta == 0.0
    assert_allclose(x, f, rtol=1e-14)


def test_two_by_two_system():
    K, part = _two_by_two()
    x, history = solve(K, None, part, np.array([1.0, 0.0]))
    assert history.iterations <= 2
    assert history.converged
    assert history.final_eta <= 1e-12
    assert_allclose(x, np.linalg.solve([[2.0, 1.0], [1.0, 0.0]], [1.0, 0.0]), atol=1e-12)
    assert_allclose(x, [0.0, 1.0], atol=1e-12)


def test_zero_rhs():
    K, part = _two_by_two()
    x, history = solve(K, None, part, np.zeros(2))
    assert_array_equal(x, [0.0, 0.0])
    assert history.iterations == 0
    assert history.converged


def test_step_on_terminated_state():
    K, part = _two_by_two()
    state = init_state(K, None, part, np.zeros(2))
    with pytest.raises(InputError):
        step(state)


def test_finalize_requires_termination():
    K, part = _two_by_two()
    state = init_state(K, None, part, np.array([1.0, 0.0]))
    with pytest.raises(InputError):
        finalize_history(state)


def test_lanczos_vectors_stay_orthogonal():
    problem = gen_least_norm(60, 20, 3)
    state = init_state(problem.operator, problem.preconditioner("P2"), problem.partition, problem.rhs)
    older = None
    for _ in range(20):
        if state.terminated:
            break
        step(state)
        if state.terminated:
            break
        assert abs(np.dot(state.z, state.v_prev)) <= 1e-8
        if older is not None:
            assert abs(np.dot(state.z, older)) <= 1e-8
        older = state.v_prev


# Invariants over the random suite

@pytest.mark.parametrize("case", range(9))
def test_history_invariants(case):
    problem, P = list(_suite())[case]
    _, history = solve(problem.operator, P, problem.partition, problem.rhs)
    assert history.converged
    assert len(history.rows) == history.iterations + 1

    etas = history.etas()
    assert np.all(etas[1:] <= etas[:-1] * (1 + 1e-12))

    for row in history.rows:
        assert sum(row.psi) == pytest.approx(1.0, abs=1e-10)
        assert sum(row.mu) == pytest.approx(1.0, abs=1e-10)
        assert np.sqrt(sum(e * e for e in row.eta_blocks)) == pytest.approx(row.eta, rel=1e-10, abs=1e-300)
    assert history.rows[-1].eta_rel <= 1e-6


def test_monitoring_is_transparent():
    problem = gen_least_squares(100, 30, 42)
    P = problem.preconditioner("P2")
    options = SolverOptions(store_residual_history=True)
    x_on, h_on = solve(problem.operator, P, problem.partition, problem.rhs, options=options)
    x_off, h_off = solve(problem.operator, P, problem.partition, problem.rhs,
                         options=replace(options, monitor=False))

    assert_array_equal(h_on.etas(), h_off.etas())
    assert_array_equal(x_on, x_off)
    for a, b in zip(h_on.rows[1:], h_off.rows[1:]):
        assert (a.delta, a.gamma, a.c, a.s) == (b.delta, b.gamma, b.c, b.s)
    for xa, xb in zip(h_on.iterates, h_off.iterates):
        assert_array_equal(xa, xb)
    assert h_off.rows[-1].eta_blocks == ()
    assert not h_off.monitored


def test_monitoring_costs_one_vector():
    problem = gen_least_norm(100, 30, 42)
    P = problem.preconditioner("P1")
    states = {}
    for monitor in (True, False):
        state = init_state(problem.operator, P, problem.partition, problem.rhs,
                           options=SolverOptions(monitor=monitor))
        for _ in range(5):
            step(state)
        states[monitor] = state.persistent_vectors()

    assert len(states[False]) == 6
    assert len(states[True]) == 7
    assert set(states[True]) - set(states[False]) == {"m"}
    for vectors in states.values():
        arrays = list(vectors.values())
        assert all(a.shape == (problem.n,) for a in arrays)
        for i in range(len(arrays)):
            for j in range(i + 1, len(arrays)):
                assert not np.shares_memory(arrays[i], arrays[j])
    extra = sum(a.nbytes for a in states[True].values()) - sum(a.nbytes for a in states[False].values())
    assert extra == problem.n * 8


def _large_retained_allocations(monitor, n=4000, steps=5):
    K = SaddleOperator.from_matrix(sp.diags(np.linspace(1.0, 2.0, n), format="csr"))
    part = BlockPartition.from_sizes([("u", n - 1000), ("p", 1000)])
    f = np.ones(n)
    tracemalloc.start()
    try:
        state = init_state(K, None, part, f, options=SolverOptions(monitor=monitor))
        for _ in range(steps):
            step(state)
        snapshot = tracemalloc.take_snapshot()
    finally:
        tracemalloc.stop()
    assert not state.terminated
    return sorted(trace.size for trace in snapshot.traces if trace.size >= n * 8)


def test_monitoring_retains_one_extra_allocation():
    n = 4000
    on = _large_retained_allocations(True, n)
    off = _large_retained_allocations(False, n)
    assert len(on) == len(off) + 1
    assert sum(on) - sum(off) == n * 8


def test_single_block_fraction_stays_one():
    problem = gen_least_norm(40, 10, 0)
    part = BlockPartition.from_sizes([("all", problem.n)])
    P2 = problem.preconditioner("P2").assembled(problem.partition)
    pre = BlockDiagPreconditioner.from_matrices(part, [P2])
    _, history = solve(problem.operator, pre, part, problem.rhs)
    assert history.converged
    assert_allclose(history.fractions(), 1.0, atol=1e-10)


# Stopping rules

def test_max_iter_history():
    problem = gen_least_norm(100, 30, 42)
    _, history = solve(problem.operator, problem.preconditioner("P1"), problem.partition, problem.rhs,
                       options=SolverOptions(max_iter=5))
    assert history.reason == TerminationReason.MAX_ITER
    assert len(history.rows) == 6
    assert not history.converged


def test_per_block_stopping_matches_oracle():
    problem = gen_least_norm(100, 30, 42)
    K, P, part, f = problem.operator, problem.preconditioner("P1"), problem.partition, problem.rhs
    _, full = solve(K, P, part, f, options=SolverOptions(rel_tol=1e-10))
    eps = [1e-3 * full.eta0, 1e-3 * full.eta0]

    blocks = full.eta_blocks()
    expected = next(j for j in range(len(blocks)) if np.all(blocks[j] <= eps))

    x, history = solve(K, P, part, f, options=SolverOptions(per_block_tol=eps, store_residual_history=True))
    assert history.reason == TerminationReason.PER_BLOCK_CONVERGED
    assert history.iterations == expected

    _, explicit = explicit_block_norms(K, P, part, f, x)
    assert np.all(explicit <= np.array(eps) + 1e-8 * history.eta0)
    _, before = explicit_block_norms(K, P, part, f, history.iterates[-2])
    assert np.any(before > np.array(eps) - 1e-8 * history.eta0)


def test_total_criterion_checked_first():
    problem = gen_least_norm(50, 10, 2)
    options = SolverOptions(rel_tol=1e-3, per_block_tol=[0.0, 0.0])
    _, history = solve(problem.operator, problem.preconditioner("P2"), problem.partition, problem.rhs,
                       options=options)
    assert history.reason == TerminationReason.CONVERGED


def test_callback_sees_every_row():
    problem = gen_least_norm(50, 10, 2)
    seen = []
    _, history = solve(problem.operator, problem.preconditioner("P2"), problem.partition, problem.rhs,
                       callback=seen.append)
    assert seen == history.rows


# Options

def test_options_validation():
    with pytest.raises(InputError):
        SolverOptions(rel_tol=0.0)
    with pytest.raises(InputError):
        SolverOptions(max_iter=0)
    with pytest.raises(InputError):
        SolverOptions(per_block_tol=[1e-3], monitor=False)


def test_per_block_tol_length_checked():
    K, part = _two_by_two()
    with pytest.raises(InputError):
        solve(K, None, part, np.array([1.0, 0.0]), options=SolverOptions(per_block_tol=[1e-3]))


def test_options_from_config():
    config = {"solver": {"rel_tol": 1e-8, "max_iter": 50, "breakdown_tol": 1e-15, "monitor": True}}
    options = SolverOptions.from_config(config, max_iter=10, per_block_tol=None)
    assert options.rel_tol == 1e-8
    assert options.max_iter == 10
    assert options.per_block_tol is None


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
