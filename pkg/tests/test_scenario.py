import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.optimize import linprog

from ccscen.errors import DomainError
from ccscen.scenario import (
    ScenarioProgram,
    SolveStatus,
    build_joint_linear,
    build_quadratic_constraint,
    build_quadratic_objective,
    build_single_linear,
    dump_program,
    fast_solve,
    load_program,
    max_feasible_step,
    psd_clip,
    solve,
)


def _vertex_optimum(c, G, h):
    """Min c'x over {Gx <= h, x >= 0} by enumerating basic solutions."""
    d = c.size
    A = np.vstack([G, -np.eye(d)])
    b = np.concatenate([h, np.zeros(d)])
    best = np.inf
    for rows in itertools.combinations(range(A.shape[0]), d):
        M = A[list(rows)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, b[list(rows)])
        if np.all(A @ x <= b + 1e-9):
            best = min(best, float(c @ x))
    return best


def _random_lp(rng):
    d = int(rng.integers(2, 4))
    k = int(rng.integers(d, 7))
    G = rng.uniform(0.1, 2.0, (k, d)) * rng.choice([1, 1, 1, -1], size=(k, d))
    G = np.vstack([G, np.ones((1, d))])  # keeps the region bounded
    h = rng.uniform(0.5, 3.0, k + 1)
    c = rng.standard_normal(d)
    return c, G, h


def test_solver_matches_vertex_enumeration_on_random_lps():
    rng = np.random.default_rng(20240)
    worst = 0.0
    for _ in range(200):
        c, G, h = _random_lp(rng)
        sol = solve(ScenarioProgram(c, G, h, nonneg=np.ones(c.size, bool)))
        assert sol.status is SolveStatus.OPTIMAL
        ref = _vertex_optimum(c, G, h)
        worst = max(worst, abs(sol.objective_value - ref))
    assert worst < 1e-6


def test_single_linear_closed_form():
    # no noise: min -sum x s.t. 5 sum x <= 5 gives -1
    prob = build_single_linear(np.full(4, 5.0), 5.0, -np.ones(4), np.zeros((3, 4)))
    sol = solve(prob)
    assert sol.ok
    assert_allclose(sol.objective_value, -1.0, atol=1e-7)
    # tie-break spreads the mass evenly
    assert_allclose(sol.x, 0.25, atol=1e-4)
    assert sol.kkt_residual <= 1e-6


def test_quadratic_objective_against_scipy():
    rng = np.random.default_rng(3)
    d, m = 3, 2
    A = rng.uniform(0.5, 1.5, (m, d))
    H = np.diag([1.0, 2.0, 3.0])
    c = -np.array([3.0, 2.0, 4.0])
    mats = 0.1 * rng.standard_normal((5, m, d))
    sol = solve(build_quadratic_objective(H, A, np.ones(m), c, mats))
    assert sol.ok
    from scipy.optimize import minimize
    G = (A[None] + mats).reshape(-1, d)
    ref = minimize(lambda x: 0.5 * x @ H @ x + c @ x, np.zeros(d), jac=lambda x: H @ x + c,
                   constraints=[{"type": "ineq", "fun": lambda x: 1 - G @ x, "jac": lambda x: -G}],
                   bounds=[(0, None)] * d, method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
    assert_allclose(sol.objective_value, ref.fun, atol=1e-6)


def test_quadratic_constraint_ball():
    # x'x <= 1, x >= 0: min -sum x gives -sqrt(d)
    d = 4
    prob = build_quadratic_constraint(np.zeros(d), 1.0, -np.ones(d), np.eye(d)[None])
    sol = solve(prob)
    assert sol.ok
    assert_allclose(sol.objective_value, -2.0, atol=1e-6)


def test_infeasible_and_unbounded():
    infeas = ScenarioProgram(np.ones(2), np.array([[1.0, 1.0]]), np.array([-1.0]), nonneg=np.ones(2, bool))
    assert solve(infeas).status is SolveStatus.INFEASIBLE
    unb = ScenarioProgram(-np.ones(2), np.array([[1.0, -1.0]]), np.array([1.0]), nonneg=np.ones(2, bool))
    assert solve(unb).status is SolveStatus.UNBOUNDED


def test_phase_one_start():
    # x = tau * 1 is never strictly feasible here: x1 - x2 >= 1 is required
    p = ScenarioProgram(np.array([1.0, 1.0]), np.array([[-1.0, 1.0], [1.0, 1.0]]), np.array([-1.0, 4.0]),
                        nonneg=np.ones(2, bool))
    sol = solve(p)
    assert sol.ok and sol.info["phase_one"]
    assert_allclose(sol.objective_value, 1.0, atol=1e-6)
    ref = linprog([1, 1], A_ub=[[-1, 1], [1, 1]], b_ub=[-1, 4])
    assert_allclose(sol.objective_value, ref.fun, atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_solution_feasible_and_not_worse_than_vertices(seed):
    c, G, h = _random_lp(np.random.default_rng(seed))
    sol = solve(ScenarioProgram(c, G, h, nonneg=np.ones(c.size, bool)))
    assert np.all(G @ sol.x <= h + 1e-7) and np.all(sol.x >= -1e-7)
    assert sol.objective_value <= _vertex_optimum(c, G, h) + 1e-6


def test_max_feasible_step_linear_and_quadratic():
    p = build_single_linear(np.ones(2), 1.0, -np.ones(2), np.zeros((1, 2)))
    assert_allclose(max_feasible_step(p, np.zeros(2), np.array([1.0, 1.0])), 0.5)
    assert max_feasible_step(p, np.zeros(2), np.array([0.2, 0.2])) == 1.0
    q = build_quadratic_constraint(np.zeros(2), 1.0, -np.ones(2), np.eye(2)[None])
    assert_allclose(max_feasible_step(q, np.zeros(2), np.array([2.0, 0.0])), 0.5, atol=1e-9)
    with pytest.raises(DomainError):
        max_feasible_step(p, np.array([2.0, 2.0]), np.zeros(2))


def test_fast_solve_pulls_back_to_feasible():
    rng = np.random.default_rng(0)
    a, c = np.full(3, 5.0), -np.ones(3)
    stage1 = rng.standard_normal((60, 3))
    stage2 = rng.standard_normal((2000, 3))
    builder = lambda rows: build_single_linear(a, 5.0, c, rows)
    sol = fast_solve(builder, stage1, stage2, np.zeros(3))
    assert sol.ok
    assert 0.0 <= sol.info["t_star"] <= 1.0
    assert np.all((a + stage2) @ sol.x <= 5.0 + 1e-9)
    assert sol.objective_value >= sol.info["stage1_objective"] - 1e-12


def test_psd_clip():
    m = np.array([[[1.0, 0.0], [0.0, -1e-14]]])
    out = psd_clip(m)
    assert np.linalg.eigvalsh(out[0]).min() >= 0
    with pytest.raises(DomainError):
        psd_clip(np.array([[[1.0, 0.0], [0.0, -0.5]]]))


def test_program_validation():
    with pytest.raises(DomainError):
        ScenarioProgram(np.ones(2), np.ones((1, 2)), np.ones(2))
    with pytest.raises(DomainError):
        build_single_linear(np.ones(2), 1.0, np.ones(3), np.zeros((1, 2)))
    with pytest.raises(DomainError):
        build_joint_linear(np.ones((2, 2)), np.ones(3), np.ones(2), np.zeros((1, 2, 2)))


def test_dump_load_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    p = build_quadratic_objective(np.eye(2), rng.random((2, 2)), np.ones(2), -np.ones(2), rng.random((3, 2, 2)))
    dump_program(p, tmp_path / "p.txt")
    back = load_program(tmp_path / "p.txt")
    assert_allclose(back.G, p.G)
    assert_allclose(back.H, p.H)
    assert_allclose(solve(back).objective_value, solve(p).objective_value, atol=1e-12)
    q = build_quadratic_constraint(np.ones(2), 3.0, -np.ones(2), np.eye(2)[None])
    dump_program(q, tmp_path / "q.txt")
    assert_allclose(load_program(tmp_path / "q.txt").Q, q.Q)
