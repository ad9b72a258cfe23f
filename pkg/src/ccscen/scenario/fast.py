"""Two-stage FAST procedure: solve on a small batch, then pull back toward x_bar."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from .program import ScenarioProgram
from .solver import Solution, solve

__all__ = ["max_feasible_step", "fast_solve"]


def max_feasible_step(program: ScenarioProgram, x_bar, x1, tol: float = 1e-10) -> float:
    """Largest t in [0, 1] with x_bar + t (x1 - x_bar) satisfying every constraint.

    Linear rows and bounds use the exact ratio test; quadratic forms are
    bisected (their feasible t-set is an interval containing 0).
    """
    x_bar = np.asarray(x_bar, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    if program.max_violation(x_bar) > 0:
        raise DomainError("x_bar violates a stage-two constraint")
    direction = x1 - x_bar
    t_star = 1.0
    if program.n_linear:
        slack = program.h - program.G @ x_bar
        rate = program.G @ direction
        mask = rate > slack  # violated at t = 1
        if np.any(mask):
            t_star = min(t_star, float(np.min(slack[mask] / rate[mask])))
    nn = program.nonneg
    if np.any(nn):
        xb, db = x_bar[nn], direction[nn]
        mask = xb + db < 0
        if np.any(mask):
            t_star = min(t_star, float(np.min(xb[mask] / -db[mask])))
    if program.n_quadratic:
        Q, g, r = program.Q, program.qg, program.qh

        def f(t):
            x = x_bar[None, :] + t[:, None] * direction[None, :]
            return np.einsum("ki,kij,kj->k", x, Q, x) + np.einsum("ki,ki->k", g, x) - r

        bad = f(np.ones(program.n_quadratic)) > 0
        if np.any(bad):
            Qb, gb, rb = Q[bad], g[bad], r[bad]
            lo = np.zeros(Qb.shape[0])
            hi = np.ones(Qb.shape[0])

            def fb(t):
                x = x_bar[None, :] + t[:, None] * direction[None, :]
                return np.einsum("ki,kij,kj->k", x, Qb, x) + np.einsum("ki,ki->k", gb, x) - rb

            while np.max(hi - lo) > tol:
                mid = 0.5 * (lo + hi)
                ok = fb(mid) <= 0
                lo = np.where(ok, mid, lo)
                hi = np.where(ok, hi, mid)
            t_star = min(t_star, float(lo.min()))
    return max(0.0, t_star)


def fast_solve(builder, n1_samples, n2_samples, x_bar, **solve_kw) -> Solution:
    """Stage one solves ``builder(n1_samples)``; stage two line-searches toward ``x_bar``.

    ``builder`` maps a sample batch to a :class:`ScenarioProgram`.
    """
    stage1 = solve(builder(n1_samples), **solve_kw)
    if not stage1.ok:
        return stage1
    prog2 = builder(n2_samples)
    t_star = max_feasible_step(prog2, x_bar, stage1.x)
    x = np.asarray(x_bar, float) + t_star * (stage1.x - np.asarray(x_bar, float))
    info = dict(stage1.info)
    info.update(t_star=t_star, stage1_objective=stage1.objective_value)
    return Solution(x, prog2.objective(x), stage1.status, stage1.kkt_residual, stage1.iterations, info)
