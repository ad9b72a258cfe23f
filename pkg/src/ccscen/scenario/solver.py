"""Log-barrier interior-point method for :class:`ScenarioProgram`.

Phase II follows the central path of t f0(x) - sum log(-f_i(x)) with damped
Newton steps, multiplying t by ``mu`` after each centering. Phase I (only when
no strictly feasible start is at hand) minimizes a common slack s subject to
f_i(x) <= s.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .program import ScenarioProgram

__all__ = ["SolveStatus", "Solution", "solve"]

TIE_BREAK = 1e-9
_UNBOUNDED_X = 1e8
_UNBOUNDED_F = -1e12


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    TOLERANCE_NOT_MET = "tolerance-not-met"


@dataclass
class Solution:
    x: np.ndarray
    objective_value: float
    status: SolveStatus
    kkt_residual: float
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


class _Barrier:
    """Barrier oracle with constraint rows stacked for vectorized accumulation."""

    def __init__(self, program: ScenarioProgram, reg: float):
        self.p = program
        self.reg = reg
        self.bidx = np.flatnonzero(program.nonneg)
        self.m = program.n_constraints

    def f0(self, x):
        p = self.p
        val = float(p.c @ x) + self.reg * float(x @ x)
        if p.H is not None:
            val += 0.5 * float(x @ p.H @ x)
        return val

    def slacks(self, x):
        p = self.p
        s_lin = p.h - p.G @ x
        qx = np.einsum("kij,j->ki", p.Q, x)
        s_q = p.qh - (qx @ x + p.qg @ x)
        return s_lin, s_q, qx, x[self.bidx]

    @staticmethod
    def _positive(s_lin, s_q, s_b):
        return (s_lin.size == 0 or s_lin.min() > 0) and (s_q.size == 0 or s_q.min() > 0) \
            and (s_b.size == 0 or s_b.min() > 0)

    def value(self, x, t):
        s_lin, s_q, _, s_b = self.slacks(x)
        if not self._positive(s_lin, s_q, s_b):
            return math.inf
        return t * self.f0(x) - np.log(s_lin).sum() - np.log(s_q).sum() - np.log(s_b).sum()

    def derivatives(self, x, t):
        p = self.p
        s_lin, s_q, qx, s_b = self.slacks(x)
        d = x.size
        grad = t * (p.c + 2.0 * self.reg * x)
        hess = np.eye(d) * (2.0 * t * self.reg)
        if p.H is not None:
            grad += t * (p.H @ x)
            hess += t * p.H
        if s_lin.size:
            inv = 1.0 / s_lin
            grad += p.G.T @ inv
            hess += (p.G * (inv * inv)[:, None]).T @ p.G
        if s_q.size:
            inv = 1.0 / s_q
            a = 2.0 * qx + p.qg
            grad += a.T @ inv
            hess += (a * (inv * inv)[:, None]).T @ a + 2.0 * np.einsum("k,kij->ij", inv, p.Q)
        if s_b.size:
            inv = 1.0 / s_b
            grad[self.bidx] -= inv
            hess[self.bidx, self.bidx] += inv * inv
        return grad, hess

    def max_step(self, x, dx):
        """Largest step keeping the linear rows and bounds strictly feasible."""
        p = self.p
        limit = math.inf
        if p.n_linear:
            s = p.h - p.G @ x
            rate = p.G @ dx
            mask = rate > 0
            if np.any(mask):
                limit = min(limit, float(np.min(s[mask] / rate[mask])))
        if self.bidx.size:
            xb, db = x[self.bidx], dx[self.bidx]
            mask = db < 0
            if np.any(mask):
                limit = min(limit, float(np.min(xb[mask] / -db[mask])))
        return limit


def _newton_direction(grad, hess):
    try:
        cf = linalg.cho_factor(hess, check_finite=False)
        return -linalg.cho_solve(cf, grad, check_finite=False)
    except linalg.LinAlgError:
        return -np.linalg.lstsq(hess, grad, rcond=None)[0]


def _center(bar, x, t, max_newton, stop=None):
    """Damped Newton centering. Returns (x, iterations, converged, stopped_early)."""
    for it in range(1, max_newton + 1):
        grad, hess = bar.derivatives(x, t)
        dx = _newton_direction(grad, hess)
        dec = -float(grad @ dx)
        if dec < 0 or not np.isfinite(dec):
            return x, it, False, False
        if 0.5 * dec <= 1e-10:
            return x, it, True, False
        step = min(1.0, 0.99 * bar.max_step(x, dx))
        phi = bar.value(x, t)
        slope = float(grad @ dx)
        for _ in range(80):
            trial = x + step * dx
            val = bar.value(trial, t)
            if val <= phi + 0.25 * step * slope:
                break
            step *= 0.5
        else:
            return x, it, 0.5 * dec <= 1e-6, False
        x = trial
        if stop is not None and stop(x):
            return x, it, True, True
        if np.max(np.abs(x)) > _UNBOUNDED_X or bar.f0(x) < _UNBOUNDED_F:
            return x, it, False, True
    return x, max_newton, False, False


def _barrier_method(bar, x0, gap_tol, mu, max_newton, max_outer, stop=None):
    x = x0.copy()
    t = 1.0
    total = 0
    converged = True
    m = max(bar.m, 1)
    for _ in range(max_outer):
        x, its, ok, early = _center(bar, x, t, max_newton, stop)
        total += its
        converged = ok
        if early:
            return x, t, total, ok, True
        if m / t <= gap_tol * m:
            break
        t *= mu
    return x, t, total, converged, False


def _polish(bar, x, t, steps=6):
    """Extra full Newton steps at the final t; shrinks the stationarity residual."""
    grad, hess = bar.derivatives(x, t)
    best = float(np.max(np.abs(grad)))
    for _ in range(steps):
        trial = x + _newton_direction(grad, hess)
        if not math.isfinite(bar.value(trial, t)):
            break
        g2, h2 = bar.derivatives(trial, t)
        r2 = float(np.max(np.abs(g2)))
        if not r2 < best:
            break
        x, grad, hess, best = trial, g2, h2, r2
    return x, grad


def _strictly_feasible(p: ScenarioProgram, x):
    vals = p.constraint_values(x)
    return vals.size == 0 or vals.max() < 0


def _warm_start(p: ScenarioProgram):
    one = np.ones(p.dim)
    tau = 1.0
    for _ in range(60):
        if _strictly_feasible(p, tau * one):
            return tau * one
        tau *= 0.5
    return None


def _phase_one(p: ScenarioProgram, gap_tol, mu, max_newton, max_outer):
    """Find a strictly feasible point by minimizing a common slack s."""
    d = p.dim
    x_start = np.zeros(d)
    vals = p.constraint_values(x_start)
    s0 = float(vals.max()) + 1.0
    eye = np.eye(d)[p.nonneg]
    G_aug = np.vstack([
        np.hstack([p.G, -np.ones((p.n_linear, 1))]),
        np.hstack([-eye, -np.ones((eye.shape[0], 1))]),
        np.hstack([np.zeros((1, d)), -np.ones((1, 1))]),
    ])
    h_aug = np.concatenate([p.h, np.zeros(eye.shape[0]), [1.0]])
    k = p.n_quadratic
    Q_aug = np.zeros((k, d + 1, d + 1))
    Q_aug[:, :d, :d] = p.Q
    qg_aug = np.hstack([p.qg, -np.ones((k, 1))])
    c_aug = np.zeros(d + 1)
    c_aug[-1] = 1.0
    aux = ScenarioProgram(c_aug, G_aug, h_aug, Q=Q_aug, qg=qg_aug, qh=p.qh)
    bar = _Barrier(aux, TIE_BREAK)
    y0 = np.concatenate([x_start, [s0]])

    def stop(y):
        return y[-1] < 0 and _strictly_feasible(p, y[:d])

    y, _, its, _, early = _barrier_method(bar, y0, gap_tol, mu, max_newton, max_outer, stop)
    if _strictly_feasible(p, y[:d]):
        return y[:d], its
    return None, its


def solve(program: ScenarioProgram, x0=None, *, gap_tol: float = 1e-8, mu: float = 10.0,
          max_newton: int = 200, max_outer: int = 60) -> Solution:
    """Solve a scenario program by the log-barrier method.

    Linear objectives get a 1e-9 |x|^2 tie-break so that the optimum is unique.
    Stops once the surrogate gap m / t is at most ``gap_tol * m``.
    """
    p = program
    reg = TIE_BREAK if p.H is None else 0.0
    info = {"phase_one": False}
    its = 0
    if x0 is not None and _strictly_feasible(p, np.asarray(x0, float)):
        start = np.asarray(x0, float).copy()
    else:
        start = _warm_start(p)
    if start is None:
        info["phase_one"] = True
        start, its = _phase_one(p, gap_tol, mu, max_newton, max_outer)
        if start is None:
            return Solution(np.full(p.dim, np.nan), math.nan, SolveStatus.INFEASIBLE, math.inf, its, info)

    bar = _Barrier(p, reg)
    if bar.m == 0:
        hess = 2.0 * reg * np.eye(p.dim) + (p.H if p.H is not None else 0.0)
        x = np.linalg.lstsq(hess, -p.c, rcond=None)[0]
        status = SolveStatus.UNBOUNDED if np.max(np.abs(x), initial=0.0) > _UNBOUNDED_X else SolveStatus.OPTIMAL
        res = float(np.max(np.abs(hess @ x + p.c), initial=0.0))
        return Solution(x, p.objective(x), status, res, 1, info)

    x, t, n_it, converged, early = _barrier_method(bar, start, gap_tol, mu, max_newton, max_outer)
    its += n_it
    info["t"] = t
    if early or np.max(np.abs(x)) > _UNBOUNDED_X or bar.f0(x) < _UNBOUNDED_F:
        return Solution(x, p.objective(x), SolveStatus.UNBOUNDED, math.inf, its, info)
    x, grad = _polish(bar, x, t)
    kkt = max(float(np.max(np.abs(grad))) / t, 1.0 / t)
    feasible = p.max_violation(x) <= 1e-7
    status = SolveStatus.OPTIMAL if (kkt <= 1e-6 and feasible) else SolveStatus.TOLERANCE_NOT_MET
    info["centering_converged"] = converged
    return Solution(x, p.objective(x), status, kkt, its, info)
