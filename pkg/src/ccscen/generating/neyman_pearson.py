"""Worst-case Neyman-Pearson power for a scalar Gaussian location family.

For alternatives N(theta, 1), |theta| <= M, and a generating law P_0, the most
powerful level-delta region is a superlevel set of the likelihood ratio.
The worst case over theta is the bounding function M(P_0, U, delta).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize

from ..errors import ConvergenceError, DomainError
from ..numerics import std_normal_cdf, std_normal_quantile

__all__ = ["P0_CHOICES", "np_power", "np_worst_power"]

P0_CHOICES = ("stdnormal", "normal-var2", "two-point")
_SQRT2 = math.sqrt(2.0)


def _parse_p0(p0):
    key = str(p0).lower().replace("_", "-")
    aliases = {
        "stdnormal": "stdnormal",
        "std-normal": "stdnormal",
        "normal0var2": "normal-var2",
        "normal-var2": "normal-var2",
        "var2": "normal-var2",
        "two-point": "two-point",
        "symmetrictwopointmixture": "two-point",
        "mixture": "two-point",
    }
    try:
        return aliases[key]
    except KeyError:
        raise DomainError(f"unknown P0 {p0!r}; expected one of {P0_CHOICES}") from None


def _brentq(f, a, b):
    try:
        return optimize.brentq(f, a, b, xtol=1e-14, rtol=1e-14, maxiter=500)
    except (ValueError, RuntimeError) as exc:
        raise ConvergenceError(f"root finding failed: {exc}") from None


def _power_stdnormal(theta, delta):
    c1 = std_normal_quantile(1.0 - delta)
    return 1.0 - std_normal_cdf(c1 - abs(theta))


def _power_var2(theta, delta):
    # Region |y - 2 theta| <= c with P_0 = N(0, 2) mass delta.
    def mass(c):
        return std_normal_cdf((2 * theta + c) / _SQRT2) - std_normal_cdf((2 * theta - c) / _SQRT2) - delta

    hi = 1.0
    while mass(hi) < 0:
        hi *= 2.0
        if hi > 1e6:
            raise ConvergenceError("could not bracket the N(0,2) threshold")
    c = _brentq(mass, 0.0, hi)
    return std_normal_cdf(theta + c) - std_normal_cdf(theta - c)


def _mix_tail(y):
    """P_0(Y > y) for the half-half mixture of N(+1,1) and N(-1,1)."""
    return 0.5 * (std_normal_cdf(1.0 - y) + std_normal_cdf(-1.0 - y))


def _mix_mass(lo, hi):
    return _mix_tail(lo) - _mix_tail(hi)


def _power_two_point(theta, delta):
    # Log likelihood ratio h(y) = theta y - log(2 cosh y) is concave, so the
    # region is an interval (a half-line once |theta| >= 1).
    # P_0 is symmetric, so theta and -theta have mirrored regions and equal power.
    th = abs(theta)
    if th >= 1.0:
        y0 = _brentq(lambda y: _mix_tail(y) - delta, -50.0, 50.0)
        return 1.0 - std_normal_cdf(y0 - th)

    mode = math.atanh(th)

    def h(y):
        return th * y - float(np.logaddexp(y, -y))

    h_top = h(mode)

    def endpoints(level):
        lo_step = hi_step = 1.0
        while h(mode - lo_step) > level:
            lo_step *= 2.0
        while h(mode + hi_step) > level:
            hi_step *= 2.0
        lo = _brentq(lambda y: h(y) - level, mode - lo_step, mode)
        hi = _brentq(lambda y: h(y) - level, mode, mode + hi_step)
        return lo, hi

    def excess(gap):
        lo, hi = endpoints(h_top - gap)
        return _mix_mass(lo, hi) - delta

    g_hi = 1.0
    while excess(g_hi) < 0:
        g_hi *= 2.0
        if g_hi > 1e4:
            raise ConvergenceError("could not bracket the mixture threshold")
    gap = _brentq(excess, 1e-300, g_hi)
    lo, hi = endpoints(h_top - gap)
    return std_normal_cdf(hi - th) - std_normal_cdf(lo - th)


_POWER = {"stdnormal": _power_stdnormal, "normal-var2": _power_var2, "two-point": _power_two_point}


def np_power(p0, theta: float, delta: float) -> float:
    """Power under N(theta, 1) of the most powerful level-``delta`` test against ``p0``."""
    if not 0.0 < delta < 0.5:
        raise DomainError("delta must lie in (0, 1/2)")
    return float(_POWER[_parse_p0(p0)](float(theta), delta))


def np_worst_power(p0, theta_abs_max: float, delta: float, grid: int = 401) -> float:
    """Largest power over theta in [-theta_abs_max, theta_abs_max].

    Scans a symmetric grid, then refines around the best node with a bounded
    scalar search.
    """
    if not 0.0 < delta < 0.5:
        raise DomainError("delta must lie in (0, 1/2)")
    if not theta_abs_max > 0:
        raise DomainError("theta_abs_max must be positive")
    key = _parse_p0(p0)
    fn = _POWER[key]
    thetas = np.linspace(-theta_abs_max, theta_abs_max, grid)
    powers = np.array([fn(float(t), delta) for t in thetas])
    k = int(np.argmax(powers))
    best = float(powers[k])
    a, b = float(thetas[max(k - 1, 0)]), float(thetas[min(k + 1, grid - 1)])
    if 0 < k < grid - 1:
        res = optimize.minimize_scalar(
            lambda t: -fn(t, delta), bounds=(a, b), method="bounded", options={"xatol": 1e-10}
        )
        best = max(best, -float(res.fun))
    return best
