"""Special functions and one-dimensional quadrature.

Thin, validated wrappers over :mod:`scipy.special` and
:func:`scipy.integrate.quad`, plus log-space hypergeometric helpers
that stay finite where the plain functions overflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _integrate
from scipy import special as _sp

from .errors import ConvergenceError, DomainError

__all__ = [
    "QuadratureSpec",
    "ln_gamma",
    "chi2_cdf",
    "chi2_quantile",
    "std_normal_cdf",
    "std_normal_quantile",
    "hyp0f1",
    "log_hyp0f1",
    "hyp1f1",
    "integrate",
    "integrate_log_vectorized",
]

# Below this argument the direct 0F1 evaluation is used; above it the
# exponentially scaled Bessel route keeps the logarithm finite.
_LOG0F1_SWITCH = 50.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration domain and accuracy request for :func:`integrate`."""

    lower: float
    upper: float
    relative_tolerance: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if not self.relative_tolerance > 0:
            raise DomainError("relative_tolerance must be positive")
        if not self.lower < self.upper:
            raise DomainError("lower must be smaller than upper")
        if math.isinf(self.lower):
            raise DomainError("lower limit must be finite")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for positive ``x``."""
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def chi2_cdf(x, dof):
    """Chi-square CDF, i.e. the regularized lower incomplete gamma P(dof/2, x/2)."""
    if dof < 1:
        raise DomainError("dof must be >= 1")
    return _sp.gammainc(0.5 * dof, 0.5 * np.maximum(x, 0.0))


def chi2_quantile(p: float, dof: int) -> float:
    """Quantile of the chi-square distribution with ``dof`` degrees of freedom.

    Parameters
    ----------
    p : float
        Probability in the open interval (0, 1).
    dof : int
        Degrees of freedom, at least 1.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"chi2_quantile requires 0 < p < 1, got {p}")
    if int(dof) != dof or dof < 1:
        raise DomainError(f"dof must be a positive integer, got {dof}")
    # gammaincinv is accurate in the lower tail, gammainccinv in the upper.
    if p <= 0.5:
        x = 2.0 * _sp.gammaincinv(0.5 * dof, p)
    else:
        x = 2.0 * _sp.gammainccinv(0.5 * dof, 1.0 - p)
    return float(x)


def std_normal_cdf(x):
    """Standard normal CDF (accepts scalars or arrays)."""
    out = _sp.ndtr(x)
    return float(out) if np.ndim(out) == 0 else out


def std_normal_quantile(p):
    """Inverse of :func:`std_normal_cdf`."""
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0.0) | (p_arr >= 1.0)):
        raise DomainError("std_normal_quantile requires 0 < p < 1")
    out = _sp.ndtri(p_arr)
    return float(out) if np.ndim(out) == 0 else out


def _check_finite(value, name):
    arr = np.asarray(value)
    if not np.all(np.isfinite(arr)):
        raise ConvergenceError(f"{name} did not converge to a finite value", estimate=value)
    return value


def hyp0f1(b: float, z):
    """Confluent hypergeometric limit function 0F1(; b; z).

    Overflows to an error for very large positive ``z``; use
    :func:`log_hyp0f1` there.
    """
    if not b > 0:
        raise DomainError("hyp0f1 requires b > 0")
    z_arr = np.asarray(z, dtype=float)
    if np.all(z_arr <= _LOG0F1_SWITCH):
        out = _sp.hyp0f1(b, z_arr)
    else:
        # scipy's large-argument branch can return 0 instead of overflowing.
        with np.errstate(over="ignore"):
            out = np.where(z_arr <= _LOG0F1_SWITCH, _sp.hyp0f1(b, np.minimum(z_arr, _LOG0F1_SWITCH)),
                           np.exp(log_hyp0f1(b, np.maximum(np.abs(z_arr), _LOG0F1_SWITCH))))
    _check_finite(out, "hyp0f1")
    return float(out) if np.ndim(out) == 0 else out


def log_hyp0f1(b: float, z):
    """Logarithm of 0F1(; b; z) for ``z >= 0`` (scalar or array).

    For large ``z`` uses 0F1(;b;z) = Gamma(b) z^{(1-b)/2} I_{b-1}(2 sqrt z)
    with the exponentially scaled Bessel function.
    """
    if not b > 0:
        raise DomainError("log_hyp0f1 requires b > 0")
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0):
        raise DomainError("log_hyp0f1 requires z >= 0")
    out = np.empty_like(z_arr)
    small = z_arr <= _LOG0F1_SWITCH
    if np.any(small):
        out[small] = np.log(_sp.hyp0f1(b, z_arr[small]))
    big = ~small
    if np.any(big):
        zb = z_arr[big]
        x = 2.0 * np.sqrt(zb)
        out[big] = (
            _sp.gammaln(b)
            + 0.5 * (1.0 - b) * np.log(zb)
            + np.log(_sp.ive(b - 1.0, x))
            + x
        )
    _check_finite(out, "log_hyp0f1")
    return float(out) if out.ndim == 0 else out


def hyp1f1(a: float, b: float, z):
    """Kummer confluent hypergeometric function 1F1(a; b; z)."""
    if not (a > 0 and b > 0):
        raise DomainError("hyp1f1 requires a > 0 and b > 0")
    out = _sp.hyp1f1(a, b, z)
    _check_finite(out, "hyp1f1")
    return float(out) if np.ndim(out) == 0 else out


def integrate(f: Callable[[float], float], spec: QuadratureSpec) -> float:
    """Adaptive Gauss-Kronrod integration of ``f`` over ``spec``'s interval.

    Raises
    ------
    ConvergenceError
        If QUADPACK reports that the tolerance was not reached; the
        best estimate is attached as ``.estimate``.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        res = _integrate.quad(
            f,
            spec.lower,
            spec.upper,
            epsabs=0.0,
            epsrel=spec.relative_tolerance,
            limit=spec.max_subdivisions,
            full_output=1,
        )
    value, abserr, info = res[0], res[1], res[2]
    ier = res[3] if len(res) > 3 else 0
    if not math.isfinite(value):
        raise ConvergenceError("integral is not finite", estimate=value)
    if ier != 0:
        # QUADPACK can flag roundoff even when the estimate is adequate.
        if abserr > spec.relative_tolerance * max(abs(value), 1e-300) * 10:
            raise ConvergenceError(
                f"quadrature tolerance not met (ier={ier}, abserr={abserr:.3g})",
                estimate=value,
            )
    return float(value)


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def _panel_log_sum(log_f, a, b, panels, order):
    x, w = _gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    logs = log_f(nodes)
    peak = float(np.max(logs))
    return peak, float(np.sum(weights * np.exp(logs - peak)))


def integrate_log_vectorized(log_f, spec: QuadratureSpec, order: int = 16, panels: int = 8):
    """Integral of exp(log_f) over a finite interval, returned as its logarithm.

    ``log_f`` must accept an array of nodes. Composite Gauss-Legendre panels are
    doubled until two successive estimates agree to ``relative_tolerance``.
    Working with logarithms keeps integrands that span hundreds of orders of
    magnitude representable.
    """
    if math.isinf(spec.upper):
        raise DomainError("integrate_log_vectorized needs a finite upper limit")
    peak, total = _panel_log_sum(log_f, spec.lower, spec.upper, panels, order)
    while True:
        panels *= 2
        peak2, total2 = _panel_log_sum(log_f, spec.lower, spec.upper, panels, order)
        prev = total * math.exp(peak - peak2)
        if not (math.isfinite(total2) and total2 > 0):
            raise ConvergenceError("integrand is not positive and finite")
        if abs(total2 - prev) <= spec.relative_tolerance * total2:
            return peak2 + math.log(total2)
        if panels >= spec.max_subdivisions:
            raise ConvergenceError(
                "quadrature tolerance not met", estimate=peak2 + math.log(total2)
            )
        peak, total = peak2, total2
