"""Worst-case divergence D_data of a generating distribution and its improvement.

D_data(P_0) is the largest chi2(P_0, P_theta) over theta in the uncertainty
set. By rotational invariance it is a maximum along one ray from the center.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError
from ..models import ExponentialFamily, GaussianFamily, UncertaintySet
from ..numerics import QuadratureSpec, chi2_quantile, hyp1f1, integrate, log_hyp0f1
from .distributions import Blend, GaussianMixture, PointMass, SphereMixture
from .profiles import RadialNominal, chi2_at_radius, radial_profile

__all__ = [
    "d_data_pointmass",
    "d_data_gaussian_mixture",
    "d_data_sphere_mixture",
    "d_data_general",
    "d_data_exponential_pointmass",
    "d_data",
    "descent_rate",
    "descent_rate_for_set",
    "blend_search",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(fn, lo, hi, tol=1e-8):
    """Golden-section search for a maximum of a unimodal ``fn`` on [lo, hi]."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
    return (c, fc) if fc >= fd else (d, fd)


def _grid_then_golden(fn, lo, hi, grid=11, tol=1e-8, maximize=True):
    """Coarse grid scan, then golden refinement in the bracket of the best node."""
    sign = 1.0 if maximize else -1.0
    ts = np.linspace(lo, hi, grid)
    vals = [sign * fn(float(t)) for t in ts]
    k = int(np.argmax(vals))
    best_t, best_v = float(ts[k]), vals[k]
    a, b = float(ts[max(k - 1, 0)]), float(ts[min(k + 1, grid - 1)])
    if b > a:
        t, v = golden_max(lambda u: sign * fn(u), a, b, tol)
        if v > best_v:
            best_t, best_v = t, v
    return best_t, sign * best_v


def _default_quantile(n, alpha, dim):
    if n < 1:
        raise DomainError("n must be at least 1")
    return chi2_quantile(1.0 - alpha, dim)


def d_data_pointmass(n: int, alpha: float, dim: int) -> float:
    """exp(chi2_{1-alpha,D} / n) - 1: baseline P_theta_hat over the Fisher ellipsoid."""
    return math.expm1(_default_quantile(n, alpha, dim) / n)


def d_data_gaussian_mixture(n: int, alpha: float, dim: int) -> float:
    """Closed form for the scale-1/n Gaussian mixture over the Fisher ellipsoid."""
    q = _default_quantile(n, alpha, dim)
    return math.expm1(0.5 * dim * math.log((n + 1.0) ** 2 / (n * (n + 2.0))) + q / (n + 2.0))


def d_data_sphere_mixture(n: int, alpha: float, dim: int) -> float:
    """Sphere mixture (radius sqrt(chi2/n)) over the Fisher ellipsoid.

    Maximizes over t <= chi2/n the chi-weighted integral
    e^{-t + chi2/(2n)} int 0F1(;D/2; l^2 t) / 0F1(;D/2; l^2 chi2/(4n)) f_L(l) dl.
    """
    q = _default_quantile(n, alpha, dim)
    rho2 = q / n
    b = 0.5 * dim
    log_chi_norm = (1.0 - b) * math.log(2.0) - math.lgamma(b)
    upper = math.sqrt(dim) + 2.0 * math.sqrt(rho2) + 12.0

    def value(t):
        def f(l):
            l2 = l * l
            return math.exp(
                log_hyp0f1(b, l2 * t) - log_hyp0f1(b, 0.25 * l2 * rho2)
                + log_chi_norm + (dim - 1) * math.log(l) - 0.5 * l2
            )
        integral = integrate(f, QuadratureSpec(0.0, upper, 1e-11, 400))
        return math.exp(-t + 0.5 * rho2) * integral - 1.0

    _, best = _grid_then_golden(value, 0.0, rho2, grid=11)
    return best


def d_data_general(nominal: RadialNominal, uset: UncertaintySet) -> float:
    """Maximum of the radial chi-square along the ray center -> boundary.

    The ray is taken along Sigma^{1/2} e_1; by rotational invariance of the
    nominal any boundary direction gives the same value.
    """
    if not isinstance(uset.family.effective, GaussianFamily):
        raise DomainError("d_data_general requires a Gaussian family")
    if nominal.dim != uset.family.dim:
        raise DomainError("nominal and set dimensions differ")
    reach = math.sqrt(uset.mahalanobis_radius_sq)
    if reach == 0.0:
        return chi2_at_radius(nominal, 0.0)
    _, best = _grid_then_golden(lambda t: chi2_at_radius(nominal, t * reach), 0.0, 1.0)
    return max(best, 0.0)


def _exp_h(u):
    return 2.0 * np.log(u) - np.log(2.0 * u - 1.0)


def d_data_exponential_pointmass(uset: UncertaintySet) -> float:
    """D_data of the baseline exponential distribution.

    Divergence form: the radius itself. Fisher form: maximize
    sum_i log(u_i^2 / (2 u_i - 1)) over sum_i (u_i - 1)^2 <= radius, where
    u = rates / center. The objective is separable and convex on the
    relevant range, so the maximum puts equal deviations on k coordinates.
    Returns inf when some u <= 1/2 is reachable.
    """
    if uset.form == "divergence":
        return float(uset.radius)
    rho = math.sqrt(uset.radius)
    dim = uset.family.dim
    best = 0.0
    for k in range(1, dim + 1):
        step = rho / math.sqrt(k)
        if 1.0 - step <= 0.5:
            return math.inf
        best = max(best, k * float(_exp_h(1.0 - step)), k * float(_exp_h(1.0 + step)))
    return math.expm1(best)


def d_data(gen, uset: UncertaintySet) -> float:
    """D_data of any supported generating distribution on ``uset``."""
    fam = uset.family.effective
    if isinstance(fam, ExponentialFamily):
        if not isinstance(gen, PointMass):
            raise DomainError("exponential families support only the point-mass generator")
        return d_data_exponential_pointmass(uset)
    if isinstance(gen, PointMass):
        # exp(r^2) - 1 with r the whitened radius.
        return math.expm1(uset.mahalanobis_radius_sq)
    return d_data_general(radial_profile(gen, fam.dim), uset)


def descent_rate_for_set(proposal, uset: UncertaintySet) -> float:
    """(1 + radius) (1 - E[exp(2 (theta - c)' Sigma^{-1} (theta' - c))]) on the set boundary."""
    rho = math.sqrt(uset.mahalanobis_radius_sq)
    dim = uset.family.dim
    if isinstance(proposal, PointMass):
        expect = 1.0
    elif isinstance(proposal, GaussianMixture):
        expect = math.exp(2.0 * proposal.scale * rho * rho)
    elif isinstance(proposal, SphereMixture):
        x = 2.0 * rho * proposal.radius
        if dim >= 2:
            expect = hyp1f1(0.5 * (dim - 1), dim - 1.0, 2.0 * x) / math.exp(x)
        else:
            expect = math.cosh(x)
    else:
        raise DomainError(f"descent rate undefined for {type(proposal).__name__}")
    return (1.0 + uset.radius) * (1.0 - expect)


def descent_rate(proposal, n: int, alpha: float, dim: int) -> float:
    """Descent rate away from the point mass on the divergence ball of radius chi2/n."""
    q = _default_quantile(n, alpha, dim)
    uset = UncertaintySet(np.zeros(dim), q / n, GaussianFamily(np.eye(dim)), form="divergence")
    return descent_rate_for_set(proposal, uset)


def blend_search(base: PointMass, proposal, uset: UncertaintySet, grid_size: int = 21):
    """Minimize D_data over Blend(t, base, proposal), t in [0, 1].

    Returns ``(t_star, d_star)``. Refuses if the proposal is not a descent
    direction at t = 0.
    """
    if grid_size < 2:
        raise DomainError("grid_size must be at least 2")
    if descent_rate_for_set(proposal, uset) >= 0:
        raise DomainError("proposal is not a descent direction; blend search refused")
    dim = uset.family.dim

    def value(t):
        return d_data_general(radial_profile(Blend(t, base, proposal), dim), uset)

    ts = np.linspace(0.0, 1.0, grid_size)
    vals = [value(float(t)) for t in ts]
    k = int(np.argmin(vals))
    best_t, best_v = float(ts[k]), vals[k]
    if grid_size > 2:
        a, b = float(ts[max(k - 1, 0)]), float(ts[min(k + 1, grid_size - 1)])
        t, v = golden_max(lambda u: -value(u), a, b, tol=1e-4)
        if -v < best_v:
            best_t, best_v = t, -v
    return best_t, best_v

