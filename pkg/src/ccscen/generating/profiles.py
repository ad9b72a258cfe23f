"""Radial nominal profiles and the radial chi-square integral.

In whitened coordinates Z = Sigma^{-1/2}(Y - theta_hat) every supported
generating distribution has a rotationally invariant density q(|z|). For
nu = Sigma^{-1/2}(theta - theta_hat),

    chi2 + 1 = (2 pi)^{-D} e^{-|nu|^2} S_D int_0^inf s^{D-1} e^{-s^2}
               0F1(; D/2; s^2 |nu|^2) / q(s) ds,

with S_D = 2 pi^{D/2} / Gamma(D/2) the area of the unit sphere. All
evaluations are done on log densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import DomainError, IntegrandDivergenceError
from ..numerics import QuadratureSpec, integrate_log_vectorized, log_hyp0f1
from .distributions import Blend, GaussianMixture, PointMass, SphereMixture

__all__ = [
    "RadialNominal",
    "radial_profile",
    "log_sphere_area",
    "chi2_at_radius",
    "chi2_nominal_to_theta",
    "profile_mass",
]

_LOG_2PI = math.log(2.0 * math.pi)
_RTOL = 1e-11


def log_sphere_area(dim: int) -> float:
    return math.log(2.0) + 0.5 * dim * math.log(math.pi) - math.lgamma(0.5 * dim)


@dataclass(frozen=True)
class RadialNominal:
    """Density of Z as a function of s = |z|, given by its logarithm."""

    dim: int
    log_q: Callable[[np.ndarray], np.ndarray]
    # Rough scale of the profile's support, used to place quadrature cutoffs.
    reach: float = 0.0

    def density(self, s):
        return np.exp(self.log_q(np.asarray(s, dtype=float)))


def _log_pointmass(dim):
    def f(s):
        return -0.5 * dim * _LOG_2PI - 0.5 * s * s
    return f


def _log_gaussian(dim, r):
    v = 1.0 + r

    def f(s):
        return -0.5 * dim * (_LOG_2PI + math.log(v)) - 0.5 * s * s / v
    return f


def _log_sphere(dim, rho):
    b = 0.5 * dim

    def f(s):
        s = np.asarray(s, dtype=float)
        return -0.5 * dim * _LOG_2PI - 0.5 * (s * s + rho * rho) + log_hyp0f1(b, 0.25 * (s * rho) ** 2)
    return f


def radial_profile(gen, dim: int) -> RadialNominal:
    """Radial nominal profile of a generating distribution in ``dim`` dimensions."""
    if isinstance(gen, PointMass):
        return RadialNominal(dim, _log_pointmass(dim), 0.0)
    if isinstance(gen, GaussianMixture):
        return RadialNominal(dim, _log_gaussian(dim, gen.scale), 3.0 * math.sqrt(gen.scale))
    if isinstance(gen, SphereMixture):
        return RadialNominal(dim, _log_sphere(dim, gen.radius), gen.radius)
    if isinstance(gen, Blend):
        base = radial_profile(gen.base, dim)
        prop = radial_profile(gen.proposal, dim)
        t = gen.weight
        if t == 0.0:
            return base
        if t == 1.0:
            return prop
        lw0, lw1 = math.log1p(-t), math.log(t)

        def f(s):
            return np.logaddexp(lw0 + base.log_q(s), lw1 + prop.log_q(s))
        return RadialNominal(dim, f, max(base.reach, prop.reach))
    raise DomainError(f"no radial profile for {type(gen).__name__}")


def _cutoff(dim, nu, reach):
    return math.sqrt(dim) + 2.0 * nu + reach + 12.0


def profile_mass(nominal: RadialNominal) -> float:
    """Total mass S_D int s^{D-1} q(s) ds; should equal 1."""
    d = nominal.dim
    log_area = log_sphere_area(d)

    def log_f(s):
        val = log_area + nominal.log_q(s)
        return val + (d - 1) * np.log(s) if d > 1 else val

    upper = _cutoff(d, 0.0, nominal.reach)
    return math.exp(integrate_log_vectorized(log_f, QuadratureSpec(0.0, upper, _RTOL, 4096)))


def _log_integrand(nominal, nu):
    d = nominal.dim
    const = log_sphere_area(d) - d * _LOG_2PI - nu * nu
    b = 0.5 * d
    nu2 = nu * nu

    def g(s):
        s_arr = np.asarray(s, dtype=float)
        val = const - s_arr * s_arr - nominal.log_q(s_arr)
        if d > 1:
            val = val + (d - 1) * np.log(s_arr)
        if nu2 > 0:
            val = val + log_hyp0f1(b, s_arr * s_arr * nu2)
        return val
    return g


def chi2_at_radius(nominal: RadialNominal, nu: float) -> float:
    """chi2(P_0, P_theta) for a parameter at whitened distance ``nu`` from the center."""
    if nu < 0:
        raise DomainError("radius must be nonnegative")
    g = _log_integrand(nominal, nu)
    upper = _cutoff(nominal.dim, nu, nominal.reach)
    probe = g(np.linspace(upper / 64.0, upper, 64))
    if not np.all(np.isfinite(probe)):
        raise IntegrandDivergenceError("radial integrand is not finite on its domain")
    # The tail must be negligible at the cutoff, otherwise q is too light-tailed.
    if probe[-1] - probe.max() > -40.0 or probe[-1] > probe[-2]:
        raise IntegrandDivergenceError(
            "radial integrand does not decay: nominal tail is lighter than the kernel"
        )
    log_total = integrate_log_vectorized(g, QuadratureSpec(0.0, upper, _RTOL, 4096))
    return max(0.0, math.expm1(log_total))


def chi2_nominal_to_theta(nominal: RadialNominal, theta, family, center) -> float:
    """chi2 from the generating distribution centered at ``center`` to P_theta."""
    fam = family.effective
    delta = np.asarray(theta, dtype=float) - np.asarray(center, dtype=float)
    if delta.shape != (nominal.dim,):
        raise DomainError("parameter dimension does not match the nominal")
    return chi2_at_radius(nominal, math.sqrt(fam.mahalanobis_sq(delta)))
