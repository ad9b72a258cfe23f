"""Generating distributions: a mixing law over the parameter followed by P_theta.

The covariance (or family) is not stored here; samplers and profiles take it
from the family they are evaluated against, so a variant is just its mixing
law in whitened coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..numerics import chi2_quantile

__all__ = [
    "PointMass",
    "SphereMixture",
    "GaussianMixture",
    "Blend",
    "GeneratingDistribution",
    "GENERATOR_NAMES",
    "default_generator",
]

GENERATOR_NAMES = ("pointmass", "sphere", "gaussian")


def _vec(center):
    c = np.atleast_1d(np.asarray(center, dtype=float)).copy()
    c.setflags(write=False)
    return c


@dataclass(frozen=True, eq=False)
class PointMass:
    """All scenarios drawn from P_center."""

    center: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))

    name = "pointmass"


@dataclass(frozen=True, eq=False)
class SphereMixture:
    """theta' = center + radius * Sigma^{1/2} eta with eta uniform on the unit sphere."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not self.radius >= 0:
            raise DomainError("sphere radius must be nonnegative")

    name = "sphere"


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """theta' ~ N(center, scale * Sigma)."""

    center: np.ndarray
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not self.scale >= 0:
            raise DomainError("mixing scale must be nonnegative")

    name = "gaussian"


@dataclass(frozen=True, eq=False)
class Blend:
    """(1 - weight) * base + weight * proposal."""

    weight: float
    base: PointMass
    proposal: object

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise DomainError("blend weight must lie in [0, 1]")
        if not isinstance(self.base, PointMass):
            raise DomainError("blend base must be a PointMass")
        if not isinstance(self.proposal, (SphereMixture, GaussianMixture)):
            raise DomainError("blend proposal must be a sphere or Gaussian mixture")

    name = "blend"

    @property
    def center(self):
        return self.base.center


GeneratingDistribution = PointMass | SphereMixture | GaussianMixture | Blend


def default_generator(name: str, center, n: int, alpha: float, dim: int):
    """Variant with the default mixing size: sphere radius sqrt(chi2/n), Gaussian scale 1/n."""
    key = name.lower()
    if key in ("pointmass", "point-mass", "point"):
        return PointMass(center)
    if key in ("sphere", "sphere-mixture"):
        return SphereMixture(center, math.sqrt(chi2_quantile(1.0 - alpha, dim) / n))
    if key in ("gaussian", "gaussian-mixture"):
        return GaussianMixture(center, 1.0 / n)
    raise DomainError(f"unknown generator {name!r}; expected one of {GENERATOR_NAMES}")
