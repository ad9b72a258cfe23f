"""Parametric families, MLE and data-driven uncertainty sets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg

from .divergence import CHI2, DivergenceKind
from .errors import DomainError
from .numerics import chi2_quantile

__all__ = [
    "GaussianFamily",
    "ReplicatedGaussianFamily",
    "ExponentialFamily",
    "ExponentialFamilyRates",
    "UncertaintySet",
    "SET_FORMS",
    "mle",
    "calibrate",
    "chi2_gaussian",
    "chi2_exponential",
    "boundary_point",
    "random_covariance",
    "load_csv",
]

SET_FORMS = ("divergence", "fisher")


@dataclass(frozen=True, eq=False)
class GaussianFamily:
    """N(theta, Sigma) with known covariance; the parameter is the mean."""

    covariance: np.ndarray
    cholesky: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cov = np.array(self.covariance, dtype=float)
        if cov.ndim == 0:
            cov = cov.reshape(1, 1)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise DomainError("covariance must be a square matrix")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > 1e-12 * scale:
            raise DomainError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise DomainError("covariance must be positive definite") from None
        if np.any(np.diag(chol) <= 0):
            raise DomainError("covariance must be positive definite")
        cov.setflags(write=False)
        chol.setflags(write=False)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "cholesky", chol)

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.covariance.shape[0]

    @property
    def observation_dim(self) -> int:
        return self.dim

    @property
    def effective(self) -> "GaussianFamily":
        return self

    def whiten(self, delta):
        """Sigma^{-1/2} delta using the Cholesky factor (rows or a vector)."""
        delta = np.asarray(delta, dtype=float)
        return linalg.solve_triangular(self.cholesky, delta.T, lower=True).T

    def mahalanobis_sq(self, delta) -> float:
        w = self.whiten(delta)
        return float(w @ w)

    def log_density(self, y, theta):
        y = np.atleast_2d(y)
        z = self.whiten(y - np.asarray(theta, dtype=float))
        log_det = 2.0 * np.sum(np.log(np.diag(self.cholesky)))
        return -0.5 * (self.dim * math.log(2 * math.pi) + log_det) - 0.5 * np.sum(z * z, axis=1)


@dataclass(frozen=True, eq=False)
class ReplicatedGaussianFamily:
    """Each observation stacks ``replicas`` iid N(theta, Sigma) draws.

    The block mean is sufficient, so divergences and sets are those of
    ``effective`` = N(theta, Sigma / replicas).
    """

    base: GaussianFamily
    replicas: int

    def __post_init__(self):
        if int(self.replicas) != self.replicas or self.replicas < 1:
            raise DomainError("replicas must be a positive integer")
        object.__setattr__(self, "_effective", GaussianFamily(self.base.covariance / self.replicas))

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def observation_dim(self) -> int:
        return self.base.dim * self.replicas

    @property
    def effective(self) -> GaussianFamily:
        return self._effective

    @property
    def covariance(self):
        return self.base.covariance

    @property
    def cholesky(self):
        return self.base.cholesky


@dataclass(frozen=True)
class ExponentialFamily:
    """Independent exponential coordinates; the parameter is the rate vector."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError("dim must be a positive integer")

    @property
    def observation_dim(self) -> int:
        return self.dim

    @property
    def effective(self):
        return self


@dataclass(frozen=True, eq=False)
class ExponentialFamilyRates:
    rates: np.ndarray

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.rates, dtype=float))
        if r.ndim != 1 or np.any(~np.isfinite(r)) or np.any(r <= 0):
            raise DomainError("rates must be a vector of positive reals")
        r.setflags(write=False)
        object.__setattr__(self, "rates", r)


@dataclass(frozen=True, eq=False)
class UncertaintySet:
    """Parameter set around ``center`` of chi-square radius ``radius``.

    ``form="divergence"`` is the exact ball {theta : chi2(P_center, P_theta) <= radius}.
    ``form="fisher"`` is the Fisher-information ellipsoid
    (theta - center)' I(center) (theta - center) <= radius.
    For Gaussians both are Mahalanobis balls, of squared radius
    ln(1 + radius) and radius respectively.
    """

    center: np.ndarray
    radius: float
    family: object
    divergence: DivergenceKind = CHI2
    form: str = "divergence"

    def __post_init__(self):
        if not self.radius >= 0:
            raise DomainError("radius must be nonnegative")
        if self.form not in SET_FORMS:
            raise DomainError(f"form must be one of {SET_FORMS}")
        c = np.atleast_1d(np.asarray(self.center, dtype=float)).copy()
        c.setflags(write=False)
        object.__setattr__(self, "center", c)

    @property
    def mahalanobis_radius_sq(self) -> float:
        """Squared whitened radius for Gaussian families."""
        if self.form == "divergence":
            return math.log1p(self.radius)
        return float(self.radius)

    def contains(self, theta, tol: float = 1e-10) -> bool:
        theta = np.asarray(theta, dtype=float)
        fam = self.family.effective
        if isinstance(fam, GaussianFamily):
            return fam.mahalanobis_sq(theta - self.center) <= self.mahalanobis_radius_sq + tol
        if self.form == "divergence":
            return chi2_exponential(self.center, theta) <= self.radius + tol
        rel = theta / self.center - 1.0
        return float(rel @ rel) <= self.radius + tol


def mle(family, data) -> np.ndarray:
    """Maximum-likelihood estimate from an (n, k) sample matrix."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data.reshape(1, -1)
    if data.shape[0] == 0:
        raise DomainError("cannot estimate from empty data")
    if not np.all(np.isfinite(data)):
        raise DomainError("data must be finite")
    if data.shape[1] != family.observation_dim:
        raise DomainError(
            f"data has {data.shape[1]} columns, family expects {family.observation_dim}"
        )
    if isinstance(family, GaussianFamily):
        return data.mean(axis=0)
    if isinstance(family, ReplicatedGaussianFamily):
        return data.reshape(-1, family.dim).mean(axis=0)
    if isinstance(family, ExponentialFamily):
        if np.any(data <= 0):
            raise DomainError("exponential observations must be positive")
        return 1.0 / data.mean(axis=0)
    raise DomainError(f"unsupported family {type(family).__name__}")


def calibrate(family, theta_hat, n: int, alpha: float, divergence: DivergenceKind = CHI2,
              form: str = "divergence") -> UncertaintySet:
    """Set of radius phi''(1) chi2_{1-alpha, D} / (2 n) around ``theta_hat``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    q = chi2_quantile(1.0 - alpha, family.dim)
    radius = divergence.second_derivative_at_one * q / (2.0 * n)
    return UncertaintySet(theta_hat, radius, family, divergence, form)


def chi2_gaussian(theta1, theta2, family) -> float:
    """chi2(P_theta1, P_theta2) = exp(Mahalanobis^2) - 1 for known covariance."""
    fam = family.effective
    d = np.asarray(theta2, dtype=float) - np.asarray(theta1, dtype=float)
    return math.expm1(fam.mahalanobis_sq(d))


def chi2_exponential(rates1, rates2) -> float:
    """chi2(P_rates1, P_rates2) for independent exponentials; inf if it diverges."""
    r1 = np.asarray(getattr(rates1, "rates", rates1), dtype=float)
    r2 = np.asarray(getattr(rates2, "rates", rates2), dtype=float)
    denom = 2.0 * r2 - r1
    if np.any(denom <= 0):
        return math.inf
    return math.expm1(float(np.sum(2.0 * np.log(r2) - np.log(r1) - np.log(denom))))


def boundary_point(uset: UncertaintySet, direction) -> np.ndarray:
    """Point center + r Sigma^{1/2} v on the set boundary (Gaussian only)."""
    fam = uset.family.effective
    if not isinstance(fam, GaussianFamily):
        raise DomainError("boundary_point is only defined for Gaussian families")
    v = np.asarray(direction, dtype=float)
    if v.shape != (fam.dim,):
        raise DomainError("direction has the wrong dimension")
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise DomainError("direction must be a unit vector")
    return uset.center + math.sqrt(uset.mahalanobis_radius_sq) * (fam.cholesky @ v)


def random_covariance(dim: int, rng: np.random.Generator, law: str = "normal") -> np.ndarray:
    """A A' + 0.1 I scaled to unit average diagonal.

    ``law`` picks the entries of A: "normal" (standard normal) or "uniform"
    (uniform on [0, 1), which yields positively correlated components).
    """
    if law == "normal":
        a = rng.standard_normal((dim, dim))
    elif law == "uniform":
        a = rng.random((dim, dim))
    else:
        raise DomainError(f"unknown covariance law {law!r}")
    s = a @ a.T + 0.1 * np.eye(dim)
    s *= dim / np.trace(s)
    return 0.5 * (s + s.T)


def load_csv(path) -> np.ndarray:
    """Read a headerless numeric CSV, one observation per row."""
    path = Path(path)
    rows = []
    width = None
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DomainError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DomainError(f"{path}: no data rows")
    return np.array(rows, dtype=float)
