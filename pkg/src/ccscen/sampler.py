"""Seeded sampling of data, scenarios and generating distributions.

Each trial owns a :class:`SeededStream`. Streams are numpy ``Generator``
objects built from ``SeedSequence(seed, spawn_key=(stream_id,))``, so
distinct stream ids are statistically independent and a given
``(seed, stream_id)`` pair reproduces identical draws.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .generating.distributions import Blend, GaussianMixture, PointMass, SphereMixture
from .models import ExponentialFamilyRates, GaussianFamily, ReplicatedGaussianFamily

__all__ = [
    "SeededStream",
    "sample_gaussian",
    "sample_sphere_surface",
    "sample_parameters",
    "sample_generating",
    "sample_exponential",
    "sample_quadratic_scenario",
]


class SeededStream:
    """Single-owner random stream identified by ``(seed, stream_id)``."""

    def __init__(self, seed: int = 0, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise DomainError("seed and stream_id must be nonnegative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.rng = np.random.Generator(np.random.PCG64(ss))

    def child(self, key: int) -> "SeededStream":
        """Independent sub-stream, e.g. for evaluation draws inside a trial."""
        out = SeededStream.__new__(SeededStream)
        out.seed, out.stream_id = self.seed, self.stream_id
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, int(key)))
        out.rng = np.random.Generator(np.random.PCG64(ss))
        return out

    def __repr__(self):
        return f"SeededStream(seed={self.seed}, stream_id={self.stream_id})"


def _count(count):
    if int(count) != count or count < 0:
        raise DomainError("count must be a nonnegative integer")
    return int(count)


def sample_gaussian(theta, family: GaussianFamily, count: int, stream: SeededStream) -> np.ndarray:
    """``count`` rows of theta + L z."""
    count = _count(count)
    theta = np.asarray(theta, dtype=float)
    z = stream.rng.standard_normal((count, family.dim))
    return theta + z @ family.cholesky.T


def sample_sphere_surface(dim: int, stream: SeededStream, count: int | None = None) -> np.ndarray:
    """Uniform draw(s) on the unit sphere in R^dim by normalizing Gaussians."""
    if dim < 1:
        raise DomainError("dim must be at least 1")
    m = 1 if count is None else _count(count)
    g = stream.rng.standard_normal((m, dim))
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms == 0.0):  # measure-zero event
        bad = norms == 0.0
        g[bad] = stream.rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(g, axis=1)
    u = g / norms[:, None]
    return u[0] if count is None else u


def sample_parameters(gen, family, count: int, stream: SeededStream) -> np.ndarray:
    """Mixing-stage draws theta' ~ mu, shape (count, D).

    Mixture spreads use the covariance of ``family.effective``.
    """
    count = _count(count)
    fam = family.effective
    chol = fam.cholesky
    if isinstance(gen, PointMass):
        return np.repeat(gen.center[None, :], count, axis=0)
    if isinstance(gen, SphereMixture):
        eta = sample_sphere_surface(fam.dim, stream, count)
        return gen.center + gen.radius * eta @ chol.T
    if isinstance(gen, GaussianMixture):
        z = stream.rng.standard_normal((count, fam.dim))
        return gen.center + np.sqrt(gen.scale) * z @ chol.T
    if isinstance(gen, Blend):
        pick = stream.rng.random(count) < gen.weight
        out = np.repeat(gen.base.center[None, :], count, axis=0)
        k = int(pick.sum())
        if k:
            out[pick] = sample_parameters(gen.proposal, family, k, stream)
        return out
    raise DomainError(f"unsupported generator {type(gen).__name__}")


def sample_generating(gen, family, count: int, stream: SeededStream) -> np.ndarray:
    """Two-stage draws: theta' from the mixing law, then an observation from P_theta'.

    For a :class:`ReplicatedGaussianFamily` every row stacks ``replicas``
    independent N(theta', Sigma) vectors.
    """
    count = _count(count)
    if isinstance(family, ExponentialFamilyRates):
        raise DomainError("pass rates to sample_exponential")
    thetas = sample_parameters(gen, family, count, stream)
    if isinstance(family, ReplicatedGaussianFamily):
        m, d = family.replicas, family.dim
        z = stream.rng.standard_normal((count, m, d))
        return (thetas[:, None, :] + z @ family.base.cholesky.T).reshape(count, m * d)
    z = stream.rng.standard_normal((count, family.dim))
    return thetas + z @ family.cholesky.T


def sample_exponential(rates, count: int, stream: SeededStream) -> np.ndarray:
    """Entry (i, j) ~ Exp(rates[j]) by inverse CDF."""
    count = _count(count)
    r = rates.rates if isinstance(rates, ExponentialFamilyRates) else ExponentialFamilyRates(rates).rates
    u = stream.rng.random((count, r.size))
    # 1 - u lies in (0, 1], so the log is finite.
    return -np.log1p(-u) / r


def sample_quadratic_scenario(theta, family: GaussianFamily, m: int, stream: SeededStream) -> np.ndarray:
    """Empirical second moment (1/m) sum xi xi' of m draws from N(theta, Sigma)."""
    if m < 1:
        raise DomainError("m must be at least 1")
    xi = sample_gaussian(theta, family, m, stream)
    return xi.T @ xi / m
