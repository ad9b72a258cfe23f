"""Scenario sample sizes from the binomial tail.

B(eps, d, n) = sum_{i<d} C(n, i) eps^i (1-eps)^(n-i) bounds the probability
that an n-sample scenario solution in dimension d violates at level eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special as _sp

from .errors import DomainError, SizeError, StageTwoUnnecessary

__all__ = ["SizeRequest", "beta_tail", "log_beta_tail", "n_exact", "fast_sizes"]

_N_MAX = 10**9
# Below this the incomplete-beta value loses relative accuracy.
_UNDERFLOW = 1e-280


@dataclass(frozen=True)
class SizeRequest:
    epsilon: float
    beta: float
    dim: int

    def __post_init__(self):
        _check_prob(self.epsilon, "epsilon")
        _check_prob(self.beta, "beta")
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")


def _check_prob(p, name):
    if not 0.0 < p < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {p}")


def _log_terms(epsilon, dim, n):
    log_e = math.log(epsilon)
    log_1me = math.log1p(-epsilon)
    lg_n1 = math.lgamma(n + 1)
    return [
        lg_n1 - math.lgamma(i + 1) - math.lgamma(n - i + 1) + i * log_e + (n - i) * log_1me
        for i in range(min(dim, n + 1))
    ]


def log_beta_tail(epsilon: float, dim: int, n: int) -> float:
    """Natural log of :func:`beta_tail`, finite even when the tail underflows."""
    _check_prob(epsilon, "epsilon")
    if dim < 1 or n < 0:
        raise DomainError("need dim >= 1 and n >= 0")
    if n <= dim - 1:
        return 0.0
    direct = float(_sp.bdtr(dim - 1, n, epsilon))
    if direct > _UNDERFLOW:
        return math.log(direct)
    # Deep tail: sum the terms in log space from the running maximum.
    logs = _log_terms(epsilon, dim, n)
    top = max(logs)
    s = math.fsum(math.exp(v - top) for v in logs)
    return min(0.0, top + math.log(s))


def beta_tail(epsilon: float, dim: int, n: int) -> float:
    """Binomial tail B(epsilon, dim, n); exactly 1 when n < dim."""
    if n <= dim - 1:
        _check_prob(epsilon, "epsilon")
        return 1.0
    _check_prob(epsilon, "epsilon")
    direct = float(_sp.bdtr(dim - 1, n, epsilon))
    if direct > _UNDERFLOW:
        return direct
    return math.exp(log_beta_tail(epsilon, dim, n))


def n_exact(req: SizeRequest) -> int:
    """Smallest n with B(eps, d, n) <= beta.

    Brackets by doubling from n = d, then bisects. B is nonincreasing in n
    once n >= d - 1, so the bracket is valid.
    """
    eps, beta, d = req.epsilon, req.beta, int(req.dim)
    log_beta = math.log(beta)
    lo, hi = d - 1, d  # B(lo) = 1 > beta
    while log_beta_tail(eps, d, hi) > log_beta:
        lo = hi
        hi *= 2
        if hi > _N_MAX:
            raise SizeError(f"required sample size exceeds {_N_MAX}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_beta_tail(eps, d, mid) <= log_beta:
            hi = mid
        else:
            lo = mid
    return hi


def fast_sizes(epsilon: float, beta: float, dim: int) -> tuple[int, int]:
    """Stage sizes (n1, n2) for the two-stage FAST procedure.

    n1 = 20 d and n2 = ceil((ln beta - ln B(eps, d, n1)) / ln(1 - eps)).

    Raises
    ------
    StageTwoUnnecessary
        If B(eps, d, n1) <= beta, so stage one alone already suffices.
    """
    SizeRequest(epsilon, beta, dim)
    n1 = 20 * int(dim)
    log_b1 = log_beta_tail(epsilon, dim, n1)
    if log_b1 <= math.log(beta):
        raise StageTwoUnnecessary(
            f"B(eps, d, {n1}) <= beta: stage two is unnecessary", n1=n1
        )
    n2 = math.ceil((math.log(beta) - log_b1) / math.log1p(-epsilon))
    if n1 + n2 > _N_MAX:
        raise SizeError(f"required sample size exceeds {_N_MAX}")
    return n1, n2
