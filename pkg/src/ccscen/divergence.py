"""Chi-square tolerance translation.

A chance constraint at level ``delta`` under the baseline distribution implies
level ``eps`` for every distribution within chi-square distance ``lam``
whenever ``delta + sqrt(delta (1 - delta) lam) <= eps``. Solving for equality
gives the closed form below. The cruder bound ``delta + sqrt(delta lam) <= eps``
gives :func:`appendix_b_delta`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError, UnattainableError, ZeroToleranceError

__all__ = [
    "DivergenceKind",
    "CHI2",
    "ToleranceRule",
    "chi2_epsilon_prime",
    "epsilon_prime_inverse",
    "appendix_b_delta",
    "select_delta",
]


@dataclass(frozen=True)
class DivergenceKind:
    variant: str = "chi2"
    second_derivative_at_one: float = 2.0

    def __post_init__(self):
        if self.variant != "chi2":
            raise DomainError(f"unsupported divergence {self.variant!r}")
        if not self.second_derivative_at_one > 0:
            raise DomainError("second_derivative_at_one must be positive")


CHI2 = DivergenceKind()


class ToleranceRule(enum.Enum):
    CHI2_CLOSED_FORM = "closed-form"
    APPENDIX_B_BOUND = "appendix-b"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "closed-form": cls.CHI2_CLOSED_FORM,
            "closed": cls.CHI2_CLOSED_FORM,
            "chi2-closed-form": cls.CHI2_CLOSED_FORM,
            "appendix-b": cls.APPENDIX_B_BOUND,
            "appendix-b-bound": cls.APPENDIX_B_BOUND,
            "bound": cls.APPENDIX_B_BOUND,
        }
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown tolerance rule {value!r}") from None


def _eps_prime(eps, lam):
    # Rationalized smaller root of (1+lam) d^2 - (2 eps + lam) d + eps^2 = 0;
    # avoids the cancellation of the textbook form for large lam.
    disc = lam * lam + 4.0 * lam * eps * (1.0 - eps)
    return 2.0 * eps * eps / (2.0 * eps + lam + math.sqrt(disc)) if eps > 0 else 0.0


def chi2_epsilon_prime(epsilon: float, lam: float) -> float:
    """Tightened tolerance for a chi-square ball of radius ``lam``.

    Equals ``epsilon`` at ``lam = 0`` and decreases in ``lam``.
    """
    if not 0.0 < epsilon < 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    if not lam >= 0:
        raise DomainError(f"radius must be nonnegative, got {lam}")
    return min(epsilon, max(0.0, _eps_prime(epsilon, lam)))


def epsilon_prime_inverse(x: float, lam: float, tol: float = 1e-12) -> float:
    """Smallest epsilon in [0, 1/2) with ``chi2_epsilon_prime(epsilon, lam) >= x``."""
    if not 0.0 <= x < 0.5:
        raise DomainError(f"x must lie in [0, 1/2), got {x}")
    if not lam >= 0:
        raise DomainError(f"radius must be nonnegative, got {lam}")
    if x == 0.0:
        return 0.0
    if _eps_prime(0.5, lam) < x:
        raise UnattainableError(
            f"no epsilon < 1/2 reaches tightened tolerance {x} at radius {lam}"
        )
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _eps_prime(mid, lam) >= x:
            hi = mid
        else:
            lo = mid
    if hi >= 0.5:
        hi = math.nextafter(0.5, 0.0)
    return hi


def appendix_b_delta(epsilon: float, d_data: float) -> float:
    """Root of ``delta + sqrt(delta * D) = epsilon``: eps + D/2 - sqrt(eps D + D^2/4)."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not d_data >= 0:
        raise DomainError(f"divergence value must be nonnegative, got {d_data}")
    delta = epsilon * epsilon / (
        epsilon + 0.5 * d_data + math.sqrt(epsilon * d_data + 0.25 * d_data * d_data)
    )
    return min(epsilon, delta)


def select_delta(epsilon: float, value: float, rule: ToleranceRule) -> float:
    """Translated tolerance under ``rule``; ``value`` is a radius or a divergence bound."""
    rule = ToleranceRule.parse(rule)
    if math.isinf(value):
        raise ZeroToleranceError("divergence bound is infinite: no tolerance survives")
    if rule is ToleranceRule.CHI2_CLOSED_FORM:
        delta = chi2_epsilon_prime(epsilon, value)
    else:
        delta = appendix_b_delta(epsilon, value)
    if not delta > 0:
        raise ZeroToleranceError(
            "translated tolerance is zero: the uncertainty set is too large "
            f"for epsilon={epsilon}"
        )
    return delta
