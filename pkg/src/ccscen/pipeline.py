"""End-to-end data-driven scenario pipeline.

data -> MLE -> calibrated set -> D_data of the generator -> translated
tolerance delta -> Monte Carlo size -> scenarios -> sampled program.
"""

from __future__ import annotations

import enum
import functools
import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .divergence import CHI2, ToleranceRule, select_delta
from .errors import DomainError, SizeError, StageTwoUnnecessary
from .generating import Blend, GaussianMixture, PointMass, SphereMixture
from .generating import blend_search, d_data, default_generator, descent_rate_for_set
from .models import (
    ExponentialFamily,
    ExponentialFamilyRates,
    GaussianFamily,
    UncertaintySet,
    calibrate,
    mle,
)
from .sampler import SeededStream, sample_exponential, sample_generating
from .scenario import (
    ScenarioProgram,
    Solution,
    build_joint_linear,
    build_quadratic_constraint,
    build_quadratic_objective,
    build_single_linear,
    fast_solve,
    solve,
)
from .sizes import SizeRequest, fast_sizes, n_exact

__all__ = [
    "Method",
    "SingleLinear",
    "JointLinear",
    "QuadraticObjective",
    "QuadraticConstraint",
    "PipelineConfig",
    "RunReport",
    "extended_so",
    "extended_fast",
    "run_pipeline",
    "improved_generator_search",
    "describe_generator",
]

log = logging.getLogger(__name__)


class Method(enum.Enum):
    EXTENDED_SO = "so"
    EXTENDED_FAST = "fast"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("_", "-")
        for alias, m in (("so", cls.EXTENDED_SO), ("extended-so", cls.EXTENDED_SO),
                         ("fast", cls.EXTENDED_FAST), ("extended-fast", cls.EXTENDED_FAST)):
            if key == alias:
                return m
        raise DomainError(f"unknown method {value!r}")


# Problem families. Each scenario is one row of length ``observation_dim``;
# ``build`` turns a stack of rows into a ScenarioProgram and ``violated``
# flags rows whose safety condition fails at x.


@dataclass(frozen=True, eq=False)
class SingleLinear:
    a: np.ndarray
    b: float
    c: np.ndarray

    @property
    def decision_dim(self):
        return len(self.c)

    @property
    def observation_dim(self):
        return len(self.a)

    def build(self, rows) -> ScenarioProgram:
        return build_single_linear(self.a, self.b, self.c, rows)

    def violated(self, x, rows):
        return (np.asarray(self.a) + rows) @ x > self.b


@dataclass(frozen=True, eq=False)
class JointLinear:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def decision_dim(self):
        return len(self.c)

    @property
    def observation_dim(self):
        return int(np.size(self.A))

    def _mats(self, rows):
        m, d = np.shape(self.A)
        return np.asarray(rows, dtype=float).reshape(-1, m, d)

    def build(self, rows) -> ScenarioProgram:
        return build_joint_linear(self.A, self.b, self.c, self._mats(rows))

    def violated(self, x, rows):
        lhs = (np.asarray(self.A)[None] + self._mats(rows)) @ x
        return np.any(lhs > np.asarray(self.b)[None], axis=1)


@dataclass(frozen=True, eq=False)
class QuadraticObjective(JointLinear):
    H: np.ndarray = None

    def build(self, rows) -> ScenarioProgram:
        return build_quadratic_objective(self.H, self.A, self.b, self.c, self._mats(rows))


@dataclass(frozen=True, eq=False)
class QuadraticConstraint:
    """x' Xi x + a' x <= b with Xi the second moment of ``m`` stacked d-vectors per row."""

    a: np.ndarray
    b: float
    c: np.ndarray
    m: int

    @property
    def decision_dim(self):
        return len(self.c)

    @property
    def observation_dim(self):
        return len(self.a) * self.m

    def xis(self, rows):
        d = len(self.a)
        xi = np.asarray(rows, dtype=float).reshape(-1, self.m, d)
        return np.einsum("kji,kjl->kil", xi, xi) / self.m

    def build(self, rows) -> ScenarioProgram:
        return build_quadratic_constraint(self.a, self.b, self.c, self.xis(rows))

    def violated(self, x, rows):
        d = len(self.a)
        xi = np.asarray(rows, dtype=float).reshape(-1, self.m, d)
        quad = np.mean((xi @ x) ** 2, axis=1)
        return quad + np.asarray(self.a) @ x > self.b


@dataclass(frozen=True, eq=False)
class PipelineConfig:
    """Settings of one pipeline run.

    ``generator`` is one of "pointmass", "sphere", "gaussian", "improved" or a
    concrete generating distribution. ``set_form`` chooses the exact divergence
    ball or the Fisher ellipsoid. Overall confidence is 1 - alpha - beta.
    """

    epsilon: float
    alpha: float
    beta: float
    problem: object
    family: object
    rule: ToleranceRule = ToleranceRule.CHI2_CLOSED_FORM
    generator: object = "pointmass"
    method: Method = Method.EXTENDED_SO
    set_form: str = "divergence"
    x_bar: np.ndarray | None = None
    # Refuse to build programs with more sampled scenarios than this.
    max_scenarios: int = 2_000_000

    def __post_init__(self):
        for name in ("epsilon", "alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise DomainError(f"{name} must lie in (0, 1), got {v}")
        object.__setattr__(self, "rule", ToleranceRule.parse(self.rule))
        object.__setattr__(self, "method", Method.parse(self.method))
        if self.family.observation_dim != self.problem.observation_dim:
            raise DomainError("family and problem observation dimensions differ")

    @property
    def confidence(self) -> float:
        return 1.0 - self.alpha - self.beta


@dataclass
class RunReport:
    theta_hat: list
    n: int
    radius: float
    set_form: str
    generator: str
    d_data: float
    rule: str
    delta_epsilon: float
    method: str
    N: int
    n1: int
    n2: int
    N_exact_direct: int
    status: str
    objective: float
    epsilon: float
    alpha: float
    beta: float
    confidence: float
    t_star: float | None = None
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def describe_generator(gen) -> str:
    if isinstance(gen, PointMass):
        return "pointmass"
    if isinstance(gen, SphereMixture):
        return f"sphere(radius={gen.radius:.6g})"
    if isinstance(gen, GaussianMixture):
        return f"gaussian(scale={gen.scale:.6g})"
    if isinstance(gen, Blend):
        return f"blend(t={gen.weight:.6g}, {describe_generator(gen.proposal)})"
    return type(gen).__name__


def _relocate(gen, center):
    """Same mixing law re-centered at ``center``."""
    if isinstance(gen, PointMass):
        return PointMass(center)
    if isinstance(gen, SphereMixture):
        return SphereMixture(center, gen.radius)
    if isinstance(gen, GaussianMixture):
        return GaussianMixture(center, gen.scale)
    if isinstance(gen, Blend):
        return Blend(gen.weight, PointMass(center), _relocate(gen.proposal, center))
    raise DomainError(f"unsupported generator {type(gen).__name__}")


@functools.lru_cache(maxsize=256)
def _cached_d_data(kind, mix, dim, radius, form):
    # D_data depends only on the mixing law in whitened coordinates and the set radius.
    fam = GaussianFamily(np.eye(dim))
    uset = UncertaintySet(np.zeros(dim), radius, fam, form=form)
    c = np.zeros(dim)
    if kind == "pointmass":
        gen = PointMass(c)
    elif kind == "sphere":
        gen = SphereMixture(c, mix[0])
    elif kind == "gaussian":
        gen = GaussianMixture(c, mix[0])
    else:
        prop = SphereMixture(c, mix[1]) if kind == "blend-sphere" else GaussianMixture(c, mix[1])
        gen = Blend(mix[0], PointMass(c), prop)
    return d_data(gen, uset)


def _d_data(gen, uset: UncertaintySet) -> float:
    fam = uset.family.effective
    if not isinstance(fam, GaussianFamily):
        return d_data(gen, uset)
    if isinstance(gen, PointMass):
        key = ("pointmass", ())
    elif isinstance(gen, SphereMixture):
        key = ("sphere", (gen.radius,))
    elif isinstance(gen, GaussianMixture):
        key = ("gaussian", (gen.scale,))
    elif isinstance(gen, Blend):
        p = gen.proposal
        kind = "blend-sphere" if isinstance(p, SphereMixture) else "blend-gaussian"
        key = (kind, (gen.weight, p.radius if isinstance(p, SphereMixture) else p.scale))
    else:
        raise DomainError(f"unsupported generator {type(gen).__name__}")
    return _cached_d_data(key[0], key[1], fam.dim, float(uset.radius), uset.form)


@functools.lru_cache(maxsize=64)
def _cached_improved(dim, n, alpha, radius, form):
    fam = GaussianFamily(np.eye(dim))
    uset = UncertaintySet(np.zeros(dim), radius, fam, form=form)
    c = np.zeros(dim)
    base = PointMass(c)
    best_gen, best_val = base, _d_data(base, uset)
    for name in ("sphere", "gaussian"):
        prop = default_generator(name, c, n, alpha, dim)
        val = _d_data(prop, uset)
        if val < best_val:
            best_gen, best_val = prop, val
        if descent_rate_for_set(prop, uset) < 0:
            t, v = blend_search(base, prop, uset)
            if v < best_val:
                best_gen = Blend(t, base, prop) if t < 1.0 else prop
                best_val = v
    return best_gen, best_val


def improved_generator_search(data, config: PipelineConfig):
    """Generator with the smallest D_data among point mass, both mixtures and their blends."""
    fam = config.family.effective
    if not isinstance(fam, GaussianFamily):
        raise DomainError("improved generator search requires a Gaussian family")
    data = np.asarray(data, dtype=float)
    theta_hat = mle(config.family, data)
    n = data.shape[0]
    uset = calibrate(config.family, theta_hat, n, config.alpha, CHI2, config.set_form)
    gen, _ = _cached_improved(fam.dim, n, config.alpha, float(uset.radius), uset.form)
    return _relocate(gen, theta_hat)


def _resolve_generator(config: PipelineConfig, data, theta_hat, n):
    g = config.generator
    if isinstance(g, str):
        if g.lower() == "improved":
            return improved_generator_search(data, config)
        return default_generator(g, theta_hat, n, config.alpha, config.family.dim)
    return _relocate(g, theta_hat)


def _prepare(data, config: PipelineConfig):
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise DomainError("data must be a nonempty (n, k) matrix")
    n = data.shape[0]
    theta_hat = mle(config.family, data)
    uset = calibrate(config.family, theta_hat, n, config.alpha, CHI2, config.set_form)
    if isinstance(config.family, ExponentialFamily):
        gen = PointMass(theta_hat)
        if config.generator not in ("pointmass", None) and not isinstance(config.generator, PointMass):
            raise DomainError("exponential families support only the point-mass generator")
    else:
        gen = _resolve_generator(config, data, theta_hat, n)
    dd = _d_data(gen, uset)
    delta = select_delta(config.epsilon, dd, config.rule)
    d = config.problem.decision_dim
    direct = n_exact(SizeRequest(config.epsilon, config.beta, d))
    warnings = []
    if n >= direct:
        msg = f"n={n} >= N_exact={direct}: plain scenario optimization on the data suffices"
        log.warning(msg)
        warnings.append(msg)
    return data, n, theta_hat, uset, gen, dd, delta, direct, warnings


def _check_count(config, count):
    if count > config.max_scenarios:
        raise SizeError(
            f"{count} scenarios required, above max_scenarios={config.max_scenarios}; "
            "increase epsilon or the data size"
        )


def _draw(gen, config, count, stream):
    if isinstance(config.family, ExponentialFamily):
        return sample_exponential(ExponentialFamilyRates(gen.center), count, stream)
    return sample_generating(gen, config.family, count, stream)


def _report(config, n, theta_hat, uset, gen, dd, delta, direct, warnings, sol, N, n1, n2, t_star):
    return RunReport(
        theta_hat=[float(v) for v in theta_hat],
        n=int(n),
        radius=float(uset.radius),
        set_form=uset.form,
        generator=describe_generator(gen),
        d_data=float(dd),
        rule=config.rule.value,
        delta_epsilon=float(delta),
        method=config.method.value,
        N=int(N),
        n1=int(n1),
        n2=int(n2),
        N_exact_direct=int(direct),
        status=sol.status.value,
        objective=float(sol.objective_value),
        epsilon=config.epsilon,
        alpha=config.alpha,
        beta=config.beta,
        confidence=config.confidence,
        t_star=t_star,
        warnings=warnings,
    )


def extended_so(data, config: PipelineConfig, stream: SeededStream | None = None):
    """Single-stage pipeline. Returns ``(Solution, RunReport)``."""
    stream = SeededStream(0, 0) if stream is None else stream
    data, n, theta_hat, uset, gen, dd, delta, direct, warnings = _prepare(data, config)
    N = n_exact(SizeRequest(delta, config.beta, config.problem.decision_dim))
    _check_count(config, N)
    rows = _draw(gen, config, N, stream)
    sol = solve(config.problem.build(rows))
    return sol, _report(config, n, theta_hat, uset, gen, dd, delta, direct, warnings, sol, N, N, 0, None)


def extended_fast(data, config: PipelineConfig, stream: SeededStream | None = None):
    """Two-stage pipeline with FAST sizes and x_bar = 0 by default."""
    stream = SeededStream(0, 0) if stream is None else stream
    data, n, theta_hat, uset, gen, dd, delta, direct, warnings = _prepare(data, config)
    d = config.problem.decision_dim
    x_bar = np.zeros(d) if config.x_bar is None else np.asarray(config.x_bar, dtype=float)
    try:
        n1, n2 = fast_sizes(delta, config.beta, d)
    except StageTwoUnnecessary as exc:
        n1, n2 = exc.n1, 0
        warnings.append("stage one alone certifies the requested level; stage two skipped")
    _check_count(config, n1 + n2)
    rows1 = _draw(gen, config, n1, stream)
    if n2 == 0:
        sol = solve(config.problem.build(rows1))
        t_star = None
    else:
        rows2 = _draw(gen, config, n2, stream)
        sol = fast_solve(config.problem.build, rows1, rows2, x_bar)
        t_star = sol.info.get("t_star")
    return sol, _report(config, n, theta_hat, uset, gen, dd, delta, direct, warnings, sol,
                        n1 + n2, n1, n2, t_star)


def run_pipeline(data, config: PipelineConfig, stream: SeededStream | None = None
                 ) -> tuple[Solution, RunReport]:
    if config.method is Method.EXTENDED_FAST:
        return extended_fast(data, config, stream)
    return extended_so(data, config, stream)


