"""Experiment harness: repeated trials, violation evaluation and summaries.

Configuration (JSON) keys, all optional except ``problem``::

    problem        single-linear | joint-linear | quadratic-objective | quadratic-constraint
    distribution   gaussian | exponential            (default gaussian)
    d, m, n        decision dim, rows or replicas, data size
    epsilon, alpha, beta, rule, generator, method, set_form
    a, b, c        scalars (broadcast) or lists; defaults 5, 5, -1
    theta_true     scalar or list (Gaussian, default 0)
    rates          scalar or list (exponential, default 1)
    sigma_seed     seed of the random covariance (default 2024)
    sigma_law      entries of the covariance factor: normal | uniform (default normal)
    h_seed         seed of the random objective Hessian (default 2025)
    trials, seed, violation_samples, workers
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import CCScenError, DomainError
from .models import (
    ExponentialFamily,
    ExponentialFamilyRates,
    GaussianFamily,
    ReplicatedGaussianFamily,
    random_covariance,
)
from .numerics import std_normal_cdf
from .pipeline import (
    JointLinear,
    PipelineConfig,
    QuadraticConstraint,
    QuadraticObjective,
    SingleLinear,
    run_pipeline,
)
from .sampler import SeededStream, sample_exponential, sample_generating
from .generating import PointMass
from .sizes import SizeRequest, n_exact

__all__ = [
    "ExperimentConfig",
    "TrialReport",
    "SummaryTable",
    "violation_exact_gaussian_single",
    "violation_mc",
    "nearest_rank",
    "run_trial",
    "run_experiment",
    "summarize",
    "emit",
    "CSV_FIELDS",
]

CSV_FIELDS = ("eps_hat", "q95", "f_val", "feasibility_rate", "n", "N_exact", "N", "trials")
PROBLEMS = ("single-linear", "joint-linear", "quadratic-objective", "quadratic-constraint")


@dataclass
class TrialReport:
    violation: float
    objective: float
    n: int
    N: int
    status: str
    trial: int = 0


@dataclass
class SummaryTable:
    eps_hat: float
    q95: float
    f_val: float
    feasibility_rate: float
    n: int
    N_exact: int
    N: int
    trials: int
    failed: int = 0

    def to_dict(self):
        return asdict(self)


def _vec(value, size, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(size, float(arr))
    arr = arr.ravel()
    if arr.size != size:
        raise DomainError(f"{name} must have length {size}")
    return arr


@dataclass
class ExperimentConfig:
    """Fully resolved experiment: true law, problem data and pipeline settings."""

    problem_name: str
    pipeline: PipelineConfig
    n: int
    true_family: object
    true_param: np.ndarray
    trials: int = 100
    seed: int = 0
    violation_samples: int = 10000
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, cfg: dict) -> "ExperimentConfig":
        cfg = dict(cfg)
        name = str(cfg.get("problem", "single-linear")).lower().replace("_", "-")
        if name not in PROBLEMS:
            raise DomainError(f"unknown problem {name!r}; expected one of {PROBLEMS}")
        dist = str(cfg.get("distribution", "gaussian")).lower()
        d = int(cfg.get("d", 10))
        m = int(cfg.get("m", 3 if name in ("joint-linear", "quadratic-objective") else 10))
        n = int(cfg.get("n", 80))
        c = _vec(cfg.get("c", -1.0), d, "c")
        b_val = cfg.get("b", 5.0)
        if name == "single-linear":
            problem = SingleLinear(_vec(cfg.get("a", 5.0), d, "a"), float(b_val), c)
            k = d
        elif name in ("joint-linear", "quadratic-objective"):
            A = np.asarray(cfg.get("A", cfg.get("a", 5.0)), dtype=float)
            A = np.full((m, d), float(A)) if A.ndim == 0 else A.reshape(m, d)
            b = _vec(b_val, m, "b")
            if name == "joint-linear":
                problem = JointLinear(A, b, c)
            else:
                H = random_covariance(d, np.random.default_rng(int(cfg.get("h_seed", 2025))))
                problem = QuadraticObjective(A, b, c, H)
            k = m * d
        else:
            problem = QuadraticConstraint(_vec(cfg.get("a", 5.0), d, "a"), float(b_val), c, m)
            k = d
        if dist == "gaussian":
            sigma = random_covariance(k, np.random.default_rng(int(cfg.get("sigma_seed", 2024))),
                                      str(cfg.get("sigma_law", "normal")))
            base = GaussianFamily(sigma)
            family = ReplicatedGaussianFamily(base, m) if name == "quadratic-constraint" else base
            true_param = _vec(cfg.get("theta_true", 0.0), k, "theta_true")
        elif dist == "exponential":
            if name == "quadratic-constraint":
                raise DomainError("the quadratic-constraint family is Gaussian only")
            family = ExponentialFamily(k)
            true_param = _vec(cfg.get("rates", 1.0), k, "rates")
        else:
            raise DomainError(f"unknown distribution {dist!r}")
        pipe = PipelineConfig(
            epsilon=float(cfg.get("epsilon", 0.05)),
            alpha=float(cfg.get("alpha", 0.05)),
            beta=float(cfg.get("beta", 0.01)),
            problem=problem,
            family=family,
            rule=cfg.get("rule", "closed-form"),
            generator=cfg.get("generator", "pointmass"),
            method=cfg.get("method", "so"),
            set_form=cfg.get("set_form", "divergence"),
        )
        return cls(
            problem_name=name,
            pipeline=pipe,
            n=n,
            true_family=family,
            true_param=true_param,
            trials=int(cfg.get("trials", 100)),
            seed=int(cfg.get("seed", 0)),
            violation_samples=int(cfg.get("violation_samples", 10000)),
            raw=cfg,
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            cfg = json.loads(path.read_text())
        except OSError as exc:
            raise CCScenError(f"{path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(cfg, dict):
            raise DomainError(f"{path}: top-level JSON value must be an object")
        return cls.from_dict(cfg)

    def draw_true(self, count, stream):
        fam = self.true_family
        if isinstance(fam, ExponentialFamily):
            return sample_exponential(ExponentialFamilyRates(self.true_param), count, stream)
        return sample_generating(PointMass(self.true_param), fam, count, stream)


def violation_exact_gaussian_single(x, theta_true, family: GaussianFamily, a, b) -> float:
    """P((a + xi)' x > b) for xi ~ N(theta_true, Sigma)."""
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        return 0.0 if b >= 0 else 1.0
    sd = math.sqrt(float(x @ family.covariance @ x))
    margin = b - float(np.asarray(a) @ x) - float(np.asarray(theta_true) @ x)
    return float(1.0 - std_normal_cdf(margin / sd))


def violation_mc(x, problem, true_sampler, count: int = 10000, stream: SeededStream | None = None) -> float:
    """Fraction of ``count`` true draws whose safety condition fails at ``x``."""
    if count < 1:
        raise DomainError("count must be at least 1")
    stream = SeededStream(0, 0) if stream is None else stream
    rows = true_sampler(count, stream)
    return float(np.mean(problem.violated(np.asarray(x, dtype=float), rows)))


def nearest_rank(values, q: float = 0.95) -> float:
    """Nearest-rank percentile: the ceil(q T)-th smallest value."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return math.nan
    rank = max(1, math.ceil(q * v.size))
    return float(v[rank - 1])


def run_trial(exp: ExperimentConfig, index: int) -> TrialReport:
    """One trial on stream ``(seed, index)``: fresh data, pipeline, violation."""
    stream = SeededStream(exp.seed, index)
    data = exp.draw_true(exp.n, stream)
    try:
        sol, rep = run_pipeline(data, exp.pipeline, stream)
    except CCScenError as exc:
        return TrialReport(math.nan, math.nan, exp.n, 0, f"error: {exc}", index)
    if not sol.ok:
        return TrialReport(math.nan, math.nan, exp.n, rep.N, rep.status, index)
    prob = exp.pipeline.problem
    fam = exp.true_family
    if isinstance(prob, SingleLinear) and isinstance(fam, GaussianFamily):
        viol = violation_exact_gaussian_single(sol.x, exp.true_param, fam, prob.a, prob.b)
    else:
        viol = violation_mc(sol.x, prob, exp.draw_true, exp.violation_samples, stream.child(1))
    return TrialReport(viol, sol.objective_value, exp.n, rep.N, rep.status, index)


def summarize(reports, epsilon: float, n: int, n_exact_value: int) -> SummaryTable:
    good = [r for r in reports if r.status == "optimal"]
    failed = len(reports) - len(good)
    if not good:
        return SummaryTable(math.nan, math.nan, math.nan, 0.0, n, n_exact_value, 0, len(reports), failed)
    viol = np.array([r.violation for r in good])
    return SummaryTable(
        eps_hat=float(viol.mean()),
        q95=nearest_rank(viol, 0.95),
        f_val=float(np.mean([r.objective for r in good])),
        # Failed trials count as infeasible so failures cannot inflate the rate.
        feasibility_rate=float(np.sum(viol <= epsilon) / len(reports)),
        n=int(n),
        N_exact=int(n_exact_value),
        N=int(round(float(np.mean([r.N for r in good])))),
        trials=len(reports),
        failed=failed,
    )


def _trial_star(args):
    return run_trial(*args)


def run_experiment(exp: ExperimentConfig, trials: int | None = None, seed: int | None = None,
                   workers: int = 1, return_trials: bool = False):
    """Run ``trials`` independent trials and aggregate them in trial order."""
    if trials is not None:
        exp.trials = int(trials)
    if seed is not None:
        exp.seed = int(seed)
    if exp.trials < 1:
        raise DomainError("trials must be at least 1")
    jobs = [(exp, i) for i in range(exp.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_trial_star, jobs))
    else:
        reports = [run_trial(*j) for j in jobs]
    cfg = exp.pipeline
    direct = n_exact(SizeRequest(cfg.epsilon, cfg.beta, cfg.problem.decision_dim))
    table = summarize(reports, cfg.epsilon, exp.n, direct)
    return (table, reports) if return_trials else table


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.6g}"


def render(table: SummaryTable, fmt: str = "csv") -> str:
    fmt = fmt.lower()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        w.writerow([_fmt(getattr(table, k)) for k in CSV_FIELDS])
        return buf.getvalue()
    if fmt == "json":
        payload = {}
        for k, v in table.to_dict().items():
            payload[k] = int(v) if isinstance(v, (int, np.integer)) else float(_fmt(v))
        return json.dumps(payload, sort_keys=False) + "\n"
    raise DomainError(f"unknown format {fmt!r}")


def emit(table: SummaryTable, path, fmt: str = "csv") -> None:
    """Write ``table`` as CSV (header + one row) or JSON, 6 significant digits."""
    text = render(table, fmt)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise CCScenError(f"cannot write {path}: {exc.strerror}") from None

