import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ccscen.bench import ExperimentConfig
from ccscen.divergence import chi2_epsilon_prime
from ccscen.errors import DomainError, SizeError, ZeroToleranceError
from ccscen.models import GaussianFamily
from ccscen.numerics import chi2_quantile
from ccscen.pipeline import (
    Method,
    PipelineConfig,
    SingleLinear,
    extended_fast,
    extended_so,
    improved_generator_search,
    run_pipeline,
)
from ccscen.sampler import SeededStream
from ccscen.sizes import SizeRequest, n_exact


def _run(**kw):
    exp = ExperimentConfig.from_dict(kw)
    s = SeededStream(0, 0)
    return run_pipeline(exp.draw_true(exp.n, s), exp.pipeline, s)


@pytest.mark.parametrize(
    "eps,d,n,expected",
    [(0.1, 5, 50, 449), (0.1, 10, 80, 743), (0.1, 20, 200, 1016),
     (0.05, 5, 50, 1443), (0.05, 10, 80, 2394), (0.05, 20, 200, 3118)],
)
def test_single_linear_sizes(eps, d, n, expected):
    sol, rep = _run(problem="single-linear", d=d, n=n, epsilon=eps)
    assert rep.N == expected
    lam = chi2_quantile(0.95, d) / n
    assert_allclose(rep.delta_epsilon, chi2_epsilon_prime(eps, lam), rtol=1e-12)
    assert sol.ok


def test_beta_001_so_and_fast_sizes():
    _, so = _run(problem="single-linear", d=10, n=80, beta=0.001)
    _, fast = _run(problem="single-linear", d=10, n=80, beta=0.001, method="fast")
    assert (so.N, fast.N) == (2887, 1079)
    assert fast.n1 == 200 and fast.n2 == 879
    assert so.N_exact_direct == 447


def test_joint_sizes_use_stacked_dimension():
    _, so = _run(problem="joint-linear", d=10, m=5, n=200, beta=0.001)
    _, fast = _run(problem="quadratic-objective", d=10, m=5, n=200, beta=0.001, method="fast")
    assert (so.N, fast.N) == (3888, 1384)


def test_fast_solution_is_feasible_for_its_scenarios():
    sol, rep = _run(problem="joint-linear", d=4, m=2, n=60, method="fast")
    assert sol.ok and 0 <= rep.t_star <= 1
    assert rep.N == rep.n1 + rep.n2


def test_quadratic_constraint_pipeline():
    sol, rep = _run(problem="quadratic-constraint", d=4, m=4, n=100, method="fast")
    assert sol.ok
    assert np.all(sol.x >= -1e-9)


def test_exponential_pipeline():
    sol, rep = _run(problem="single-linear", distribution="exponential", d=4, n=60)
    assert sol.ok
    assert rep.generator == "pointmass"
    with pytest.raises(DomainError):
        _run(problem="single-linear", distribution="exponential", d=4, n=60, generator="sphere")


def test_improved_generator_never_worse():
    _, base = _run(problem="single-linear", d=5, n=30)
    _, imp = _run(problem="single-linear", d=5, n=30, generator="improved")
    assert imp.d_data <= base.d_data
    assert imp.N <= base.N
    assert imp.generator.startswith(("sphere", "gaussian", "blend"))


def test_improved_search_needs_gaussian():
    exp = ExperimentConfig.from_dict({"problem": "single-linear", "distribution": "exponential", "d": 3, "n": 30})
    with pytest.raises(DomainError):
        improved_generator_search(np.ones((30, 3)), exp.pipeline)


def test_report_serialization_and_determinism():
    s1, r1 = _run(problem="single-linear", d=5, n=50)
    s2, r2 = _run(problem="single-linear", d=5, n=50)
    assert r1.to_json() == r2.to_json()
    payload = json.loads(r1.to_json())
    assert payload["method"] == "so" and payload["rule"] == "closed-form"
    assert_allclose(payload["confidence"], 0.94)


def test_warns_when_data_suffice():
    _, rep = _run(problem="single-linear", d=2, n=200)
    assert rep.warnings and "N_exact" in rep.warnings[0]


def test_zero_tolerance_and_size_cap():
    # exponential Fisher set reaching rates <= 1/2 makes D_data infinite
    with pytest.raises(ZeroToleranceError):
        _run(problem="single-linear", distribution="exponential", d=2, n=2, set_form="fisher")
    fam = GaussianFamily.identity(10)
    cfg = PipelineConfig(0.001, 0.05, 0.01, SingleLinear(np.full(10, 5.0), 5.0, -np.ones(10)), fam,
                         max_scenarios=10_000)
    with pytest.raises(SizeError):
        extended_so(np.zeros((50, 10)), cfg)


def test_config_validation():
    fam = GaussianFamily.identity(3)
    prob = SingleLinear(np.ones(3), 1.0, -np.ones(3))
    with pytest.raises(DomainError):
        PipelineConfig(0.0, 0.05, 0.01, prob, fam)
    with pytest.raises(DomainError):
        PipelineConfig(0.05, 0.05, 0.01, prob, GaussianFamily.identity(4))
    assert PipelineConfig(0.05, 0.05, 0.01, prob, fam, method="fast").method is Method.EXTENDED_FAST
    with pytest.raises(DomainError):
        extended_fast(np.zeros((0, 3)), PipelineConfig(0.05, 0.05, 0.01, prob, fam))


def test_n_exact_direct_matches_sizes():
    _, rep = _run(problem="single-linear", d=10, n=80)
    assert rep.N_exact_direct == n_exact(SizeRequest(0.05, 0.01, 10)) == 371
