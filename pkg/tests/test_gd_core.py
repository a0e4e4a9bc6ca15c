import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from learninit.errors import InputError, NumericalError
from learninit.gd_core import GdConfig, StepRule, evaluate_curve, run_gd, step_size
from learninit.problems import AckleyFamily, ConvexPerturbFamily, Instance, QuadraticFamily, SumRateFamily


def shrink_factor(p, q, n):
    """|theta_n - c| / |theta_0 - c| for f = ||theta - c||^2 under step p/(q+k)."""
    out = 1.0
    for k in range(n):
        out *= 1.0 - 2.0 * p / (q + k)
    return abs(out)


class CountingFamily(QuadraticFamily):
    """Records every point handed to ``project`` and every point it returns."""

    def __init__(self, inner):
        self.inner = inner
        self.name = inner.name
        self.decision_dim = inner.decision_dim
        self.instance_dim = inner.instance_dim
        self.outputs = []

    def objective(self, theta, inst):
        return self.inner.objective(theta, inst)

    def gradient(self, theta, inst):
        return self.inner.gradient(theta, inst)

    def project(self, theta, inst=None):
        out = self.inner.project(theta, inst)
        self.outputs.append(out.copy())
        return out


class NanAfter(QuadraticFamily):
    def __init__(self, bad_from):
        super().__init__(dim=1)
        self.bad_from = bad_from
        self.calls = 0

    def gradient(self, theta, inst):
        self.calls += 1
        if self.calls > self.bad_from:
            return np.array([np.nan])
        return super().gradient(theta, inst)


@pytest.mark.parametrize("p,q,k,expected", [(1, 25, 0, 0.04), (1, 1, 0, 1.0), (0.25, 1, 3, 0.0625)])
def test_step_size_examples(p, q, k, expected):
    assert step_size(StepRule(p, q), k) == expected


def test_step_rule_rejects_nonpositive():
    with pytest.raises(InputError):
        StepRule(0.0, 1.0)
    with pytest.raises(InputError):
        StepRule(1.0, -1.0)


@given(st.floats(1e-3, 10), st.floats(1e-3, 100))
def test_step_size_strictly_decreasing(p, q):
    rule = StepRule(p, q)
    steps = [step_size(rule, k) for k in range(10_001)]
    assert all(s > 0 for s in steps)
    assert all(a > b for a, b in zip(steps, steps[1:]))


def test_quadratic_1d_matches_closed_form():
    fam = QuadraticFamily(dim=1)
    out = run_gd(fam, Instance(np.zeros(1)), np.array([1.0]), GdConfig(100, 1e-6, StepRule(0.25, 1.0)))
    # the 0.25/(1+k) schedule contracts like 1/sqrt(pi k): about 0.056 after 100 steps
    assert out.theta_star[0] == pytest.approx(shrink_factor(0.25, 1.0, 100), rel=1e-12)
    assert out.iterations_used == 100
    assert not out.converged_by_gradient


def test_zero_iterations_is_identity():
    fam = AckleyFamily()
    inst = Instance(np.array([22.0, 0.25, 1.0]))
    theta = np.array([0.3, -2.0])
    out = run_gd(fam, inst, theta, GdConfig(0))
    assert np.array_equal(out.theta_star, theta)
    assert out.value_star == fam.objective(theta, inst)
    assert out.iterations_used == 0


def test_ackley_global_minimum_converges_at_start():
    fam = AckleyFamily()
    out = run_gd(fam, Instance(np.array([20.0, 0.2, 0.0])), np.zeros(2), GdConfig(100))
    assert out.value_star == pytest.approx(0.0, abs=1e-15)
    assert out.converged_by_gradient
    assert out.iterations_used == 0


def test_subgradient_mode_ignores_gradient_stop():
    fam = QuadraticFamily(dim=1)
    inst = Instance(np.zeros(1))
    out = run_gd(fam, inst, np.zeros(1), GdConfig(7), subgradient_mode=True)
    assert out.iterations_used == 7
    assert not out.converged_by_gradient


def test_curve_on_stationary_start():
    fam = QuadraticFamily(dim=1)
    inst = Instance(np.array([0.4]))
    curve = evaluate_curve(fam, inst, np.array([0.4]), GdConfig(3))
    assert curve == [0.0, 0.0, 0.0]


def test_curve_first_entry_hand_iterated():
    fam = QuadraticFamily(dim=1)
    curve = evaluate_curve(fam, Instance(np.zeros(1)), np.array([1.0]), GdConfig(5, 1e-6, StepRule(0.25, 1.0)))
    # theta_1 = 1 - 0.25 * 2 * 1 = 0.5
    assert curve[0] == 0.25


@given(st.integers(0, 40), st.floats(-3, 3))
def test_curve_length_is_iter_max(n, start):
    fam = QuadraticFamily(dim=1)
    curve = evaluate_curve(fam, Instance(np.zeros(1)), np.array([start]), GdConfig(n, 1e-3, StepRule(0.25, 1.0)))
    assert len(curve) == n


@pytest.mark.parametrize("m", [1, 5, 50])
def test_convergence_oracle(m):
    rng = np.random.default_rng(m)
    fam = QuadraticFamily(dim=m)
    factor = shrink_factor(0.25, 1.0, 500)
    for _ in range(100):
        c = rng.uniform(-2, 2, size=m)
        theta0 = rng.uniform(-2, 2, size=m)
        out = run_gd(fam, Instance(c), theta0, GdConfig(500, 1e-6, StepRule(0.25, 1.0)))
        if out.converged_by_gradient:
            assert np.linalg.norm(out.theta_star - c) < 0.5e-6
        else:
            assert np.linalg.norm(out.theta_star - c) == pytest.approx(factor * np.linalg.norm(theta0 - c), rel=1e-9)


@pytest.mark.parametrize("family", [SumRateFamily(n_users=4), ConvexPerturbFamily(dim=6)], ids=["box", "halfspace"])
def test_every_iterate_feasible(family):
    rng = np.random.default_rng(1)
    for _ in range(20):
        inst = family.sample_instance(rng)
        fam = CountingFamily(family)
        theta0 = family.project(family.sample_init(rng), inst)
        out = run_gd(fam, inst, theta0, GdConfig(30, 0.0, StepRule(1.0, 1.0), record_trace=True),
                     subgradient_mode=not family.smooth)
        assert len(fam.outputs) == 30
        for theta in fam.outputs:
            assert np.allclose(family.project(theta, inst), theta, atol=1e-9, rtol=0)
        assert np.allclose(family.project(out.theta_star, inst), out.theta_star, atol=1e-9, rtol=0)


def test_outcome_invariants():
    fam = AckleyFamily()
    rng = np.random.default_rng(5)
    for _ in range(20):
        inst = fam.sample_instance(rng)
        out = run_gd(fam, inst, fam.sample_init(rng), GdConfig(50, 1e-6, fam.default_step_rule, record_trace=True))
        assert abs(out.value_star - fam.objective(out.theta_star, inst)) <= 1e-12
        assert len(out.trace) == out.iterations_used
        if out.trace:
            assert abs(out.trace[-1] - out.value_star) <= 1e-12


def test_deterministic():
    fam = AckleyFamily()
    inst = Instance(np.array([25.0, 0.22, 1.3]))
    cfg = GdConfig(60, 1e-6, fam.default_step_rule, record_trace=True)
    a = run_gd(fam, inst, np.array([3.0, -4.0]), cfg)
    b = run_gd(fam, inst, np.array([3.0, -4.0]), cfg)
    assert np.array_equal(a.theta_star, b.theta_star) and a.trace == b.trace


def test_dimension_mismatch():
    with pytest.raises(InputError):
        run_gd(AckleyFamily(), Instance(np.array([20.0, 0.2, 0.0])), np.zeros(3), GdConfig(5))


def test_nonfinite_gradient_reports_iteration():
    fam = NanAfter(bad_from=3)
    with pytest.raises(NumericalError) as err:
        run_gd(fam, Instance(np.array([5.0])), np.array([0.0]), GdConfig(10, 0.0, StepRule(0.1, 1.0)))
    assert err.value.index == 3
    assert "index 3" in str(err.value)


def test_overflowing_step_is_caught():
    fam = QuadraticFamily(dim=1)
    with pytest.raises(NumericalError):
        run_gd(fam, Instance(np.zeros(1)), np.array([1.0]), GdConfig(10, 0.0, StepRule(1e308, 1.0)))


def test_config_validation():
    with pytest.raises(InputError):
        GdConfig(-1)
    with pytest.raises(InputError):
        GdConfig(1, epsilon=-math.inf)
