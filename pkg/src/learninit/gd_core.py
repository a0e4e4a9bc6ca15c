"""Projected gradient descent with a diminishing p/(q+k) step schedule."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalError


@dataclass(frozen=True)
class StepRule:
    p: float
    q: float

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise InputError(f"step rule needs p > 0 and q > 0, got p={self.p}, q={self.q}")


@dataclass(frozen=True)
class GdConfig:
    iter_max: int
    epsilon: float = 1e-6
    step_rule: StepRule = field(default_factory=lambda: StepRule(1.0, 1.0))
    record_trace: bool = False

    def __post_init__(self):
        if self.iter_max < 0 or self.epsilon < 0:
            raise InputError("iter_max and epsilon must be nonnegative")


@dataclass
class GdOutcome:
    theta_star: np.ndarray
    value_star: float
    iterations_used: int
    converged_by_gradient: bool
    trace: list[float] | None = None


def step_size(rule: StepRule, k: int) -> float:
    return rule.p / (rule.q + k)


def run_gd(family, instance, theta_in, config: GdConfig, subgradient_mode: bool = False) -> GdOutcome:
    """Run projected (sub)gradient descent on ``family`` for one instance.

    The gradient is evaluated once per iteration at the current iterate and
    reused for both the stopping test and the update. In subgradient mode the
    gradient-norm stop is disabled and only ``iter_max`` terminates the loop.
    """
    theta = np.array(theta_in, dtype=float)
    if theta.shape != (family.decision_dim,):
        raise InputError(
            f"theta_in has shape {theta.shape}, family {family.name} expects ({family.decision_dim},)"
        )
    trace = [] if config.record_trace else None
    converged = False
    k = 0
    while k < config.iter_max:
        grad = family.gradient(theta, instance)
        if not np.all(np.isfinite(grad)):
            raise NumericalError("non-finite gradient", index=k)
        if not subgradient_mode and np.linalg.norm(grad) < config.epsilon:
            converged = True
            break
        with np.errstate(over="ignore", invalid="ignore"):
            theta = family.project(theta - step_size(config.step_rule, k) * grad, instance)
        if not np.all(np.isfinite(theta)):
            raise NumericalError("non-finite iterate", index=k)
        k += 1
        if trace is not None:
            with np.errstate(over="ignore", invalid="ignore"):
                value = family.objective(theta, instance)
            if not np.isfinite(value):
                raise NumericalError("non-finite objective", index=k)
            trace.append(float(value))
    with np.errstate(over="ignore", invalid="ignore"):
        value_star = float(family.objective(theta, instance))
    if not np.isfinite(value_star):
        raise NumericalError("non-finite objective", index=k)
    return GdOutcome(theta, value_star, k, converged, trace)


def evaluate_curve(family, instance, theta_in, config: GdConfig, subgradient_mode: bool = False) -> list[float]:
    """Objective after each of iterations 1..iter_max, padded after an early stop."""
    cfg = GdConfig(config.iter_max, config.epsilon, config.step_rule, record_trace=True)
    out = run_gd(family, instance, theta_in, cfg, subgradient_mode)
    curve = list(out.trace)
    curve.extend([out.value_star] * (config.iter_max - len(curve)))
    return curve
