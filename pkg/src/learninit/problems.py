"""Parametric problem families: objective, (sub)gradient, projection and samplers.

Every family is a minimization problem ``min_{theta in Theta} f(theta, x)``
where ``x`` is an :class:`Instance`. Families are immutable once built, so
evaluation methods are safe to call from several workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, InputError
from .gd_core import StepRule
from . import neural


@dataclass(frozen=True)
class Instance:
    x: np.ndarray
    label: float | None = None


@dataclass(frozen=True)
class AckleyParams:
    a: float
    b: float
    c: float


class ProblemFamily:
    """Base contract. Subclasses fill in the math."""

    name = "abstract"
    decision_dim: int
    instance_dim: int
    smooth = True
    default_step_rule = StepRule(1.0, 1.0)
    default_iters = 100

    def objective(self, theta, inst: Instance) -> float:
        raise NotImplementedError

    def gradient(self, theta, inst: Instance) -> np.ndarray:
        raise NotImplementedError

    def project(self, theta, inst: Instance | None = None) -> np.ndarray:
        return np.asarray(theta, dtype=float)

    def sample_instance(self, rng) -> Instance:
        raise NotImplementedError

    def sample_init(self, rng) -> np.ndarray:
        raise NotImplementedError

    # None means the family has no constraint to report on.
    constraint_check = None

    def features(self, inst: Instance) -> np.ndarray:
        return inst.x

    def describe(self) -> dict:
        return {"name": self.name}


# ---------------------------------------------------------------- Ackley

def ackley_value(pt, params: AckleyParams) -> float:
    u = pt[0] - params.c
    v = pt[1] - params.c
    r = math.hypot(u, v)
    return (
        -params.a * math.exp(-params.b * r / 2.0)
        - math.exp((math.cos(2 * math.pi * u) + math.cos(2 * math.pi * v)) / 2.0)
        + math.e
        + params.a
    )


def ackley_gradient(pt, params: AckleyParams) -> np.ndarray:
    u = pt[0] - params.c
    v = pt[1] - params.c
    r = math.hypot(u, v)
    if r == 0.0:
        return np.zeros(2)
    radial = params.a * params.b / 2.0 * math.exp(-params.b * r / 2.0) / r
    wave = math.pi * math.exp((math.cos(2 * math.pi * u) + math.cos(2 * math.pi * v)) / 2.0)
    return np.array([
        radial * u + wave * math.sin(2 * math.pi * u),
        radial * v + wave * math.sin(2 * math.pi * v),
    ])


class AckleyFamily(ProblemFamily):
    """2-D Ackley functions with random (a, b, c); unconstrained."""

    name = "ackley"
    decision_dim = 2
    instance_dim = 3
    default_step_rule = StepRule(0.25, 1.0)
    default_iters = 100

    def __init__(self, init_low: float = -5.0, init_high: float = 5.0):
        self.init_low = init_low
        self.init_high = init_high

    @staticmethod
    def params(inst: Instance) -> AckleyParams:
        return AckleyParams(*map(float, inst.x))

    def objective(self, theta, inst):
        return ackley_value(theta, self.params(inst))

    def gradient(self, theta, inst):
        return ackley_gradient(theta, self.params(inst))

    def sample_instance(self, rng):
        a = 20.0 + rng.uniform(0.0, 10.0)
        b = 0.2 + rng.uniform(0.0, 0.1)
        c = rng.uniform(0.0, 2.0)
        return Instance(np.array([a, b, c]))

    def sample_init(self, rng):
        return rng.uniform(self.init_low, self.init_high, size=2)

    def describe(self):
        return {"name": self.name, "init_low": self.init_low, "init_high": self.init_high}


# ---------------------------------------------------------------- sum-rate

def sum_rate(theta, channel) -> float:
    """Sum over users of log(1 + SINR); channel[i][j] is sender i -> receiver j."""
    h = np.asarray(channel, dtype=float)
    theta = np.asarray(theta, dtype=float)
    total = 1.0 + h.T @ theta
    signal = np.diag(h) * theta
    return float(np.sum(np.log(total) - np.log(total - signal)))


def sum_rate_gradient(theta, channel) -> np.ndarray:
    h = np.asarray(channel, dtype=float)
    theta = np.asarray(theta, dtype=float)
    total = 1.0 + h.T @ theta
    interf = total - np.diag(h) * theta
    return h @ (1.0 / total - 1.0 / interf) + np.diag(h) / interf


def project_box(theta, low: float = 0.0, high: float = 1.0) -> np.ndarray:
    return np.clip(np.asarray(theta, dtype=float), low, high)


class SumRateFamily(ProblemFamily):
    """Power control on an N-user interference channel, written as minimization of -sum-rate."""

    name = "sumrate"
    default_step_rule = StepRule(1.0, 1.0)
    default_iters = 100

    def __init__(self, n_users: int = 15, channel_max: float = 10.0):
        if n_users < 1 or channel_max <= 0:
            raise ConfigError("sum-rate needs n_users >= 1 and channel_max > 0")
        self.n_users = int(n_users)
        self.channel_max = float(channel_max)
        self.decision_dim = self.n_users
        self.instance_dim = self.n_users**2

    def channel(self, inst: Instance) -> np.ndarray:
        return inst.x.reshape(self.n_users, self.n_users)

    def objective(self, theta, inst):
        return -sum_rate(theta, self.channel(inst))

    def gradient(self, theta, inst):
        return -sum_rate_gradient(theta, self.channel(inst))

    def project(self, theta, inst=None):
        return project_box(theta)

    def sample_instance(self, rng):
        return Instance(rng.uniform(0.0, self.channel_max, size=self.instance_dim))

    def sample_init(self, rng):
        return rng.uniform(0.0, 1.0, size=self.n_users)

    def describe(self):
        return {"name": self.name, "n_users": self.n_users, "channel_max": self.channel_max}


# ---------------------------------------------------------------- convex perturbation

def convex_perturb_objective(theta, beta: float = 1.0) -> float:
    theta = np.asarray(theta, dtype=float)
    return float(theta @ theta + beta * np.sum(np.abs(theta)))


def convex_perturb_subgradient(theta, beta: float = 1.0) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return 2.0 * theta + beta * np.sign(theta)


def project_halfspace(theta, a, x, y) -> np.ndarray:
    """Euclidean projection onto {theta : y * a.(x + theta) <= 0}."""
    a = np.asarray(a, dtype=float)
    theta = np.asarray(theta, dtype=float)
    norm2 = float(a @ a)
    if norm2 == 0.0:
        raise InputError("classifier vector a is zero")
    viol = y * float(a @ (np.asarray(x, dtype=float) + theta))
    if viol <= 0.0:
        return theta
    return theta - (viol / norm2) * y * a


def convex_perturb_optimum(a, x, y, beta: float = 1.0) -> np.ndarray:
    """Exact minimizer of ||theta||^2 + beta ||theta||_1 over {y a.(x + theta) <= 0}.

    KKT: theta_i = -sign(w_i) max(0, lam |w_i| - beta) / 2 with w = y a, where
    the multiplier lam >= 0 makes the constraint tight (or theta = 0 if x is
    already feasible).
    """
    w = y * np.asarray(a, dtype=float)
    s = float(w @ np.asarray(x, dtype=float))
    if s <= 0.0:
        return np.zeros_like(w)
    aw = np.abs(w)

    def slack(lam):
        return float(aw @ np.maximum(0.0, lam * aw - beta)) / 2.0 - s

    hi = (beta + 1.0) / aw.max()
    while slack(hi) < 0:
        hi *= 2.0
    lam = brentq(slack, beta / aw.max(), hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return -np.sign(w) * np.maximum(0.0, lam * aw - beta) / 2.0


class ConvexPerturbFamily(ProblemFamily):
    """Smallest ||.||^2 + beta*||.||_1 perturbation flipping a fixed linear classifier a.x."""

    name = "convex"
    smooth = False
    default_step_rule = StepRule(1.0, 25.0)
    default_iters = 10

    def __init__(self, dim: int = 75, beta: float = 1.0, classifier_seed: int = 0):
        if dim < 1:
            raise ConfigError("dim must be >= 1")
        self.decision_dim = self.instance_dim = int(dim)
        self.beta = float(beta)
        self.classifier_seed = int(classifier_seed)
        self.a = np.random.default_rng(classifier_seed).standard_normal(self.decision_dim)

    def objective(self, theta, inst):
        return convex_perturb_objective(theta, self.beta)

    def gradient(self, theta, inst):
        return convex_perturb_subgradient(theta, self.beta)

    def project(self, theta, inst=None):
        if inst is None:
            return np.asarray(theta, dtype=float)
        return project_halfspace(theta, self.a, inst.x, inst.label)

    def sample_instance(self, rng):
        x = rng.standard_normal(self.instance_dim)
        y = 1.0 if self.a @ x >= 0 else -1.0
        return Instance(x, y)

    def sample_init(self, rng):
        return rng.uniform(0.0, 1.0, size=self.decision_dim)

    def constraint_check(self, theta, inst, tol: float = 1e-9) -> bool:
        return inst.label * float(self.a @ (inst.x + theta)) <= tol

    def optimum(self, inst) -> np.ndarray:
        return convex_perturb_optimum(self.a, inst.x, inst.label, self.beta)

    def describe(self):
        return {"name": self.name, "dim": self.decision_dim, "beta": self.beta,
                "classifier_seed": self.classifier_seed}


# ---------------------------------------------------------------- toy adversarial

def toy_adv_objective(theta, x, y, classifier: neural.MlpModel, margin: float = 0.2,
                      penalty: float = 10.0) -> float:
    theta = np.asarray(theta, dtype=float)
    score = float(neural.forward(classifier, x + theta)[0])
    return float(np.linalg.norm(theta)) + penalty * max(0.0, margin + y * score)


class ToyAdvFamily(ProblemFamily):
    """Penalized adversarial perturbation against a small MLP trained on Gaussian blobs.

    The classifier is trained at construction from ``seed``, so rebuilding the
    family from its description reproduces it exactly.
    """

    name = "toyadv"
    default_step_rule = StepRule(1.0, 5.0)
    default_iters = 100

    def __init__(self, dim: int = 2, margin: float = 0.2, penalty: float = 10.0,
                 blob_center: float = 1.0, blob_std: float = 0.5, n_points: int = 1000,
                 hidden: tuple[int, ...] = (16,), seed: int = 0, epochs: int = 50):
        if margin <= 0 or penalty <= 0:
            raise ConfigError("margin and penalty must be positive")
        self.decision_dim = self.instance_dim = int(dim)
        self.margin = float(margin)
        self.penalty = float(penalty)
        self.blob_center = float(blob_center)
        self.blob_std = float(blob_std)
        self.n_points = int(n_points)
        self.hidden = tuple(hidden)
        self.seed = int(seed)
        self.epochs = int(epochs)
        rng = np.random.default_rng(seed)
        points, labels = neural.make_blobs(n_points, rng, dim, blob_center, blob_std)
        spec = neural.MlpSpec(dim, 1, self.hidden, seed)
        cfg = neural.TrainConfig(learning_rate=1e-2, epochs=epochs, batch_size=32, seed=seed)
        self.classifier, _, self.classifier_accuracy = neural.train_classifier(points, labels, spec, cfg)
        # fixed tiny offset used in place of theta = 0, where theta/||theta|| is undefined
        self._zero_guard = np.random.default_rng(12345).uniform(-1e-6, 1e-6, size=dim)

    def score(self, point) -> float:
        return float(neural.forward(self.classifier, point)[0])

    def objective(self, theta, inst):
        return toy_adv_objective(theta, inst.x, inst.label, self.classifier, self.margin, self.penalty)

    def gradient(self, theta, inst):
        theta = np.asarray(theta, dtype=float)
        nrm = np.linalg.norm(theta)
        if nrm == 0.0:
            theta = theta + self._zero_guard
            nrm = np.linalg.norm(theta)
        grad = theta / nrm
        point = inst.x + theta
        if self.margin + inst.label * self.score(point) > 0.0:
            grad = grad + self.penalty * inst.label * neural.input_gradient(self.classifier, point)
        return grad

    def sample_instance(self, rng):
        cls = 1.0 if rng.uniform() < 0.5 else -1.0
        x = cls * self.blob_center + self.blob_std * rng.standard_normal(self.instance_dim)
        y = 1.0 if self.score(x) > 0 else -1.0
        return Instance(x, y)

    def sample_init(self, rng):
        return rng.uniform(0.0, 1.0, size=self.decision_dim)

    def constraint_check(self, theta, inst, tol: float = 0.0) -> bool:
        return inst.label * self.score(inst.x + theta) <= tol

    def describe(self):
        return {"name": self.name, "dim": self.decision_dim, "margin": self.margin,
                "penalty": self.penalty, "blob_center": self.blob_center, "blob_std": self.blob_std,
                "n_points": self.n_points, "hidden": list(self.hidden), "seed": self.seed,
                "epochs": self.epochs}


class QuadraticFamily(ProblemFamily):
    """f(theta, x) = ||theta - x||^2 on R^m (or a box); a reference family for tests and MAML checks."""

    name = "quadratic"

    def __init__(self, dim: int = 1, low: float = 0.0, high: float = 1.0, box: bool = False):
        self.decision_dim = self.instance_dim = int(dim)
        self.low, self.high, self.box = float(low), float(high), bool(box)

    def objective(self, theta, inst):
        d = np.asarray(theta, dtype=float) - inst.x
        return float(d @ d)

    def gradient(self, theta, inst):
        return 2.0 * (np.asarray(theta, dtype=float) - inst.x)

    def project(self, theta, inst=None):
        if self.box:
            return project_box(theta, self.low, self.high)
        return np.asarray(theta, dtype=float)

    def sample_instance(self, rng):
        return Instance(rng.uniform(self.low, self.high, size=self.instance_dim))

    def sample_init(self, rng):
        return rng.uniform(self.low, self.high, size=self.decision_dim)

    def describe(self):
        return {"name": self.name, "dim": self.decision_dim, "low": self.low,
                "high": self.high, "box": self.box}


FAMILIES = {
    "ackley": AckleyFamily,
    "sumrate": SumRateFamily,
    "convex": ConvexPerturbFamily,
    "toyadv": ToyAdvFamily,
    "quadratic": QuadraticFamily,
}


def make_family(name: str, **params) -> ProblemFamily:
    try:
        cls = FAMILIES[name]
    except KeyError:
        raise ConfigError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for family {name!r}: {exc}") from None


def family_from_description(desc: dict) -> ProblemFamily:
    desc = dict(desc)
    return make_family(desc.pop("name"), **desc)
