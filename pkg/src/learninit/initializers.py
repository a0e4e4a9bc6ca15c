"""Initialization strategies for gradient descent and the data collection behind them.

Baselines (zero, random, multi-start), a first-order MAML start point, and
three learned strategies: value-screening of random candidates (Val-Init),
solution-argument regression (Arg-Init) and the pairwise Bernoulli selector
(Vanilla).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import neural
from .errors import ConfigError, InputError, NumericalError
from .gd_core import GdConfig, run_gd

KINDS = ("zero", "random", "multistart", "maml", "valinit", "arginit", "vanilla")


@dataclass
class Phase1Record:
    instance: object
    init: np.ndarray
    solution_arg: np.ndarray
    solution_val: float


@dataclass
class PairedRecord:
    instance: object
    init0: np.ndarray
    init1: np.ndarray
    val0: float
    val1: float


def _solve(family, inst, theta, gd_config, index):
    try:
        return run_gd(family, inst, theta, gd_config, subgradient_mode=not family.smooth)
    except NumericalError as exc:
        raise NumericalError(f"phase-1 record {index}: {exc}", index=index) from exc


def collect_phase1(family, n: int, gd_config: GdConfig, rng) -> list[Phase1Record]:
    """Solve ``n`` fresh instances, each from one random (projected) start."""
    if n < 1:
        raise InputError("phase-1 size must be >= 1")
    records = []
    for i in range(n):
        inst = family.sample_instance(rng)
        theta0 = family.project(family.sample_init(rng), inst)
        out = _solve(family, inst, theta0, gd_config, i)
        records.append(Phase1Record(inst, theta0, out.theta_star, out.value_star))
    return records


def collect_paired_phase1(family, n: int, gd_config: GdConfig, rng) -> list[PairedRecord]:
    """Like :func:`collect_phase1` but solves every instance from two independent starts."""
    if n < 1:
        raise InputError("phase-1 size must be >= 1")
    records = []
    for i in range(n):
        inst = family.sample_instance(rng)
        t0 = family.project(family.sample_init(rng), inst)
        t1 = family.project(family.sample_init(rng), inst)
        y0 = _solve(family, inst, t0, gd_config, i).value_star
        y1 = _solve(family, inst, t1, gd_config, i).value_star
        records.append(PairedRecord(inst, t0, t1, y0, y1))
    return records


# ---------------------------------------------------------------- learned models

@dataclass
class ScaledModel:
    """An MLP fitted on standardized inputs and targets; ``predict`` works in original units."""

    model: neural.MlpModel
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: np.ndarray
    y_std: np.ndarray
    history: neural.TrainHistory = field(default_factory=neural.TrainHistory)

    def predict(self, inputs) -> np.ndarray:
        x = (np.asarray(inputs, dtype=float) - self.x_mean) / self.x_std
        return neural.forward(self.model, x) * self.y_std + self.y_mean

    def save(self, path, extra=None):
        meta = {"x_mean": self.x_mean.tolist(), "x_std": self.x_std.tolist(),
                "y_mean": self.y_mean.tolist(), "y_std": self.y_std.tolist(),
                "train_mse": self.history.train_mse, "val_mse": self.history.val_mse}
        meta.update(extra or {})
        neural.save_model(self.model, path, meta)

    @classmethod
    def load(cls, path):
        model, meta = neural.load_model(path)
        hist = neural.TrainHistory(meta.get("train_mse", []), meta.get("val_mse", []))
        return cls(model, np.array(meta["x_mean"]), np.array(meta["x_std"]),
                   np.array(meta["y_mean"]), np.array(meta["y_std"]), hist)


def _std(a):
    s = a.std(axis=0)
    return np.where(s < 1e-12, 1.0, s)


def fit_scaled(inputs, targets, hidden=(200, 200), seed: int = 0,
               train_config: neural.TrainConfig | None = None) -> ScaledModel:
    x = np.asarray(inputs, dtype=float)
    y = np.asarray(targets, dtype=float).reshape(x.shape[0], -1)
    if x.shape[0] < 2:
        raise InputError("need at least 2 records to train")
    cfg = train_config or neural.TrainConfig(seed=seed)
    # one shared target scale: per-dimension scaling would blow up near-constant outputs
    xm, xs, ym = x.mean(axis=0), _std(x), y.mean(axis=0)
    ys = np.full(y.shape[1], float(_std((y - ym).reshape(-1, 1))[0]))
    model = neural.init_model(neural.MlpSpec(x.shape[1], y.shape[1], tuple(hidden), seed))
    model, history = neural.train(model, (x - xm) / xs, (y - ym) / ys, cfg)
    return ScaledModel(model, xm, xs, ym, ys, history)


def value_inputs(family, records) -> np.ndarray:
    return np.array([np.concatenate([r.init, family.features(r.instance)]) for r in records])


def paired_inputs(family, records) -> np.ndarray:
    return np.array([np.concatenate([r.init0, r.init1, family.features(r.instance)]) for r in records])


def train_val_init(family, records, hidden=(200, 200), seed=0, train_config=None) -> ScaledModel:
    """Regress the solution value on (init, instance)."""
    x = value_inputs(family, records)
    assert x.shape[1] == family.decision_dim + family.instance_dim
    return fit_scaled(x, [r.solution_val for r in records], hidden, seed, train_config)


def train_arg_init(family, records, hidden=(200, 200), seed=0, train_config=None) -> ScaledModel:
    """Regress the solution argument on (init, instance)."""
    x = value_inputs(family, records)
    h = fit_scaled(x, np.array([r.solution_arg for r in records]), hidden, seed, train_config)
    assert h.model.spec.output_dim == family.decision_dim
    return h


def train_vanilla(family, paired, hidden=(200, 200), seed=0, train_config=None) -> ScaledModel:
    """Regress val1 - val0 on (init0, init1, instance)."""
    x = paired_inputs(family, paired)
    assert x.shape[1] == 2 * family.decision_dim + family.instance_dim
    return fit_scaled(x, [r.val1 - r.val0 for r in paired], hidden, seed, train_config)


def maml_train(family, outer_iters: int, batch: int = 32, alpha: float = 0.01,
               beta: float | None = None, rng=None, theta0=None) -> np.ndarray:
    """First-order MAML start point.

    Each outer step samples ``batch`` instances, takes one projected inner
    step per instance, then moves theta along the sum of gradients evaluated
    at the adapted points. The outer projection uses the family's
    instance-free feasible set.
    """
    if batch < 1:
        raise InputError("MAML batch size must be >= 1")
    if beta is None:
        beta = 0.01 / batch
    rng = rng if rng is not None else np.random.default_rng(0)
    theta = np.array(family.project(family.sample_init(rng)) if theta0 is None else theta0, dtype=float)
    for it in range(outer_iters):
        total = np.zeros_like(theta)
        for _ in range(batch):
            inst = family.sample_instance(rng)
            adapted = family.project(theta - alpha * family.gradient(theta, inst), inst)
            total += family.gradient(adapted, inst)
        theta = family.project(theta - beta * total)
        if not np.all(np.isfinite(theta)):
            raise NumericalError("MAML iterate became non-finite", index=it)
    return theta


# ---------------------------------------------------------------- proposals

@dataclass
class Initializer:
    kind: str
    M: int = 2
    theta_maml: np.ndarray | None = None
    model: ScaledModel | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown initializer {self.kind!r}")
        if self.M < 1:
            raise ConfigError("M must be >= 1")

    @property
    def label(self) -> str:
        return {"zero": "Zero", "random": "Random", "multistart": f"MultiStart({self.M})",
                "maml": "MAML", "valinit": "Val-Init", "arginit": "Arg-Init",
                "vanilla": "Vanilla"}[self.kind]


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


def candidate_pool(family, inst, rng, size: int) -> list[np.ndarray]:
    return [family.project(family.sample_init(rng), inst) for _ in range(size)]


def select_by_value(scores) -> int:
    """Index of the smallest score, lowest index on ties."""
    return int(np.argmin(np.asarray(scores, dtype=float)))


def propose(init: Initializer, family, inst, rng, candidates=None):
    """Starting point(s) for gradient descent on ``inst``.

    ``candidates`` optionally supplies the random draws (already projected)
    that the random-based strategies would otherwise sample from ``rng``; the
    harness passes one shared pool so every method sees the same draws.
    MultiStart returns a list of M starts; every other kind returns one.
    """
    def draws(k):
        if candidates is not None:
            if len(candidates) < k:
                raise InputError(f"need {k} candidates, got {len(candidates)}")
            return list(candidates[:k])
        return candidate_pool(family, inst, rng, k)

    kind = init.kind
    if kind in ("valinit", "arginit", "vanilla") and init.model is None:
        raise ConfigError(f"{init.label} needs a trained model")
    if kind == "maml" and init.theta_maml is None:
        raise ConfigError("MAML needs a trained start point")

    if kind == "zero":
        noise = rng.uniform(-1e-6, 1e-6, size=family.decision_dim)
        return family.project(noise, inst)
    if kind == "random":
        return draws(1)[0]
    if kind == "multistart":
        return draws(init.M)
    if kind == "maml":
        return family.project(init.theta_maml, inst)
    feats = family.features(inst)
    if kind == "valinit":
        cands = draws(init.M)
        scores = init.model.predict(np.array([np.concatenate([c, feats]) for c in cands])).reshape(-1)
        return cands[select_by_value(scores)]
    if kind == "arginit":
        theta0 = draws(1)[0]
        return family.project(init.model.predict(np.concatenate([theta0, feats])), inst)
    # vanilla
    t0, t1 = draws(2)
    psi = float(init.model.predict(np.concatenate([t0, t1, feats]))[0])
    return t0 if rng.uniform() < float(sigmoid(psi)) else t1


def valinit_scores(init: Initializer, family, inst, cands) -> np.ndarray:
    feats = family.features(inst)
    return init.model.predict(np.array([np.concatenate([c, feats]) for c in cands])).reshape(-1)
