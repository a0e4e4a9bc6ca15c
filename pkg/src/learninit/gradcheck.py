"""Central finite-difference checks for every family gradient and for MLP backprop."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import neural
from .problems import AckleyFamily, ConvexPerturbFamily, QuadraticFamily, SumRateFamily, ToyAdvFamily

FAMILY_TOL = 1e-4
BACKPROP_TOL = 1e-5


@dataclass
class GradReport:
    suite: str
    cases: int
    max_rel_err: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tol


def rel_err(a, b) -> float:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-8)
    return float(np.linalg.norm(a - b) / scale)


def fd_gradient(f, x, h: float = 1e-6) -> np.ndarray:
    x = np.array(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        g.flat[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def check_family(family, cases: int, rng, point=None) -> float:
    """Largest relative error between ``family.gradient`` and central differences."""
    worst = 0.0
    for _ in range(cases):
        inst = family.sample_instance(rng)
        theta = family.sample_init(rng) if point is None else point(rng)
        g = family.gradient(theta, inst)
        fd = fd_gradient(lambda t: family.objective(t, inst), theta)
        worst = max(worst, rel_err(g, fd))
    return worst


def check_backprop(cases: int, rng) -> float:
    worst = 0.0
    for c in range(cases):
        spec = neural.MlpSpec(int(rng.integers(1, 5)), int(rng.integers(1, 4)),
                              tuple(int(h) for h in rng.integers(2, 7, size=rng.integers(1, 3))), seed=c)
        model = neural.init_model(spec)
        for b in model.biases:
            b += 0.1 * rng.standard_normal(b.shape)
        x = rng.standard_normal((5, spec.input_dim))
        y = rng.standard_normal((5, spec.output_dim))
        grads, _ = neural.backward(model, x, y)
        for p, g in zip(model.params(), grads):
            def loss(v, p=p):
                old = p.copy()
                p[...] = v
                out = float(np.sum((neural.forward(model, x) - y) ** 2) / x.shape[0])
                p[...] = old
                return out
            worst = max(worst, rel_err(g, fd_gradient(loss, p.copy())))
        w = rng.standard_normal(spec.output_dim)
        gi = neural.input_gradient(model, x[0], w)
        worst = max(worst, rel_err(gi, fd_gradient(lambda v: float(neural.forward(model, v) @ w), x[0])))
    return worst


def run_all(seed: int = 0, cases: int = 20) -> list[GradReport]:
    rng = np.random.default_rng(seed)
    toy = ToyAdvFamily()
    suites = [
        ("ackley", AckleyFamily(), None),
        ("sumrate", SumRateFamily(), None),
        # keep away from the |theta_i| kinks
        ("convex", ConvexPerturbFamily(dim=10),
         lambda r: r.choice([-1.0, 1.0], 10) * r.uniform(0.1, 2.0, 10)),
        ("toyadv", toy, lambda r: r.uniform(-1.0, 1.0, 2)),
        ("quadratic", QuadraticFamily(dim=3), None),
    ]
    out = [GradReport(name, cases, check_family(fam, cases, rng, point), FAMILY_TOL)
           for name, fam, point in suites]
    out.append(GradReport("mlp-backprop", cases, check_backprop(cases, rng), BACKPROP_TOL))
    return out
