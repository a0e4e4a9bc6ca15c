"""Checks of the selection-initializer guarantees on constructs where the answer is computable.

Discrete landscapes give every quantity by exhaustive enumeration (exact
rational arithmetic). The noisy-predictor and argument-regression checks
are Monte-Carlo with 3-standard-error bands. Every checker tests its own
preconditions first and reports a violation instead of asserting the
conclusion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigError, InputError


class UndefinedCorrelation(InputError):
    pass


def pearson(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1 or u.size < 2:
        raise InputError("pearson needs two equal-length samples of size >= 2")
    du = u - u.mean()
    dv = v - v.mean()
    su = math.sqrt(float(du @ du))
    sv = math.sqrt(float(dv @ dv))
    if su == 0.0 or sv == 0.0:
        raise UndefinedCorrelation("zero variance: correlation undefined")
    return float(np.clip((du @ dv) / (su * sv), -1.0, 1.0))


def pearson_ci(r: float, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Fisher-z interval for a sample correlation."""
    from scipy.stats import norm

    if n <= 3:
        return (-1.0, 1.0)
    z = math.atanh(min(max(r, -1 + 1e-15), 1 - 1e-15))
    half = norm.ppf(0.5 + confidence / 2) / math.sqrt(n - 3)
    return (math.tanh(z - half), math.tanh(z + half))


# ---------------------------------------------------------------- discrete landscapes

@dataclass
class DiscreteLandscape:
    """A finite init grid partitioned into basins, each basin reaching one value."""

    values: np.ndarray
    basin_map: np.ndarray
    init_weights: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.basin_map = np.asarray(self.basin_map, dtype=int)
        self.init_weights = np.asarray(self.init_weights, dtype=float)
        if len(np.unique(self.values)) != len(self.values):
            raise InputError("landscape values must be distinct")
        if self.basin_map.shape != self.init_weights.shape:
            raise InputError("basin_map and init_weights must have one entry per init")
        if self.basin_map.min() < 0 or self.basin_map.max() >= len(self.values):
            raise InputError("basin_map refers to a missing value")
        if np.any(self.init_weights < 0) or not math.isclose(self.init_weights.sum(), 1.0, abs_tol=1e-12):
            raise InputError("init_weights must be a probability vector")

    @property
    def n_inits(self) -> int:
        return len(self.basin_map)

    @property
    def init_values(self) -> np.ndarray:
        return self.values[self.basin_map]

    @property
    def delta(self) -> float:
        if len(self.values) < 2:
            return math.inf
        s = np.sort(self.values)
        return float(np.min(np.diff(s)))

    @property
    def f_sup(self) -> float:
        return float(self.values.max())

    @classmethod
    def random(cls, rng, n_values: int = 4, n_inits: int = 8, min_gap: float = 0.5,
               low: float = 0.0) -> "DiscreteLandscape":
        """Values low + cumulative gaps (each >= min_gap), every basin non-empty, random weights."""
        if n_inits < n_values:
            raise InputError("need at least one init per basin")
        values = low + np.cumsum(min_gap + rng.exponential(1.0, size=n_values)) - min_gap
        rng.shuffle(values)
        basin = np.concatenate([np.arange(n_values), rng.integers(0, n_values, n_inits - n_values)])
        rng.shuffle(basin)
        w = rng.dirichlet(np.ones(n_inits))
        return cls(values, basin, w)


@dataclass
class OrderingModel:
    """Selector: ``p[i, j]`` is the probability of keeping init i (Z = 0) when offered (i, j)."""

    p: np.ndarray
    gamma: float | None = None

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        if np.any(self.p < 0) or np.any(self.p > 1):
            raise InputError("selection probabilities must lie in [0, 1]")

    @classmethod
    def constant(cls, land: DiscreteLandscape, c: float = 0.5):
        return cls(np.full((land.n_inits, land.n_inits), c))

    @classmethod
    def oracle(cls, land: DiscreteLandscape, gamma: float = 1.0):
        """p = gamma when init i is strictly better, 1 - gamma when worse, 1/2 on ties."""
        if not 0.5 < gamma <= 1.0:
            raise InputError(f"gamma must lie in (1/2, 1], got {gamma}")
        y = land.init_values
        p = np.where(y[:, None] < y[None, :], gamma, np.where(y[:, None] > y[None, :], 1 - gamma, 0.5))
        return cls(p, gamma)

    @classmethod
    def inverted(cls, land: DiscreteLandscape):
        return cls(1.0 - cls.oracle(land, 1.0).p)

    @classmethod
    def random(cls, land: DiscreteLandscape, rng):
        return cls(rng.uniform(size=(land.n_inits, land.n_inits)))


def _frac(a):
    return [Fraction(float(v)) for v in np.asarray(a).reshape(-1)]


def _pair_sums(land, ordering):
    """Exact pair enumeration: returns (A, E_tilde, E_hat, E_min, E_max) as Fractions."""
    w = _frac(land.init_weights)
    total = sum(w, Fraction(0))
    w = [wi / total for wi in w]  # float weights rarely sum to exactly one
    y = _frac(land.init_values)
    p = [_frac(row) for row in ordering.p]
    half = Fraction(1, 2)
    a = e_t = e_min = e_max = Fraction(0)
    n = land.n_inits
    for i in range(n):
        for j in range(n):
            wij = w[i] * w[j]
            a += wij * (p[i][j] - half) * (y[i] - y[j])
            e_t += wij * (p[i][j] * y[i] + (1 - p[i][j]) * y[j])
            e_min += wij * min(y[i], y[j])
            e_max += wij * max(y[i], y[j])
    e_hat = sum((wi * yi for wi, yi in zip(w, y)), Fraction(0))
    return a, e_t, e_hat, e_min, e_max


def check_prop1(land: DiscreteLandscape, ordering: OrderingModel) -> dict:
    """Expected-ordering quantity below zero iff the selector beats a single random start."""
    a, e_t, e_hat, _, _ = _pair_sums(land, ordering)
    assumption = a < 0
    conclusion = e_t < e_hat
    return {
        "checker": "prop1",
        "assumption_quantity": float(a),
        "e_tilde": float(e_t),
        "e_hat": float(e_hat),
        "assumption_holds": assumption,
        "conclusion_holds": conclusion,
        "identity_exact": (e_t - e_hat) == a,
        "verdict": "confirmed" if assumption == conclusion else "contradicted",
    }


def check_prop2(land: DiscreteLandscape, gamma: float) -> dict:
    """Sandwich E[min] <= E[selected] <= gamma E[min] + (1 - gamma) E[max] for a gamma-ordering selector."""
    ordering = OrderingModel.oracle(land, gamma)
    _, e_t, _, e_min, e_max = _pair_sums(land, ordering)
    g = Fraction(float(gamma))
    upper = g * e_min + (1 - g) * e_max
    ok = e_min <= e_t <= upper
    return {
        "checker": "prop2",
        "gamma": gamma,
        "e_min": float(e_min),
        "e_max": float(e_max),
        "e_tilde": float(e_t),
        "upper_bound": float(upper),
        "tight_at_gamma_one": (e_t == e_min) if gamma == 1.0 else None,
        "verdict": "confirmed" if ok else "contradicted",
    }


def monte_carlo_selection(land: DiscreteLandscape, ordering: OrderingModel, n: int, rng) -> dict:
    """Sampling estimate of E[selected value] and E[single draw], drawing inits and the Bernoulli choice."""
    i = rng.choice(land.n_inits, size=n, p=land.init_weights)
    j = rng.choice(land.n_inits, size=n, p=land.init_weights)
    keep_first = rng.uniform(size=n) < ordering.p[i, j]
    y = land.init_values
    sel = np.where(keep_first, y[i], y[j])
    return {
        "e_tilde": float(sel.mean()),
        "e_tilde_se": float(sel.std(ddof=1) / math.sqrt(n)),
        "e_hat": float(y[i].mean()),
        "e_hat_se": float(y[i].std(ddof=1) / math.sqrt(n)),
    }


def estimate_gamma(y0, y1, selected) -> float:
    """Fraction of unequal pairs where the selector picked the smaller value."""
    y0 = np.asarray(y0, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    selected = np.asarray(selected, dtype=int)
    mask = y0 != y1
    if not mask.any():
        raise UndefinedCorrelation("all pairs tied: ordering accuracy undefined")
    better = np.where(y0 < y1, 0, 1)
    return float(np.mean(selected[mask] == better[mask]))


# ---------------------------------------------------------------- value-screening with a noisy predictor

@dataclass
class NoisyPredictor:
    """Synthetic value predictor: true basin value plus independent noise.

    ``kind``: ``uniform`` (U[-scale, scale]), ``gaussian`` (N(0, scale^2)),
    or ``spike`` (±scale with probability ``spike_prob``, else exact).
    """

    landscape: DiscreteLandscape
    kind: str = "uniform"
    scale: float = 0.0
    spike_prob: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "gaussian", "spike"):
            raise InputError(f"unknown noise kind {self.kind!r}")

    @property
    def second_moment(self) -> float:
        """E|h - y|^2 inside any basin (noise does not depend on the basin)."""
        if self.kind == "uniform":
            return self.scale**2 / 3.0
        if self.kind == "gaussian":
            return self.scale**2
        return self.spike_prob * self.scale**2

    def noise(self, rng, shape) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(-self.scale, self.scale, size=shape)
        if self.kind == "gaussian":
            return self.scale * rng.standard_normal(shape)
        hit = rng.uniform(size=shape) < self.spike_prob
        sign = np.where(rng.uniform(size=shape) < 0.5, -1.0, 1.0)
        return np.where(hit, sign * self.scale, 0.0)

    @classmethod
    def satisfying(cls, land: DiscreteLandscape, zeta: float, kind: str = "uniform"):
        """Noise whose second moment meets the bounded-error bound Delta^2 zeta / 4 with equality."""
        budget = land.delta**2 * zeta / 4.0
        if kind == "uniform":
            return cls(land, "uniform", math.sqrt(3.0 * budget))
        if kind == "gaussian":
            return cls(land, "gaussian", math.sqrt(budget))
        # spikes of size Delta flip an ordering whenever they land on the right side
        return cls(land, "spike", land.delta, budget / land.delta**2)


def check_prop5(land: DiscreteLandscape, M: int, zeta: float, e_tilde: float, trials: int,
                rng, predictor: NoisyPredictor | None = None) -> dict:
    """Value screening of M random starts is within e_tilde of the best of M."""
    if M < 1:
        raise InputError("M must be >= 1")
    if np.any(land.values < 0):
        raise ConfigError("value set must be nonnegative for the f_sup-based bound")
    f_sup = land.f_sup
    if not (0 < zeta < e_tilde / (M * f_sup)):
        raise ConfigError(f"zeta={zeta} infeasible: need 0 < zeta < e_tilde/(M f_sup) = {e_tilde / (M * f_sup):.6g}")
    predictor = predictor or NoisyPredictor.satisfying(land, zeta)
    bound = land.delta**2 * zeta / 4.0
    assumption = predictor.second_moment <= bound * (1 + 1e-12)
    idx = rng.choice(land.n_inits, size=(trials, M), p=land.init_weights)
    y = land.init_values[idx]
    scores = y + predictor.noise(rng, y.shape)
    chosen = y[np.arange(trials), np.argmin(scores, axis=1)]
    best = y.min(axis=1)
    gaps = chosen - best
    gap = float(gaps.mean())
    se = float(gaps.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    holds = gap <= e_tilde + 3 * se
    if not assumption:
        verdict = "precondition violated"
    else:
        verdict = "confirmed" if holds else "contradicted"
    return {
        "checker": "prop5",
        "M": M,
        "zeta": zeta,
        "e_tilde": e_tilde,
        "delta": land.delta,
        "f_sup": f_sup,
        "predictor_second_moment": predictor.second_moment,
        "error_bound": bound,
        "assumption_holds": bool(assumption),
        "e_valinit": float(chosen.mean()),
        "e_multistart_min": float(best.mean()),
        "gap": gap,
        "gap_se": se,
        "bound_holds": bool(holds),
        "verdict": verdict,
    }


# ---------------------------------------------------------------- argument regression

def unit_ball_volume(dim: int) -> float:
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)


def ball_mass_bound(dim: int, delta: float) -> float:
    """Upper bound on the uniform-[0,1]^dim mass of any radius-delta ball."""
    return unit_ball_volume(dim) * delta**dim


def check_prop6(dim: int, s: float, eta: float, epsilon: float, trials: int, rng,
                delta: float | None = None, noise_scale: float | None = None) -> dict:
    """Rate of the eta-reduction event for a synthetic argument predictor.

    Starts are uniform on [0,1]^dim, the solution point is drawn uniformly per
    trial and the predictor is solution + Gaussian noise with
    E||noise||^2 = s (1 - epsilon) (delta eta)^2 unless ``noise_scale`` overrides
    the per-coordinate standard deviation.
    """
    if not (0 < s < 1 and 0 < eta <= 1 and 0 < epsilon < 1):
        raise InputError("need 0 < s < 1, 0 < eta <= 1, 0 < epsilon < 1")
    max_delta = (epsilon / unit_ball_volume(dim)) ** (1.0 / dim)
    if delta is None:
        delta = max_delta
    elif ball_mass_bound(dim, delta) > epsilon * (1 + 1e-12):
        raise ConfigError(f"delta={delta} gives ball mass {ball_mass_bound(dim, delta):.4g} > epsilon={epsilon}")
    budget = s * (1 - epsilon) * (delta * eta) ** 2
    sigma = math.sqrt(budget / dim) if noise_scale is None else noise_scale
    target = rng.uniform(size=(trials, dim))
    start = rng.uniform(size=(trials, dim))
    pred = target + sigma * rng.standard_normal((trials, dim))
    err = np.linalg.norm(pred - target, axis=1)
    far = np.linalg.norm(start - target, axis=1)
    event = (err <= eta * delta) & (far > delta)
    rate = float(event.mean())
    se = math.sqrt(max(rate * (1 - rate), 0.0) / trials)
    bound = (1 - s) * (1 - epsilon)
    return {
        "checker": "prop6",
        "dim": dim,
        "s": s,
        "eta": eta,
        "epsilon": epsilon,
        "delta": delta,
        "noise_second_moment": sigma**2 * dim,
        "error_budget": budget,
        "assumption_holds": bool(sigma**2 * dim <= budget * (1 + 1e-12)),
        "event_rate": rate,
        "event_se": se,
        "eta_reduction_rate": float(np.mean(err <= eta * far)),
        "bound": bound,
        "verdict": "confirmed" if rate >= bound - 3 * se else "contradicted",
    }


# ---------------------------------------------------------------- pairwise selector on real samples

def check_prop3_vanilla(y0, y1, psi_scores, confidence: float = 0.95) -> dict:
    """Positive correlation of sigmoid(psi) with y1 - y0 should mean a lower expected selected value."""
    from .initializers import sigmoid

    y0 = np.asarray(y0, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    p = sigmoid(np.asarray(psi_scores, dtype=float))
    if y0.size < 30:
        raise InputError("need at least 30 paired samples")
    e_vanilla = float(np.mean(p * y0 + (1 - p) * y1))
    e_random = float(np.mean((y0 + y1) / 2))
    report = {"checker": "prop3", "n": int(y0.size), "e_vanilla": e_vanilla, "e_random": e_random}
    try:
        rho = pearson(p, y1 - y0)
    except UndefinedCorrelation:
        report.update(rho=None, rho_ci=None, verdict="undefined correlation")
        return report
    lo, hi = pearson_ci(rho, y0.size, confidence)
    report.update(rho=rho, rho_ci=[lo, hi])
    if lo <= 0:
        report["verdict"] = "condition not met"
    else:
        report["verdict"] = "confirmed" if e_vanilla < e_random else "contradicted"
    return report


def selection_correlations(chosen, values) -> list[float | None]:
    """rho(Z_k, Y_{M-1} - Y_k) for k < M-1, from per-instance choices and candidate values."""
    chosen = np.asarray(chosen, dtype=int)
    values = np.asarray(values, dtype=float)
    m = values.shape[1]
    out = []
    for k in range(m - 1):
        try:
            out.append(pearson((chosen == k).astype(float), values[:, m - 1] - values[:, k]))
        except UndefinedCorrelation:
            out.append(None)
    return out
