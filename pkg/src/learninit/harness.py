"""End-to-end experiments: collect, train, evaluate every initializer on shared test instances."""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__, diagnostics, neural
from . import initializers as inits
from .errors import ConfigError, InputError, LearnInitError
from .gd_core import GdConfig, StepRule, run_gd
from .problems import family_from_description, make_family

log = logging.getLogger(__name__)

# stage keys folded into the master seed
STAGE_PHASE1, STAGE_PAIRED, STAGE_TRAIN, STAGE_MAML, STAGE_TEST, STAGE_METHOD = range(1, 7)

DEFAULT_ROSTER = ["zero", "random", "maml", "valinit", "arginit", "multistart"]


@dataclass
class ExperimentConfig:
    family: str
    family_params: dict = field(default_factory=dict)
    N: int = 1500
    T: int = 500
    M: int = 2
    phase1_iters: int = 100
    budgets: list = field(default_factory=lambda: list(range(10, 101, 10)))
    step_p: float | None = None
    step_q: float | None = None
    epsilon: float = 1e-6
    roster: list = field(default_factory=lambda: list(DEFAULT_ROSTER))
    maml_outer_iters: int | None = None
    maml_batch: int = 32
    maml_alpha: float = 0.01
    maml_beta: float | None = None
    hidden: list = field(default_factory=lambda: [200, 200])
    train: dict = field(default_factory=dict)
    seed: int = 0
    histogram_bins: int = 30
    histogram_budget: int | None = None
    paired_N: int | None = None
    note: str = ""

    def __post_init__(self):
        if self.N < 1 or self.T < 1 or self.M < 1:
            raise ConfigError("N, T and M must all be >= 1")
        if not self.budgets or any(b < 0 for b in self.budgets):
            raise ConfigError("budgets must be a non-empty list of nonnegative integers")
        self.budgets = sorted(int(b) for b in self.budgets)
        unknown = set(self.roster) - set(inits.KINDS)
        if unknown:
            raise ConfigError(f"unknown initializers in roster: {sorted(unknown)}")
        bad = set(self.train) - {f.name for f in dataclasses.fields(neural.TrainConfig)}
        if bad:
            raise ConfigError(f"unknown train settings: {sorted(bad)}")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if "config" in raw and "family" not in raw:
            raw = raw["config"]  # a manifest.json
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "family" not in raw:
            raise ConfigError("config needs a 'family'")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def make_family(self):
        return make_family(self.family, **self.family_params)

    def step_rule(self, family) -> StepRule:
        d = family.default_step_rule
        return StepRule(self.step_p or d.p, self.step_q or d.q)

    def train_config(self, seed: int) -> neural.TrainConfig:
        return neural.TrainConfig(**{**self.train, "seed": seed})


def stage_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def stage_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def instance_hash(inst) -> str:
    h = hashlib.sha1(np.ascontiguousarray(inst.x, dtype="<f8").tobytes())
    if inst.label is not None:
        h.update(repr(float(inst.label)).encode())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------- statistics

def paired_ci(values_a, values_b, confidence: float = 0.95) -> tuple[float, float]:
    """t-interval for mean(a - b) over paired observations."""
    a = np.asarray(values_a, dtype=float)
    b = np.asarray(values_b, dtype=float)
    if a.shape != b.shape:
        raise InputError("paired samples must have equal length")
    return mean_ci(a - b, confidence)


def mean_ci(values, confidence: float = 0.95) -> tuple[float, float]:
    d = np.asarray(values, dtype=float)
    if d.size < 2:
        raise InputError("need at least 2 observations")
    m = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        return (m, m)
    half = float(stats.t.ppf(0.5 + confidence / 2, d.size - 1)) * sd / math.sqrt(d.size)
    return (m - half, m + half)


# ---------------------------------------------------------------- trained artifacts

@dataclass
class TrainedArtifacts:
    h_val: inits.ScaledModel | None = None
    h_arg: inits.ScaledModel | None = None
    psi: inits.ScaledModel | None = None
    theta_maml: np.ndarray | None = None

    def save(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name in ("h_val", "h_arg", "psi"):
            model = getattr(self, name)
            if model is not None:
                model.save(out / f"{name}.mlp")
        if self.theta_maml is not None:
            (out / "theta_maml.json").write_text(json.dumps([float(v) for v in self.theta_maml]))

    @classmethod
    def load(cls, out_dir):
        out = Path(out_dir)
        art = cls()
        for name in ("h_val", "h_arg", "psi"):
            if (out / f"{name}.mlp").exists():
                setattr(art, name, inits.ScaledModel.load(out / f"{name}.mlp"))
        if (out / "theta_maml.json").exists():
            art.theta_maml = np.array(json.loads((out / "theta_maml.json").read_text()))
        return art

    def learner_errors(self) -> dict:
        out = {}
        for name in ("h_val", "h_arg", "psi"):
            model = getattr(self, name)
            if model is not None and model.history.val_mse:
                out[name] = {"val_mse_first": model.history.val_mse[0],
                             "val_mse_last": model.history.val_mse[-1]}
        return out


def phase1_config(cfg: ExperimentConfig, family) -> GdConfig:
    return GdConfig(cfg.phase1_iters, cfg.epsilon, cfg.step_rule(family))


def collect(cfg: ExperimentConfig, family):
    """Phase 1: random-start solves (plus paired solves when Vanilla is on the roster)."""
    gd = phase1_config(cfg, family)
    needs_single = any(k in cfg.roster for k in ("valinit", "arginit"))
    records = inits.collect_phase1(family, cfg.N, gd, stage_rng(cfg.seed, STAGE_PHASE1)) if needs_single else []
    paired = []
    if "vanilla" in cfg.roster:
        paired = inits.collect_paired_phase1(family, cfg.paired_N or cfg.N, gd, stage_rng(cfg.seed, STAGE_PAIRED))
    return records, paired


def train_models(cfg: ExperimentConfig, family, records, paired) -> TrainedArtifacts:
    art = TrainedArtifacts()
    hidden = tuple(cfg.hidden)
    if records and "valinit" in cfg.roster:
        s = stage_seed(cfg.seed, STAGE_TRAIN, 0)
        art.h_val = inits.train_val_init(family, records, hidden, s, cfg.train_config(s))
    if records and "arginit" in cfg.roster:
        s = stage_seed(cfg.seed, STAGE_TRAIN, 1)
        art.h_arg = inits.train_arg_init(family, records, hidden, s, cfg.train_config(s))
    if paired:
        s = stage_seed(cfg.seed, STAGE_TRAIN, 2)
        art.psi = inits.train_vanilla(family, paired, hidden, s, cfg.train_config(s))
    if "maml" in cfg.roster:
        outer = cfg.maml_outer_iters if cfg.maml_outer_iters is not None else -(-cfg.N // cfg.maml_batch)
        art.theta_maml = inits.maml_train(family, outer, cfg.maml_batch, cfg.maml_alpha, cfg.maml_beta,
                                          stage_rng(cfg.seed, STAGE_MAML))
    return art


def build_initializers(cfg: ExperimentConfig, art: TrainedArtifacts) -> list[inits.Initializer]:
    out = []
    for kind in cfg.roster:
        model = {"valinit": art.h_val, "arginit": art.h_arg, "vanilla": art.psi}.get(kind)
        out.append(inits.Initializer(kind, cfg.M, art.theta_maml if kind == "maml" else None, model))
    return out


# ---------------------------------------------------------------- phase 2

@dataclass
class EvalRecord:
    method: str
    index: int
    instance: object
    instance_hash: str
    theta_in: np.ndarray
    theta_final: np.ndarray
    values: list  # objective at each budget
    iterations_used: int
    converged: bool
    candidate_finals: list | None = None  # per-candidate final objective (MultiStart, Val-Init, Vanilla)
    choice: int | None = None  # which candidate the method started from
    psi: float | None = None
    seconds: float = 0.0


def _curve_at(out, theta_val, budgets):
    trace = out.trace
    vals = []
    for b in budgets:
        if b == 0:
            vals.append(theta_val)
        elif b <= len(trace):
            vals.append(trace[b - 1])
        else:
            vals.append(out.value_star)
    return vals


def _solve_curve(family, inst, theta, gd, budgets):
    out = run_gd(family, inst, theta, gd, subgradient_mode=not family.smooth)
    return out, _curve_at(out, float(family.objective(theta, inst)), budgets)


def method_key(kind: str) -> int:
    """Stream key folded into the seed; MultiStart shares Random's so its first start is Random's."""
    return inits.KINDS.index("random" if kind == "multistart" else kind)


def evaluate_instance(ctx, i: int) -> list[EvalRecord]:
    cfg, family, initializers = ctx
    inst = family.sample_instance(stage_rng(cfg.seed, STAGE_TEST, i))
    gd = GdConfig(max(cfg.budgets), cfg.epsilon, cfg.step_rule(family), record_trace=True)
    ihash = instance_hash(inst)
    out_records = []
    for init in initializers:
        t0 = time.perf_counter()
        rng = stage_rng(cfg.seed, STAGE_METHOD, method_key(init.kind), i)
        n_cands = {"multistart": init.M, "valinit": init.M, "vanilla": 2}.get(init.kind)
        cands = inits.candidate_pool(family, inst, rng, n_cands) if n_cands else None
        theta_in = inits.propose(init, family, inst, rng, candidates=cands)
        if init.kind == "multistart":
            runs = [_solve_curve(family, inst, th, gd, cfg.budgets) for th in theta_in]
            finals = [o.value_star for o, _ in runs]
            best = int(np.argmin(finals))
            values = [min(c[j] for _, c in runs) for j in range(len(cfg.budgets))]
            o = runs[best][0]
            rec = EvalRecord(init.label, i, inst, ihash, theta_in[best], o.theta_star, values,
                             sum(r.iterations_used for r, _ in runs), o.converged_by_gradient,
                             candidate_finals=finals, choice=best)
        else:
            o, values = _solve_curve(family, inst, theta_in, gd, cfg.budgets)
            rec = EvalRecord(init.label, i, inst, ihash, theta_in, o.theta_star, values,
                             o.iterations_used, o.converged_by_gradient)
            if cands is not None:
                # solve every candidate too, for the selector diagnostics
                rec.choice = next(k for k, c in enumerate(cands) if np.array_equal(c, theta_in))
                rec.candidate_finals = [
                    o.value_star if k == rec.choice else
                    run_gd(family, inst, c, gd, subgradient_mode=not family.smooth).value_star
                    for k, c in enumerate(cands)
                ]
            if init.kind == "vanilla":
                feats = family.features(inst)
                rec.psi = float(init.model.predict(np.concatenate([cands[0], cands[1], feats]))[0])
        rec.seconds = time.perf_counter() - t0
        out_records.append(rec)
    return out_records


_WORKER_CTX = None


def _worker_init(ctx):
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _worker_eval(i):
    return evaluate_instance(_WORKER_CTX, i)


def evaluate(cfg, family, initializers, workers: int = 1) -> list[EvalRecord]:
    ctx = (cfg, family, initializers)
    if workers <= 1:
        chunks = [evaluate_instance(ctx, i) for i in range(cfg.T)]
    else:
        with ProcessPoolExecutor(workers, initializer=_worker_init, initargs=(ctx,)) as pool:
            chunks = list(pool.map(_worker_eval, range(cfg.T), chunksize=max(1, cfg.T // (4 * workers))))
    return [r for chunk in chunks for r in chunk]


# ---------------------------------------------------------------- reports

def constraint_violation_fraction(records, family) -> float | None:
    """Share of records whose final point breaks the family constraint; None if there is none."""
    if not records:
        raise InputError("no records")
    if family.constraint_check is None:
        return None
    bad = sum(not family.constraint_check(r.theta_final, r.instance) for r in records)
    return bad / len(records)


@dataclass
class MethodReport:
    method: str
    budgets: list
    mean_objective: list
    ci: list
    histogram_edges: list
    histogram_counts: list
    constraint_violation_fraction: float | None
    mean_iterations: float
    wall_time_per_instance: float = 0.0

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("wall_time_per_instance")  # timing is not reproducible; kept out of table.json
        return d


@dataclass
class ComparisonTable:
    family: dict
    methods: dict
    pairwise: list
    best_single_start: dict
    learners: dict = field(default_factory=dict)
    pipeline: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "methods": {k: v.to_json() for k, v in self.methods.items()},
            "pairwise": self.pairwise,
            "best_single_start": self.best_single_start,
            "learners": self.learners,
            "pipeline": self.pipeline,
        }


def by_method(records) -> dict:
    out = {}
    for r in records:
        out.setdefault(r.method, []).append(r)
    return out


def method_values(records, method, budget_index=-1) -> np.ndarray:
    return np.array([r.values[budget_index] for r in records if r.method == method])


def build_table(cfg: ExperimentConfig, family, records, art: TrainedArtifacts | None = None) -> ComparisonTable:
    groups = by_method(records)
    hist_budget = cfg.histogram_budget if cfg.histogram_budget is not None else max(cfg.budgets)
    if hist_budget not in cfg.budgets:
        raise ConfigError(f"histogram_budget {hist_budget} is not one of the budgets")
    hb = cfg.budgets.index(hist_budget)
    finals_all = np.concatenate([[r.values[hb] for r in recs] for recs in groups.values()])
    lo, hi = float(finals_all.min()), float(finals_all.max())
    if hi == lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, cfg.histogram_bins + 1)
    methods = {}
    for name, recs in groups.items():
        vals = np.array([r.values for r in recs])
        means = vals.mean(axis=0)
        cis = [list(mean_ci(vals[:, j])) if len(recs) > 1 else [float(means[j])] * 2
               for j in range(len(cfg.budgets))]
        counts, _ = np.histogram(vals[:, hb], bins=edges)
        methods[name] = MethodReport(
            name, list(cfg.budgets), [float(m) for m in means], cis, [float(e) for e in edges],
            [int(c) for c in counts], constraint_violation_fraction(recs, family),
            float(np.mean([r.iterations_used for r in recs])),
            float(np.mean([r.seconds for r in recs])),
        )
    names = list(groups)
    pairwise = []
    if cfg.T > 1:
        for ai, a in enumerate(names):
            for b in names[ai + 1:]:
                va = np.array([r.values for r in groups[a]])
                vb = np.array([r.values for r in groups[b]])
                for j, budget in enumerate(cfg.budgets):
                    lo_, hi_ = paired_ci(va[:, j], vb[:, j])
                    pairwise.append({"a": a, "b": b, "budget": budget,
                                     "mean_diff": float(np.mean(va[:, j] - vb[:, j])),
                                     "ci_low": lo_, "ci_high": hi_})
    best = {}
    single = [n for n in names if not n.startswith("MultiStart")]
    for j, budget in enumerate(cfg.budgets):
        if single:
            best[str(budget)] = min(single, key=lambda n: methods[n].mean_objective[j])
    table = ComparisonTable(family.describe(), methods, pairwise, best)
    if art is not None:
        table.learners = art.learner_errors()
    table.pipeline = pipeline_diagnostics(cfg, groups)
    return table


def pipeline_diagnostics(cfg, groups) -> dict:
    """Reported (not asserted) selector statistics on the learned pipeline."""
    out = {}
    if cfg.T < 3:
        return out
    rnd = groups.get("Random")
    val = groups.get("Val-Init")
    if val is not None and cfg.M >= 2:
        cand = np.array([r.candidate_finals for r in val])
        chosen = np.array([r.choice for r in val])
        out["valinit_selection_rho"] = diagnostics.selection_correlations(chosen, cand)
        out["valinit_selected_mean"] = float(cand[np.arange(len(chosen)), chosen].mean())
        out["valinit_candidate_mean"] = float(cand.mean())
        out["valinit_candidate_min_mean"] = float(cand.min(axis=1).mean())
        if rnd is not None:
            lo, hi = paired_ci([r.values[-1] for r in val], [r.values[-1] for r in rnd])
            out["valinit_minus_random_ci"] = [lo, hi]
    van = groups.get("Vanilla")
    if van is not None:
        y0 = np.array([r.candidate_finals[0] for r in van])
        y1 = np.array([r.candidate_finals[1] for r in van])
        try:
            out["vanilla_gamma"] = diagnostics.estimate_gamma(y0, y1, [r.choice for r in van])
        except diagnostics.UndefinedCorrelation:
            out["vanilla_gamma"] = None
        if len(y0) >= 30:
            out["vanilla_prop3"] = diagnostics.check_prop3_vanilla(y0, y1, [r.psi for r in van])
    return out


def _f(x) -> str:
    return format(float(x), ".17g")


def emit_reports(table: ComparisonTable, out_dir, cfg: ExperimentConfig | None = None,
                 records=None, extra_manifest: dict | None = None) -> dict:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = {}
        p = out / "curves.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "iteration_budget", "mean_objective", "ci_low", "ci_high"])
            for name, rep in table.methods.items():
                for b, m, (lo, hi) in zip(rep.budgets, rep.mean_objective, rep.ci):
                    w.writerow([name, b, _f(m), _f(lo), _f(hi)])
        paths["curves"] = p
        p = out / "histogram.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "bin_left", "bin_right", "count"])
            for name, rep in table.methods.items():
                e = rep.histogram_edges
                for k, c in enumerate(rep.histogram_counts):
                    w.writerow([name, _f(e[k]), _f(e[k + 1]), c])
        paths["histogram"] = p
        p = out / "table.json"
        p.write_text(json.dumps(table.to_json(), indent=2, sort_keys=True) + "\n")
        paths["table"] = p
        if records is not None:
            p = out / "records.csv"
            with p.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["method", "instance", "instance_hash", "iterations_used",
                            *[f"obj_{b}" for b in (cfg.budgets if cfg else [])]])
                for r in records:
                    w.writerow([r.method, r.index, r.instance_hash, r.iterations_used, *map(_f, r.values)])
            paths["records"] = p
        if cfg is not None:
            manifest = {
                "config": cfg.to_dict(),
                "seed": cfg.seed,
                "seed_derivation": "numpy SeedSequence([seed, stage, *keys]); stages: phase1=1, paired=2, "
                                   "train=3, maml=4, test-instance=5 (key i), method=6 (keys kind, i); "
                                   "MultiStart reuses the Random kind key",
                "versions": {"learninit": __version__, "numpy": np.__version__,
                             "python": platform.python_version()},
            }
            manifest.update(extra_manifest or {})
            p = out / "manifest.json"
            p.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
            paths["manifest"] = p
            p = out / "timings.json"
            p.write_text(json.dumps({n: r.wall_time_per_instance for n, r in table.methods.items()},
                                    indent=2, sort_keys=True) + "\n")
        return paths
    except OSError as exc:
        raise OSError(f"writing reports to {out}: {exc}") from exc


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    family: object
    artifacts: TrainedArtifacts
    records: list
    table: ComparisonTable
    timings: dict


class _stage:
    """Re-raise package errors with the failing stage and the master seed attached."""

    def __init__(self, name, seed, timings):
        self.name, self.seed, self.timings = name, seed, timings

    def __enter__(self):
        self.t = time.perf_counter()
        return self

    def __exit__(self, et, exc, tb):
        self.timings[self.name] = time.perf_counter() - self.t
        if isinstance(exc, LearnInitError):
            err = type(exc)(f"stage {self.name} (seed {self.seed}): {exc}")
            raise err from exc
        return False


def run_experiment(cfg: ExperimentConfig, workers: int = 1, artifacts: TrainedArtifacts | None = None,
                   family=None) -> ExperimentResult:
    """Phase 1, training, then paired phase-2 evaluation of every initializer."""
    timings = {}
    with _stage("family", cfg.seed, timings):
        family = family or cfg.make_family()
    if artifacts is None:
        with _stage("collect", cfg.seed, timings):
            records, paired = collect(cfg, family)
        with _stage("train", cfg.seed, timings):
            artifacts = train_models(cfg, family, records, paired)
    with _stage("evaluate", cfg.seed, timings):
        initializers = build_initializers(cfg, artifacts)
        recs = evaluate(cfg, family, initializers, workers)
    with _stage("report", cfg.seed, timings):
        table = build_table(cfg, family, recs, artifacts)
    log.info("experiment %s finished: %s", cfg.family, timings)
    return ExperimentResult(cfg, family, artifacts, recs, table, timings)


# ---------------------------------------------------------------- phase-1 record files

def write_records(records, family, cfg: ExperimentConfig, out_dir, paired=None) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    m, n = family.decision_dim, family.instance_dim
    p = out / "records.csv"
    with p.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*(f"x{j}" for j in range(n)), "label", *(f"init{j}" for j in range(m)),
                    *(f"sol{j}" for j in range(m)), "value"])
        for r in records:
            w.writerow([*map(_f, r.instance.x), "" if r.instance.label is None else _f(r.instance.label),
                        *map(_f, r.init), *map(_f, r.solution_arg), _f(r.solution_val)])
    paths = {"records": p}
    if paired:
        p = out / "paired_records.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([*(f"x{j}" for j in range(n)), "label", *(f"init0_{j}" for j in range(m)),
                        *(f"init1_{j}" for j in range(m)), "value0", "value1"])
            for r in paired:
                w.writerow([*map(_f, r.instance.x), "" if r.instance.label is None else _f(r.instance.label),
                            *map(_f, r.init0), *map(_f, r.init1), _f(r.val0), _f(r.val1)])
        paths["paired"] = p
    gd = phase1_config(cfg, family)
    manifest = {"family": family.describe(), "N": len(records), "paired_N": len(paired or []),
                "seed": cfg.seed, "gd": {"iter_max": gd.iter_max, "epsilon": gd.epsilon,
                                         "p": gd.step_rule.p, "q": gd.step_rule.q},
                "config": cfg.to_dict()}
    p = out / "manifest.json"
    p.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    paths["manifest"] = p
    return paths


def read_records(in_dir):
    """Inverse of :func:`write_records`: returns (family, config, records, paired)."""
    from .problems import Instance

    src = Path(in_dir)
    try:
        manifest = json.loads((src / "manifest.json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read records manifest in {src}: {exc}") from None
    family = family_from_description(manifest["family"])
    cfg = ExperimentConfig.from_dict(manifest["config"])
    m, n = family.decision_dim, family.instance_dim

    def rows(name):
        path = src / name
        if not path.exists():
            return []
        with path.open() as fh:
            rd = csv.reader(fh)
            next(rd)
            return [row for row in rd]

    def inst(row):
        label = float(row[n]) if row[n] != "" else None
        return Instance(np.array(row[:n], dtype=float), label)

    records = []
    for row in rows("records.csv"):
        v = np.array(row[n + 1:], dtype=float)
        records.append(inits.Phase1Record(inst(row), v[:m], v[m:2 * m], float(v[2 * m])))
    paired = []
    for row in rows("paired_records.csv"):
        v = np.array(row[n + 1:], dtype=float)
        paired.append(inits.PairedRecord(inst(row), v[:m], v[m:2 * m], float(v[2 * m]), float(v[2 * m + 1])))
    return family, cfg, records, paired
