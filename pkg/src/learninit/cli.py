"""Command-line entry point: run, collect, train, diagnose, gradcheck.

Exit codes: 0 success, 1 failed check, 2 bad configuration or input,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from . import gradcheck, harness
from .errors import ConfigError, LearnInitError

log = logging.getLogger("learninit")


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, (np.floating, np.ndarray)):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def cmd_run(args) -> int:
    cfg = harness.ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    res = harness.run_experiment(cfg, workers=args.workers)
    harness.emit_reports(res.table, args.out, cfg, res.records,
                         {"timings_seconds": res.timings} if args.timings else None)
    res.artifacts.save(Path(args.out) / "models")
    for name, rep in res.table.methods.items():
        print(f"{name:>14}: final mean objective {rep.mean_objective[-1]:.6g}")
    return 0


def cmd_collect(args) -> int:
    cfg = harness.ExperimentConfig.from_file(args.config)
    family = cfg.make_family()
    records, paired = harness.collect(cfg, family)
    paths = harness.write_records(records, family, cfg, args.out, paired)
    print(f"wrote {len(records)} records, {len(paired)} paired records to {paths['manifest'].parent}")
    return 0


def cmd_train(args) -> int:
    family, cfg, records, paired = harness.read_records(args.records)
    art = harness.train_models(cfg, family, records, paired)
    art.save(args.out)
    _write_json(Path(args.out) / "learners.json", art.learner_errors())
    print(f"saved models to {args.out}")
    return 0


# ---------------------------------------------------------------- diagnose

def _landscapes(rng, n, params):
    return [dg.DiscreteLandscape.random(rng, params.get("n_values", 4), params.get("n_inits", 8),
                                        params.get("min_gap", 0.5)) for _ in range(n)]


def diag_prop1(params, rng):
    reports = []
    for land in _landscapes(rng, params.get("landscapes", 5), params):
        for name, model in (("oracle", dg.OrderingModel.oracle(land, 0.8)),
                            ("inverted", dg.OrderingModel.inverted(land)),
                            ("random", dg.OrderingModel.random(land, rng))):
            reports.append({"selector": name, **dg.check_prop1(land, model)})
    return reports


def diag_prop2(params, rng):
    return [dg.check_prop2(land, g)
            for land in _landscapes(rng, params.get("landscapes", 5), params)
            for g in params.get("gammas", [0.6, 0.8, 1.0])]


def diag_prop5(params, rng):
    land = dg.DiscreteLandscape(params.get("values", [0.0, 10.0]), params.get("basin_map", [0, 1]),
                                params.get("init_weights", [0.5, 0.5]))
    e_tilde = params.get("e_tilde", 0.1)
    out = []
    for M in params.get("M", [2, 5]):
        # default: half of the largest admissible zeta for this M
        zeta = params.get("zeta") or 0.5 * e_tilde / (M * land.f_sup)
        out.append(dg.check_prop5(land, M, zeta, e_tilde, params.get("trials", 100_000), rng))
    return out


def diag_prop6(params, rng):
    return [dg.check_prop6(params.get("dim", 2), s, eta, eps, params.get("trials", 100_000), rng)
            for s, eps, eta in params.get("settings", [[0.5, 0.1, 0.5], [0.2, 0.05, 0.9]])]


def _pipeline_pairs(params):
    """Vanilla's candidate pairs on fresh instances, from a full (Vanilla-only) experiment."""
    cfg = harness.ExperimentConfig.from_dict({**params["experiment"], "roster": ["vanilla"]})
    recs = harness.run_experiment(cfg).records
    y0 = np.array([r.candidate_finals[0] for r in recs])
    y1 = np.array([r.candidate_finals[1] for r in recs])
    return y0, y1, np.array([r.psi for r in recs]), np.array([r.choice for r in recs])


def _synthetic_pairs(params, rng):
    n = params.get("samples", 10_000)
    y0, y1 = rng.uniform(size=n), rng.uniform(size=n)
    kind = params.get("selector", "random")
    if kind == "oracle":
        p = np.where(y0 < y1, 1.0, 0.0)
    elif kind == "coin":
        p = np.full(n, 0.5)
    elif kind == "random":
        p = rng.uniform(size=n)
    else:
        raise ConfigError(f"unknown synthetic selector {kind!r}")
    # psi with sigmoid(psi) = p, clipped away from +-inf
    pc = np.clip(p, 1e-12, 1 - 1e-12)
    psi = np.log(pc / (1 - pc))
    sel = np.where(rng.uniform(size=n) < p, 0, 1)
    return y0, y1, psi, sel


def diag_prop3(params, rng):
    y0, y1, psi, _ = _pipeline_pairs(params) if "experiment" in params else _synthetic_pairs(params, rng)
    return [dg.check_prop3_vanilla(y0, y1, psi)]


def diag_gamma(params, rng):
    y0, y1, _, sel = _pipeline_pairs(params) if "experiment" in params else _synthetic_pairs(params, rng)
    return [{"checker": "gamma", "n": int(len(y0)), "gamma": dg.estimate_gamma(y0, y1, sel),
             "verdict": "reported"}]


CHECKERS = {"prop1": diag_prop1, "prop2": diag_prop2, "prop3": diag_prop3,
            "prop5": diag_prop5, "prop6": diag_prop6, "gamma": diag_gamma}


def cmd_diagnose(args) -> int:
    params = _read_json(args.config) if args.config else {}
    rng = np.random.default_rng(params.get("seed", 0))
    reports = CHECKERS[args.checker](params, rng)
    out = Path(args.out)
    _write_json(out / f"{args.checker}.json", {"checker": args.checker, "inputs": params, "reports": reports})
    bad = [r for r in reports if r.get("verdict") == "contradicted"]
    for r in reports:
        print(f"{args.checker}: {r.get('verdict')}")
    return 1 if bad else 0


def cmd_gradcheck(args) -> int:
    reports = gradcheck.run_all(args.seed, args.cases)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.suite:<13} cases={r.cases} "
              f"max_rel_err={r.max_rel_err:.3e} tol={r.tol:g}")
    return 0 if all(r.passed for r in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="learninit", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="full experiment: collect, train, evaluate, report")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timings", action="store_true", help="also record stage wall times in manifest.json")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("collect", help="phase-1 records only")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("train", help="fit the learned initializers from saved records")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("diagnose", help="run one guarantee checker")
    p.add_argument("--checker", required=True, choices=sorted(CHECKERS))
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("gradcheck", help="finite-difference check of all gradients")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=20)
    p.set_defaults(func=cmd_gradcheck)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except LearnInitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
