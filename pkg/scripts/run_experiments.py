"""Run the benchmark configs end to end and print a one-line summary per method.

    python3 scripts/run_experiments.py configs/convex_m75.json configs/ackley.json --out results
"""
import argparse
import time
from pathlib import Path

from learninit import harness


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("configs", nargs="+")
    ap.add_argument("--out", default="results")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    for path in args.configs:
        cfg = harness.ExperimentConfig.from_file(path)
        t = time.perf_counter()
        res = harness.run_experiment(cfg, workers=args.workers)
        out = Path(args.out) / Path(path).stem
        harness.emit_reports(res.table, out, cfg, res.records, {"timings_seconds": res.timings})
        res.artifacts.save(out / "models")
        print(f"== {Path(path).stem}  ({time.perf_counter() - t:.0f}s, stages {res.timings})")
        for name, rep in res.table.methods.items():
            print(f"  {name:>14}  final {rep.mean_objective[-1]:.5g}  "
                  f"ci [{rep.ci[-1][0]:.5g}, {rep.ci[-1][1]:.5g}]  "
                  f"violations {rep.constraint_violation_fraction}")
        print(f"  learners {res.table.learners}")
        print(f"  pipeline {res.table.pipeline}", flush=True)


if __name__ == "__main__":
    main()
