"""Run every registered experiment and write one CSV per experiment.

    python scripts/run_all.py [--out results] [--trials N] [--full] [--workers W]
"""
import argparse
import os
import time

from mimorelay.harness import REGISTRY, emit, run_experiment
from mimorelay.harness.config import ExperimentConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--full", action="store_true")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for name in REGISTRY:
        cfg = ExperimentConfig(name, trials=args.trials, seed=args.seed, workers=args.workers, full=args.full)
        t0 = time.perf_counter()
        rows = run_experiment(cfg)
        path = os.path.join(args.out, f"{name}.csv")
        emit(rows, "csv", path)
        print(f"{name:22s}{len(rows):6d} rows  {time.perf_counter() - t0:7.1f} s  -> {path}")


if __name__ == "__main__":
    main()
