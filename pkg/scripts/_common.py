"""Shared helpers for the experiment scripts."""

import argparse
import os
import sys

from ttno.experiments import RESULT_FIELDS, ExperimentConfig, run_experiment, write_csv

RESULTS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "results")


def run(name: str, **cfg) -> str:
    p = argparse.ArgumentParser(description=f"{name} sweep; writes results/{name}.csv")
    p.add_argument("--out", default=os.path.join(RESULTS, f"{name}.csv"))
    p.add_argument("--quick", action="store_true", help="small sizes only")
    args = p.parse_args()
    if args.quick:
        cfg["d"] = [d for d in cfg["d"] if d <= 16] or cfg["d"][:1]
    rows = run_experiment(ExperimentConfig(**cfg))
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        text = write_csv(rows, RESULT_FIELDS, fh)
    sys.stdout.write(text)
    return args.out
