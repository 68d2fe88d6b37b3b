"""Command line: ``ttno --experiment closed --d 4 6 8 --out rows.csv``.

Exit status is 0 on success, 1 when a verification check fails and 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from .checks import run_checks
from .dimtree import make_tree
from .experiments import (
    EXPERIMENTS,
    RANK_TABLE_FIELDS,
    RESULT_FIELDS,
    ConfigError,
    ExperimentConfig,
    rank_table,
    run_experiment,
    write_csv,
)
from .build import build_hss_compressed
from .models import model_spec
from .ttn import load_network, rank_report, save_network

VERIFY_FIELDS = ["d", "tree", "check", "passed", "measured", "tol", "detail"]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ttno", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON config file; command-line flags override it")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--model", choices=["closed", "open", "synthetic"])
    p.add_argument("--d", type=int, nargs="+", help="number of sites (sweep)")
    p.add_argument("--alpha", nargs="+", help="interaction exponents, 'inf' allowed (sweep)")
    p.add_argument("--eps", type=float, nargs="+", help="HSS tolerances (sweep)")
    p.add_argument("--tree", help="balanced | degenerate | flat | custom:<nested tuple>")
    p.add_argument("--single-site", choices=["separate", "absorb"], dest="single_site")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--dense-cap", type=int, dest="dense_cap", help="max dense oracle entries")
    p.add_argument("--seed", type=int, help="seed for randomized verification fixtures")
    p.add_argument("--no-oracle", action="store_true", help="skip dense error computation")
    p.add_argument("--no-timing", action="store_true", help="leave wall_time_ms empty")
    p.add_argument("--save-operators", metavar="DIR", help="write every built TTNO as .npz")
    p.add_argument("--inspect", metavar="NPZ", help="print the rank report of a saved network and exit")
    return p


def _config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        base = ExperimentConfig.from_json(args.config)
        data = {k: v for k, v in vars(base).items()}
    overrides = {
        "experiment": args.experiment,
        "model": args.model,
        "d": args.d,
        "alpha": args.alpha,
        "eps": args.eps,
        "tree": args.tree,
        "single_site": args.single_site,
        "out": args.out,
        "dense_cap": args.dense_cap,
        "seed": args.seed,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.no_oracle:
        data["oracle"] = False
    if args.no_timing:
        data["timing"] = False
    if "experiment" not in data:
        raise ConfigError("give --experiment or a --config with an 'experiment' key")
    if "d" not in data and data["experiment"] == "verify":
        data["d"] = [6]
    return ExperimentConfig.from_dict(data)


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _verify(cfg: ExperimentConfig) -> int:
    rows, failed = [], False
    for d in cfg.d:
        if (2**d) ** 2 > cfg.dense_cap:
            raise ConfigError(f"verify at d={d} needs {(2**d) ** 2} dense entries; cap is {cfg.dense_cap}")
        tree = make_tree(cfg.tree, d)
        print(f"# verify d={d} tree={tree}", file=sys.stderr if not cfg.out else sys.stdout)
        for res in run_checks(tree, cfg.seed):
            print(res.line(), file=sys.stderr if not cfg.out else sys.stdout)
            failed |= not res.passed
            rows.append(
                {
                    "d": d,
                    "tree": cfg.tree,
                    "check": res.name,
                    "passed": res.passed,
                    "measured": res.value,
                    "tol": res.tol,
                    "detail": res.detail,
                }
            )
    if cfg.out:
        _emit(write_csv(rows, VERIFY_FIELDS), cfg.out)
    return 1 if failed else 0


def _save_operators(cfg: ExperimentConfig, directory: str):
    os.makedirs(directory, exist_ok=True)
    trees = ["balanced", "degenerate"] if cfg.experiment == "compare-trees" else [cfg.tree]
    for d in cfg.d:
        for alpha in cfg.alpha:
            for eps in cfg.eps:
                for kind in trees:
                    spec = model_spec(cfg.model, cfg.params(d, alpha, eps))
                    h, _ = build_hss_compressed(spec, make_tree(kind, d), eps, cfg.single_site)
                    name = f"{cfg.model}_d{d}_alpha{alpha}_eps{eps:g}_{kind.replace(':', '-')}.npz"
                    save_network(os.path.join(directory, name), h)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    if args.inspect:
        try:
            net = load_network(args.inspect)
        except (OSError, ValueError) as exc:
            print(f"ttno: error: {exc}", file=sys.stderr)
            return 2
        rep = rank_report(net)
        print(f"tree: {net.tree}")
        print(f"representation_rank: {rep.representation_rank}")
        print(f"parameter_count: {rep.parameter_count}")
        print(f"memory_bytes: {rep.memory_bytes}")
        return 0
    try:
        cfg = _config(args)
        if cfg.experiment == "verify":
            return _verify(cfg)
        if cfg.experiment == "rank-table":
            _emit(write_csv(rank_table(cfg), RANK_TABLE_FIELDS), cfg.out)
        else:
            _emit(write_csv(run_experiment(cfg), RESULT_FIELDS), cfg.out)
        if args.save_operators:
            _save_operators(cfg, args.save_operators)
    except ConfigError as exc:
        print(f"ttno: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
