"""Experiment sweeps producing rank, memory and error tables as CSV rows."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Optional

import numpy as np

from .build import build_hss_compressed, build_unstructured, expected_rank
from .dimtree import make_tree
from .models import SpinModelParams, model_spec
from .ttn import DEFAULT_DENSE_CAP, rank_report, ttno_to_dense_matrix

__all__ = [
    "EXPERIMENTS",
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "RESULT_FIELDS",
    "RANK_TABLE_FIELDS",
    "run_experiment",
    "rank_table",
    "write_csv",
]

EXPERIMENTS = ("closed", "open", "synthetic", "compare-trees", "verify", "rank-table")

# Default physical parameters per model.
MODEL_DEFAULTS = {
    "closed": dict(omega=3.0, delta=-2.0, nu=2.0, gamma=1.0),
    "synthetic": dict(omega=3.0, delta=-2.0, nu=2.0, gamma=1.0),
    "open": dict(omega=0.4, delta=-2.0, nu=2.0, gamma=1.0),
}


class ConfigError(ValueError):
    pass


def _alpha(v) -> float:
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity", "∞"):
        return math.inf
    return float(v)


@dataclass
class ExperimentConfig:
    experiment: str
    d: list[int] = field(default_factory=lambda: [8])
    alpha: list[float] = field(default_factory=lambda: [1.0])
    eps: list[float] = field(default_factory=lambda: [1e-12])
    tree: str = "balanced"
    model: Optional[str] = None
    omega: Optional[float] = None
    delta: Optional[float] = None
    nu: Optional[float] = None
    gamma: Optional[float] = None
    single_site: str = "separate"
    oracle: bool = True
    dense_cap: int = DEFAULT_DENSE_CAP
    seed: int = 0
    timing: bool = True
    out: Optional[str] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        try:
            self.d = [int(x) for x in _as_list(self.d)]
            self.alpha = [_alpha(x) for x in _as_list(self.alpha)]
            self.eps = [float(x) for x in _as_list(self.eps)]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad sweep value: {exc}") from None
        for name in ("d", "alpha", "eps"):
            if not getattr(self, name):
                raise ConfigError(f"sweep list {name!r} is empty")
        if any(d < 2 for d in self.d):
            raise ConfigError("every d must be at least 2")
        if any(e < 0 for e in self.eps):
            raise ConfigError("eps values must be nonnegative")
        if self.model is None:
            self.model = self.experiment if self.experiment in MODEL_DEFAULTS else "closed"
        if self.model not in MODEL_DEFAULTS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.single_site not in ("separate", "absorb"):
            raise ConfigError("single_site must be 'separate' or 'absorb'")
        if self.dense_cap < 1:
            raise ConfigError("dense_cap must be positive")
        for d in self.d:
            try:
                make_tree(self.tree, d)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "experiment" not in data:
            raise ConfigError("config needs an 'experiment' key")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def params(self, d: int, alpha: float, eps: float) -> SpinModelParams:
        base = dict(MODEL_DEFAULTS[self.model])
        for k in base:
            if getattr(self, k) is not None:
                base[k] = float(getattr(self, k))
        return SpinModelParams(d=d, alpha=alpha, eps=eps, **base)


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


@dataclass
class ResultRow:
    experiment: str
    model: str
    d: int
    alpha: float
    eps: float
    tree: str
    representation_rank: int
    expected_rank: Optional[int]
    hss_rank: int
    parameter_count: int
    memory_bytes: int
    rel_error_frobenius: Optional[float] = None
    wall_time_ms: Optional[float] = None
    note: str = ""


RESULT_FIELDS = [f.name for f in fields(ResultRow)]
RANK_TABLE_FIELDS = ["model", "d", "alpha", "eps", "tree", "node", "d_tau", "k_tau", "r_tau", "representation_rank"]


def _point(cfg: ExperimentConfig, d: int, alpha: float, eps: float, tree_kind: str) -> ResultRow:
    p = cfg.params(d, alpha, eps)
    spec = model_spec(cfg.model, p)
    tree = make_tree(tree_kind, d)
    t0 = time.perf_counter()
    h, hss = build_hss_compressed(spec, tree, eps, cfg.single_site)
    elapsed = (time.perf_counter() - t0) * 1e3
    rep = rank_report(h)
    row = ResultRow(
        experiment=cfg.experiment,
        model=cfg.model,
        d=d,
        alpha=alpha,
        eps=eps,
        tree=tree_kind,
        representation_rank=rep.representation_rank,
        expected_rank=expected_rank(spec, hss, cfg.single_site),
        hss_rank=max(x.hss_rank for x in hss),
        parameter_count=rep.parameter_count,
        memory_bytes=rep.memory_bytes,
        wall_time_ms=round(elapsed, 3) if cfg.timing else None,
    )
    if cfg.oracle:
        big = math.prod(spec.site_dims) ** 2
        if big > cfg.dense_cap:
            row.note = f"dense oracle skipped: {big} entries exceed cap {cfg.dense_cap}"
        else:
            ref = ttno_to_dense_matrix(build_unstructured(spec, tree, cfg.single_site), cfg.dense_cap)
            approx = ttno_to_dense_matrix(h, cfg.dense_cap)
            row.rel_error_frobenius = float(np.linalg.norm(approx - ref) / np.linalg.norm(ref))
    return row


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """One row per sweep point (per tree for ``compare-trees``), in sweep order."""
    if cfg.experiment in ("verify", "rank-table"):
        raise ConfigError(f"{cfg.experiment!r} is not a sweep experiment")
    trees = ["balanced", "degenerate"] if cfg.experiment == "compare-trees" else [cfg.tree]
    rows = []
    for d in cfg.d:
        for alpha in cfg.alpha:
            for eps in cfg.eps:
                for kind in trees:
                    rows.append(_point(cfg, d, alpha, eps, kind))
    return rows


def rank_table(cfg: ExperimentConfig) -> list[dict]:
    """Per-node ``k_t`` (summed over families) and ``r_t`` across the sweep."""
    rows = []
    for d in cfg.d:
        tree = make_tree(cfg.tree, d)
        for alpha in cfg.alpha:
            for eps in cfg.eps:
                spec = model_spec(cfg.model, cfg.params(d, alpha, eps))
                h, hss = build_hss_compressed(spec, tree, eps, cfg.single_site)
                ranks = h.ranks
                rep = max(ranks.values())
                for t in tree.nodes():
                    rows.append(
                        {
                            "model": cfg.model,
                            "d": d,
                            "alpha": alpha,
                            "eps": eps,
                            "tree": cfg.tree,
                            "node": f"{t.lo}-{t.hi}",
                            "d_tau": t.size,
                            "k_tau": sum(x.ranks[t.key] for x in hss),
                            "r_tau": ranks[t.key],
                            "representation_rank": rep,
                        }
                    )
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return repr(v)
    return str(v)


def write_csv(rows: Iterable, fieldnames: list[str], fh=None) -> str:
    """Write rows (dataclasses or dicts) with a fixed header; returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        rec = asdict(row) if not isinstance(row, dict) else row
        writer.writerow([_fmt(rec.get(k)) for k in fieldnames])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
