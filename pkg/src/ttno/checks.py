"""Dense-oracle verification suite behind ``ttno verify``.

Each check builds small random instances, runs a structured path and its
brute-force counterpart, and reports the measured discrepancy.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .build import (
    InteractionFamily,
    PairwiseHamiltonian,
    binary_recursion_rhs,
    build_hss_compressed,
    build_unstructured,
    build_unstructured_mary,
    dense_hamiltonian,
    matricization_rank_law,
    operator_tensor,
    oracle_h_tau,
    split_matricization,
    ttno_direct_sum,
)
from .dimtree import DimensionTree
from .hss import hss_block_row_ranks, hss_compress, hss_reconstruct
from .models import beta_power_law
from .tensor import matricize, vectorize
from .ttn import (
    Ttno,
    apply_ttno,
    contract_to_dense,
    load_network,
    matricization_ranks,
    random_ttn,
    random_ttno,
    save_network,
    ttno_to_dense_matrix,
)

__all__ = ["CheckResult", "random_spec", "run_checks"]

TOL = 1e-12
RANK_TOL = 1e-10


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tol: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status}  {self.name:<38s} measured={self.value:.3e}  tol={self.tol:.1e}{extra}"


def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_spec(
    d: int,
    rng: np.random.Generator,
    n: int = 2,
    families: int = 1,
    single_site: bool = False,
) -> PairwiseHamiltonian:
    """Random complex β and site matrices."""
    fams = [
        InteractionFamily(np.triu(_crandn(rng, d, d), 1), [_crandn(rng, n, n) for _ in range(d)])
        for _ in range(families)
    ]
    ds = [_crandn(rng, n, n) for _ in range(d)] if single_site else None
    return PairwiseHamiltonian((n,) * d, fams, ds)


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    scale = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / scale) if scale else float(np.linalg.norm(a - b))


def _build(spec, tree: DimensionTree, single_site: str = "separate") -> Ttno:
    if tree.is_binary:
        return build_unstructured(spec, tree, single_site)
    return build_unstructured_mary(spec, tree, single_site)


def run_checks(
    tree: DimensionTree,
    seed: int = 0,
    corrupt: Optional[Callable[[Ttno], Ttno]] = None,
) -> list[CheckResult]:
    """Run every invariant check on ``tree``.

    ``corrupt`` is applied to each structured TTNO before comparison; it
    exists to confirm that the suite detects broken operators.
    """
    rng = np.random.default_rng(seed)
    d = tree.size
    mangle = corrupt or (lambda h: h)
    out: list[CheckResult] = []

    # Exact construction, with two families and single-site terms.
    spec = random_spec(d, rng, families=2, single_site=True)
    ref = dense_hamiltonian(spec)
    worst = max(
        _rel(ttno_to_dense_matrix(mangle(_build(spec, tree, mode))), ref)
        for mode in ("separate", "absorb")
    )
    out.append(CheckResult("exactness (unstructured)", worst <= TOL, worst, TOL))

    # Rank law: matricization ranks follow the block-row split of mat_L(t)(H).
    plain = random_spec(d, rng)
    h = mangle(_build(plain, tree))
    mranks = matricization_ranks(h, RANK_TOL)
    law = matricization_rank_law(plain, tree, RANK_TOL)
    block = hss_block_row_ranks(plain.families[0].beta, tree, RANK_TOL)
    bad = [f"{k}: {mranks[k]} != {want}" for k, want in law.items() if mranks[k] != want]
    # nodes where the plain "2 + rank of block row" count over-predicts
    short = [
        str(t.key)
        for t in tree.nodes()
        if not t.is_leaf and t is not tree and law[t.key] != 2 + block[t.key]
    ]
    detail = "; ".join(bad)
    if short and not bad:
        detail = f"one-site complement at {', '.join(short)}: rank is 1 + block-row rank"
    out.append(CheckResult("rank law (split of mat_L(t))", not bad, float(len(bad)), 0.0, detail))

    stored = h.ranks
    over = [k for k, r in mranks.items() if r > stored[k]]
    out.append(CheckResult("matricization rank <= stored rank", not over, float(len(over)), 0.0))

    # Binary recursion for h_t at every binary internal node.
    worst = 0.0
    for t in tree.subtrees():
        if len(t.children) == 2:
            worst = max(worst, _rel(binary_recursion_rhs(spec, t), oracle_h_tau(spec, t)))
    root_vec = vectorize(operator_tensor(ref, spec.site_dims))
    worst = max(worst, _rel(oracle_h_tau(spec, tree), root_vec))
    out.append(CheckResult("binary recursion of h_t", worst <= TOL, worst, TOL))

    # Subtree / complement split of mat_L(t)(H).
    op_tensor = operator_tensor(ref, spec.site_dims)
    worst = 0.0
    for t in tree.nodes():
        if t is tree:
            continue
        worst = max(worst, _rel(split_matricization(spec, t.leaves), matricize(op_tensor, t.leaves)))
    out.append(CheckResult("subtree/complement split", worst <= TOL, worst, TOL))

    # Applying a TTNO to a TTN.
    hr = random_ttno(tree, (2,) * d, 2, rng)
    x = random_ttn(tree, (2,) * d, 2, rng)
    lhs = vectorize(contract_to_dense(apply_ttno(mangle(hr), x)))
    rhs = ttno_to_dense_matrix(hr) @ vectorize(contract_to_dense(x))
    err = _rel(lhs, rhs)
    out.append(CheckResult("apply TTNO == dense matvec", err <= TOL, err, TOL))

    # Direct sum.
    ha, hb = random_ttno(tree, (2,) * d, 1, rng), random_ttno(tree, (2,) * d, 2, rng)
    err = _rel(ttno_to_dense_matrix(mangle(ttno_direct_sum(ha, hb))), ttno_to_dense_matrix(ha) + ttno_to_dense_matrix(hb))
    out.append(CheckResult("direct sum == sum of operators", err <= TOL, err, TOL))

    # Serialization round trip.
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "op.npz")
        save_network(path, h)
        back = load_network(path)
        same = (
            isinstance(back, Ttno)
            and back.site_dims == h.site_dims
            and all(np.array_equal(back.network.leaf_bases[k], v) for k, v in h.network.leaf_bases.items())
            and all(np.array_equal(back.network.transfers[k], v) for k, v in h.network.transfers.items())
        )
    out.append(CheckResult("serialization round trip", same, 0.0 if same else 1.0, 0.0))

    if not tree.is_binary:
        return out

    # HSS-based construction.
    hc, hss = build_hss_compressed(spec, tree, 0.0)
    err = _rel(ttno_to_dense_matrix(mangle(hc)), ref)
    out.append(CheckResult("compressed (eps=0) == exact", err <= TOL, err, TOL))

    power = PairwiseHamiltonian(spec.site_dims, (InteractionFamily(beta_power_law(d, 1.0), spec.families[0].ops),), spec.single_site)
    hp, hssp = build_hss_compressed(power, tree, 1e-8)
    limit = 2 + hssp[0].hss_rank + 1
    rep = max(hp.ranks.values())
    out.append(CheckResult("rank <= 2 + hss rank (+1 single-site)", rep <= limit, float(rep), float(limit)))

    beta = spec.families[0].beta
    worst_tri = max(
        float(np.abs(np.tril(hss_reconstruct(hss_compress(b, tree, e)))).max())
        for b in (beta, beta_power_law(d, 1.0))
        for e in (0.0, 1e-3)
    )
    out.append(CheckResult("HSS reconstruction strictly upper", worst_tri == 0.0, worst_tri, 0.0))

    err = _rel(hss_reconstruct(hss_compress(beta, tree, 0.0)), beta)
    out.append(CheckResult("HSS eps=0 round trip", err <= 1e-13, err, 1e-13))

    mism = []
    for b in (beta, beta_power_law(d, np.inf)):
        got = hss_compress(b, tree, RANK_TOL).hss_rank
        want = max(hss_block_row_ranks(b, tree, RANK_TOL).values())
        if got != want:
            mism.append(f"{got} != {want}")
    out.append(CheckResult("HSS rank == max block-row rank", not mism, float(len(mism)), 0.0, "; ".join(mism)))

    ks = [hss_compress(beta_power_law(d, 1.0), tree, e).hss_rank for e in (1e-12, 1e-8, 1e-4, 1e-1)]
    mono = all(a >= b for a, b in zip(ks, ks[1:]))
    out.append(CheckResult("HSS rank monotone in eps", mono, 0.0 if mono else 1.0, 0.0, f"ranks {ks}"))
    return out
