"""TTNO constructions for Hamiltonians with pairwise interactions.

The operator is

    Ĥ = Σ_k D^(k) + Σ_f Σ_{i<j} β_f(i, j) A_f^(i) A_f^(j),

where ``X^(k)`` acts on site ``k`` (site 1 is the rightmost Kronecker
factor). Every node ``t`` of the tree carries basis columns, in order:

* ``e``  -- vec of the identity on the sites of ``t``;
* ``h``  -- all interactions inside ``t`` (omitted when structurally zero);
* ``l``  -- the single-site sum inside ``t`` (``single_site="separate"``);
* per family, its ``a`` block: one column per site (unstructured) or the
  HSS-compressed columns ``a_t @ V_t`` (compressed).

With ``single_site="absorb"`` the single-site sum is folded into ``h`` and
no ``l`` column exists, which saves one rank at interior nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence

import numpy as np

from .dimtree import DimensionTree, Key
from .hss import HssMatrix, check_interaction, hss_compress, symmetrize
from .tensor import as_tensor, matricize, truncated_svd, vectorize
from .ttn import (
    DEFAULT_DENSE_CAP,
    DenseOracleTooLarge,
    TreeTensorNetwork,
    Ttno,
    contract_to_dense,
    ttno_to_dense_matrix,
)

__all__ = [
    "InteractionFamily",
    "PairwiseHamiltonian",
    "site_operator",
    "dense_hamiltonian",
    "operator_tensor",
    "e_vec",
    "a_vec",
    "pair_vec",
    "h_vec",
    "oracle_h_tau",
    "binary_recursion_rhs",
    "split_matricization",
    "matricization_rank_law",
    "build_unstructured",
    "build_unstructured_mary",
    "build_hss_compressed",
    "expected_rank",
    "ttno_direct_sum",
    "ErrorReport",
    "error_bound",
    "error_report",
    "matricized_operator",
]

SINGLE_SITE_MODES = ("separate", "absorb")


@dataclass(frozen=True, eq=False)
class InteractionFamily:
    """One sum ``Σ_{i<j} β(i,j) A^(i) A^(j)`` with per-site matrices ``ops``."""

    beta: np.ndarray
    ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "beta", check_interaction(self.beta))
        object.__setattr__(self, "ops", tuple(as_tensor(a) for a in self.ops))
        if len(self.ops) != self.beta.shape[0]:
            raise ValueError(f"{len(self.ops)} site matrices for a {self.beta.shape[0]}-site β")


@dataclass(frozen=True, eq=False)
class PairwiseHamiltonian:
    site_dims: tuple[int, ...]
    families: tuple[InteractionFamily, ...]
    single_site: Optional[tuple[np.ndarray, ...]] = None

    def __post_init__(self):
        dims = tuple(int(n) for n in self.site_dims)
        object.__setattr__(self, "site_dims", dims)
        object.__setattr__(self, "families", tuple(self.families))
        d = len(dims)
        for f, fam in enumerate(self.families):
            if fam.beta.shape[0] != d:
                raise ValueError(f"family {f}: β is {fam.beta.shape}, expected {d}x{d}")
            for ell, a in enumerate(fam.ops, start=1):
                if a.shape != (dims[ell - 1],) * 2:
                    raise ValueError(f"family {f}, site {ell}: matrix shape {a.shape}")
        if self.single_site is not None:
            ds = tuple(as_tensor(m) for m in self.single_site)
            if len(ds) != d:
                raise ValueError(f"{len(ds)} single-site matrices for {d} sites")
            for ell, m in enumerate(ds, start=1):
                if m.shape != (dims[ell - 1],) * 2:
                    raise ValueError(f"single-site matrix at site {ell} has shape {m.shape}")
            object.__setattr__(self, "single_site", ds)

    @property
    def d(self) -> int:
        return len(self.site_dims)

    def has_single_site(self, ell: Optional[int] = None) -> bool:
        if self.single_site is None:
            return False
        if ell is None:
            return any(np.any(m != 0) for m in self.single_site)
        return bool(np.any(self.single_site[ell - 1] != 0))


def matricization_rank_law(spec: PairwiseHamiltonian, tree: DimensionTree, tol: float = 1e-10) -> dict[Key, int]:
    """Generic rank of ``mat_L(t)(H)`` at every non-root node.

    The split of ``mat_L(t)(H)`` into ``h_t e^T + e_t h^T`` plus the
    ``β_s`` block-row term gives ``[h_t != 0] + [h_c != 0] + Σ_f rank β_s^f(t, c)``
    for the complement ``c``, assuming the site matrices are generic. This
    equals ``2 + rank`` unless one side is a single site without a
    single-site term (its ``h`` vanishes): leaves give 2, and a node whose
    complement is one site gives ``1 + rank``.
    """

    def h_nonzero(leaves: Sequence[int]) -> bool:
        if any(spec.has_single_site(ell) for ell in leaves):
            return True
        idx = np.array(leaves) - 1
        return any(np.any(f.beta[np.ix_(idx, idx)] != 0) for f in spec.families)

    out = {}
    for t in tree.nodes():
        if t is tree:
            continue
        comp = tree.complement_leaves(t)
        k = 0
        for fam in spec.families:
            blk = symmetrize(fam.beta)[np.ix_(np.array(t.leaves) - 1, np.array(comp) - 1)]
            k += truncated_svd(blk, tol)[3]
        out[t.key] = int(h_nonzero(t.leaves)) + int(h_nonzero(comp)) + k
    return out


# ----------------------------------------------------------------------------
# dense oracles


def _kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats, np.ones((1, 1), complex) if mats[0].ndim == 2 else np.ones(1, complex))


def site_operator(site_dims: Sequence[int], placed: dict[int, np.ndarray]) -> np.ndarray:
    """``⊗_{l=d..1} X_l`` with ``X_l = placed[l]`` or the identity."""
    mats = [placed.get(ell, np.eye(n)) for ell, n in reversed(list(enumerate(site_dims, start=1)))]
    return _kron_all([as_tensor(m) for m in mats])


def dense_hamiltonian(spec: PairwiseHamiltonian, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Brute-force Kronecker assembly of ``Ĥ``."""
    big = math.prod(spec.site_dims)
    if big * big > cap:
        raise DenseOracleTooLarge(f"dense oracle too large: {big * big} entries exceed cap {cap}")
    out = np.zeros((big, big), complex)
    if spec.single_site is not None:
        for ell, m in enumerate(spec.single_site, start=1):
            if np.any(m != 0):
                out += site_operator(spec.site_dims, {ell: m})
    for fam in spec.families:
        for i, j in zip(*np.nonzero(fam.beta)):
            out += fam.beta[i, j] * site_operator(
                spec.site_dims, {i + 1: fam.ops[i], j + 1: fam.ops[j]}
            )
    return out


def operator_tensor(hhat: np.ndarray, site_dims: Sequence[int]) -> np.ndarray:
    """Reshape ``Ĥ`` into the order-d tensor with mode sizes ``n_i**2``."""
    d = len(site_dims)
    t = np.reshape(hhat, list(site_dims) * 2, order="F")
    perm = [ax for i in range(d) for ax in (i, d + i)]
    return np.reshape(np.transpose(t, perm), [n * n for n in site_dims], order="F")


def _check_vec_cap(spec: PairwiseHamiltonian, leaves: Sequence[int], cap: int):
    size = math.prod([spec.site_dims[ell - 1] ** 2 for ell in leaves])
    if size > cap:
        raise DenseOracleTooLarge(f"dense oracle too large: {size} entries exceed cap {cap}")


def _chain(spec: PairwiseHamiltonian, leaves: Sequence[int], placed: dict[int, np.ndarray]) -> np.ndarray:
    vecs = [
        vectorize(placed[ell]) if ell in placed else vectorize(np.eye(spec.site_dims[ell - 1]))
        for ell in sorted(leaves, reverse=True)
    ]
    return _kron_all(vecs)


def e_vec(spec: PairwiseHamiltonian, leaves: Sequence[int]) -> np.ndarray:
    return _chain(spec, leaves, {})


def a_vec(spec: PairwiseHamiltonian, leaves: Sequence[int], i: int, family: int = 0) -> np.ndarray:
    return _chain(spec, leaves, {i: spec.families[family].ops[i - 1]})


def pair_vec(spec: PairwiseHamiltonian, leaves: Sequence[int], i: int, j: int, family: int = 0) -> np.ndarray:
    ops = spec.families[family].ops
    return _chain(spec, leaves, {i: ops[i - 1], j: ops[j - 1]})


def h_vec(
    spec: PairwiseHamiltonian,
    leaves: Sequence[int],
    single_site: bool = True,
    cap: int = DEFAULT_DENSE_CAP,
) -> np.ndarray:
    """Vectorized Hamiltonian restricted to ``leaves``, by direct summation."""
    leaves = sorted(leaves)
    _check_vec_cap(spec, leaves, cap)
    out = np.zeros(math.prod(spec.site_dims[ell - 1] ** 2 for ell in leaves), complex)
    for f, fam in enumerate(spec.families):
        for x, i in enumerate(leaves):
            for j in leaves[x + 1:]:
                if fam.beta[i - 1, j - 1] != 0:
                    out += fam.beta[i - 1, j - 1] * pair_vec(spec, leaves, i, j, f)
    if single_site and spec.single_site is not None:
        for ell in leaves:
            if spec.has_single_site(ell):
                out += _chain(spec, leaves, {ell: spec.single_site[ell - 1]})
    return out


def oracle_h_tau(spec: PairwiseHamiltonian, tau: DimensionTree, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """``h_t``: every pair term (and single-site term) inside ``tau``."""
    return h_vec(spec, tau.leaves, True, cap)


def binary_recursion_rhs(spec: PairwiseHamiltonian, tau: DimensionTree, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """``e_t2 ⊗ h_t1 + h_t2 ⊗ e_t1 + Σ β(i,j) a_t2^(j) ⊗ a_t1^(i)`` for binary ``tau``."""
    if len(tau.children) != 2:
        raise ValueError("binary recursion needs a node with two children")
    t1, t2 = tau.children
    _check_vec_cap(spec, tau.leaves, cap)
    out = np.kron(e_vec(spec, t2.leaves), h_vec(spec, t1.leaves, True, cap))
    out += np.kron(h_vec(spec, t2.leaves, True, cap), e_vec(spec, t1.leaves))
    for f, fam in enumerate(spec.families):
        for i in t1.leaves:
            for j in t2.leaves:
                if fam.beta[i - 1, j - 1] != 0:
                    out += fam.beta[i - 1, j - 1] * np.kron(
                        a_vec(spec, t2.leaves, j, f), a_vec(spec, t1.leaves, i, f)
                    )
    return out


def split_matricization(spec: PairwiseHamiltonian, leaves: Sequence[int], cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Three-term form of ``mat_L(t)(H)`` using the symmetrized couplings.

    ``h_t e_c^T + e_t h_c^T + Σ_{i in t, j in c} βs(i,j) a_t^(i) (a_c^(j))^T``
    with ``c`` the complement of ``leaves``.
    """
    inside = sorted(leaves)
    rest = [ell for ell in range(1, spec.d + 1) if ell not in inside]
    _check_vec_cap(spec, range(1, spec.d + 1), cap)
    out = np.outer(h_vec(spec, inside), e_vec(spec, rest))
    out += np.outer(e_vec(spec, inside), h_vec(spec, rest))
    for f, fam in enumerate(spec.families):
        bs = symmetrize(fam.beta)
        for i in inside:
            for j in rest:
                if bs[i - 1, j - 1] != 0:
                    out += bs[i - 1, j - 1] * np.outer(a_vec(spec, inside, i, f), a_vec(spec, rest, j, f))
    return out


# ----------------------------------------------------------------------------
# structured constructions


@dataclass
class _Layout:
    """Column positions of one node's basis."""

    h: Optional[int] = None
    l: Optional[int] = None
    a: list[slice] = field(default_factory=list)
    rank: int = 1  # column 0 is always e


class _Unstructured:
    """Identity nesting: every site keeps its own ``a`` column."""

    def __init__(self, beta: np.ndarray):
        self.beta = beta
        self.active = bool(np.any(beta != 0))

    def leaf_basis(self, ell: int) -> np.ndarray:
        return np.ones((1, 1 if self.active else 0), complex)

    def translation(self, t: DimensionTree, child_counts: Sequence[int]) -> np.ndarray:
        n = sum(child_counts)
        return np.eye(n, dtype=complex)

    def coupling(self, ti: DimensionTree, tj: DimensionTree) -> np.ndarray:
        if not self.active:
            return np.zeros((0, 0), complex)
        return self.beta[ti.lo - 1:ti.hi, tj.lo - 1:tj.hi]


class _Compressed:
    """Nesting and couplings taken from an HSS decomposition."""

    def __init__(self, hss: HssMatrix):
        self.hss = hss

    def leaf_basis(self, ell: int) -> np.ndarray:
        return self.hss.leaf_bases[ell]

    def translation(self, t: DimensionTree, child_counts: Sequence[int]) -> np.ndarray:
        return self.hss.translations[t.key]

    def coupling(self, ti: DimensionTree, tj: DimensionTree) -> np.ndarray:
        return self.hss.couplings[(ti.key, tj.key)]


def _check_mode(single_site: str):
    if single_site not in SINGLE_SITE_MODES:
        raise ValueError(f"single_site must be one of {SINGLE_SITE_MODES}, got {single_site!r}")


def _check_spec_tree(spec: PairwiseHamiltonian, tree: DimensionTree):
    if spec.d < 2:
        raise ValueError("pairwise Hamiltonian needs d >= 2")
    if tree.lo != 1 or tree.hi != spec.d:
        raise ValueError(f"tree covers {tree.lo}..{tree.hi}, Hamiltonian has d={spec.d}")


def _assemble(spec: PairwiseHamiltonian, tree: DimensionTree, structures, single_site: str) -> Ttno:
    absorb = single_site == "absorb"
    layouts: dict[Key, _Layout] = {}
    bases: dict[int, np.ndarray] = {}
    transfers: dict[Key, np.ndarray] = {}

    for t in tree.postorder():
        is_root = t is tree
        lay = _Layout()
        if t.is_leaf:
            ell = t.lo
            n = spec.site_dims[ell - 1]
            cols = [vectorize(np.eye(n))]
            if spec.has_single_site(ell):
                vd = vectorize(spec.single_site[ell - 1])
                if absorb:
                    lay.h = len(cols)
                else:
                    lay.l = len(cols)
                cols.append(vd)
            for fam, st in zip(spec.families, structures):
                v = st.leaf_basis(ell)
                start = len(cols)
                cols.extend((vectorize(fam.ops[ell - 1])[:, None] @ v).T)
                lay.a.append(slice(start, len(cols)))
            lay.rank = len(cols)
            bases[ell] = np.stack(cols, axis=1)
            layouts[t.key] = lay
            continue

        kids = [layouts[c.key] for c in t.children]
        m = len(t.children)
        couplings = []
        for st in structures:
            blocks = {}
            for i in range(m):
                for j in range(i + 1, m):
                    if isinstance(st, _Compressed) and m != 2:
                        raise ValueError("HSS requires binary tree")
                    blocks[(i, j)] = st.coupling(t.children[i], t.children[j])
            couplings.append(blocks)
        has_h = any(k.h is not None for k in kids) or any(
            np.any(blk != 0) for blocks in couplings for blk in blocks.values()
        )
        has_l = any(k.l is not None for k in kids)

        if is_root:
            lay.rank = 1
            lay.h = 0 if has_h else None
            lay.l = 0 if has_l else None
            out_a: list[Optional[np.ndarray]] = [None] * len(structures)
        else:
            pos = 1
            if has_h:
                lay.h, pos = pos, pos + 1
            if has_l:
                lay.l, pos = pos, pos + 1
            out_a = []
            for f, st in enumerate(structures):
                counts = [k.a[f].stop - k.a[f].start for k in kids]
                r = st.translation(t, counts)
                if r.shape[0] != sum(counts):
                    raise ValueError(f"node {t.key}: translation has {r.shape[0]} rows, expected {sum(counts)}")
                out_a.append(r)
                lay.a.append(slice(pos, pos + r.shape[1]))
                pos += r.shape[1]
            lay.rank = pos

        c = np.zeros([k.rank for k in kids] + [lay.rank], complex)
        e_idx = [0] * m

        def at(changes: dict[int, object], out) -> tuple:
            idx = list(e_idx)
            for i, v in changes.items():
                idx[i] = v
            return tuple(idx) + (out,)

        if not is_root:
            c[at({}, 0)] = 1.0
        if lay.h is not None:
            for i, k in enumerate(kids):
                if k.h is not None:
                    c[at({i: k.h}, lay.h)] += 1.0
            for f, blocks in enumerate(couplings):
                for (i, j), blk in blocks.items():
                    if blk.size:
                        c[at({i: kids[i].a[f], j: kids[j].a[f]}, lay.h)] += blk
        if lay.l is not None:
            for i, k in enumerate(kids):
                if k.l is not None:
                    c[at({i: k.l}, lay.l)] += 1.0
        for f, r in enumerate(out_a):
            if r is None or r.size == 0:
                continue
            off = 0
            for i, k in enumerate(kids):
                cnt = k.a[f].stop - k.a[f].start
                if cnt:
                    c[at({i: k.a[f]}, lay.a[f])] = r[off:off + cnt]
                off += cnt
        transfers[t.key] = c
        layouts[t.key] = lay

    net = TreeTensorNetwork(tree, bases, transfers)
    return Ttno(net, spec.site_dims)


def build_unstructured_mary(spec: PairwiseHamiltonian, tree: DimensionTree, single_site: str = "separate") -> Ttno:
    """Exact TTNO on any dimension tree; interior ranks ``2 + d_t`` per family."""
    _check_mode(single_site)
    _check_spec_tree(spec, tree)
    return _assemble(spec, tree, [_Unstructured(f.beta) for f in spec.families], single_site)


def build_unstructured(spec: PairwiseHamiltonian, tree: DimensionTree, single_site: str = "separate") -> Ttno:
    """Exact TTNO on a binary tree."""
    _check_spec_tree(spec, tree)
    if not tree.is_binary:
        raise ValueError("build_unstructured needs a binary tree; use build_unstructured_mary")
    return build_unstructured_mary(spec, tree, single_site)


def build_hss_compressed(
    spec: PairwiseHamiltonian,
    tree: DimensionTree,
    eps: float,
    single_site: str = "separate",
    norm: str = "block",
) -> tuple[Ttno, list[HssMatrix]]:
    """TTNO from HSS approximations of every family's β.

    The result represents exactly the Hamiltonian with each β replaced by
    its HSS reconstruction; interior ranks are ``2 + Σ_f k_t^f`` plus one
    for the separate single-site column.
    """
    _check_mode(single_site)
    _check_spec_tree(spec, tree)
    if not tree.is_binary:
        raise ValueError("HSS requires binary tree")
    hss = [hss_compress(f.beta, tree, eps, norm) for f in spec.families]
    return _assemble(spec, tree, [_Compressed(h) for h in hss], single_site), hss


def expected_rank(spec: PairwiseHamiltonian, hss: Sequence[HssMatrix], single_site: str = "separate") -> int:
    """Rank predicted from HSS ranks: ``2 + max_t Σ_f k_t^f`` (+1 separate single-site)."""
    tree = hss[0].tree if hss else None
    if tree is None:
        k = 0
    else:
        k = max(
            (sum(h.ranks[t.key] for h in hss) for t in tree.nodes() if t is not tree),
            default=0,
        )
    extra = 1 if spec.has_single_site() and single_site == "separate" else 0
    return 2 + k + extra


def ttno_direct_sum(a: Ttno, b: Ttno) -> Ttno:
    """TTNO of the sum of two operators on the same tree."""
    if str(a.tree) != str(b.tree):
        raise ValueError("trees must coincide")
    if a.site_dims != b.site_dims:
        raise ValueError("site dimensions must coincide")
    tree = a.tree
    na, nb = a.network, b.network
    bases = {ell: np.hstack([na.leaf_bases[ell], nb.leaf_bases[ell]]) for ell in tree.leaves}
    transfers = {}
    for t in tree.subtrees():
        ca, cb = na.transfers[t.key], nb.transfers[t.key]
        shape = [x + y for x, y in zip(ca.shape, cb.shape)]
        if t is tree:
            shape[-1] = 1
        c = np.zeros(shape, complex)
        c[tuple(slice(0, s) for s in ca.shape)] = ca
        off = list(ca.shape)
        if t is tree:
            off[-1] = 0
        c[tuple(slice(o, o + s) for o, s in zip(off, cb.shape))] = cb
        transfers[t.key] = c
    return Ttno(TreeTensorNetwork(tree, bases, transfers), a.site_dims)


@dataclass(frozen=True)
class ErrorReport:
    absolute: float
    relative: float
    bound: Optional[float] = None  # error-bound right-hand side with C = 1

    @property
    def measured_constant(self) -> Optional[float]:
        if self.bound is None or self.bound == 0:
            return None
        return self.absolute / self.bound


def _norm(m: np.ndarray, norm: str) -> float:
    if norm == "frobenius":
        return float(np.linalg.norm(m))
    if norm == "spectral":
        return float(np.linalg.norm(m, 2))
    raise ValueError(f"unknown norm {norm!r}")


def error_bound(spec: PairwiseHamiltonian, hss: Sequence[HssMatrix], eps: float) -> float:
    """``Σ_f h(tree) √k ‖β_f‖_F (Σ_{i<j} ‖A_i‖²‖A_j‖²)^{1/2} ε`` with C = 1."""
    total = 0.0
    for fam, h in zip(spec.families, hss):
        norms = np.array([np.linalg.norm(a, 2) ** 2 for a in fam.ops])
        pair_sum = (norms.sum() ** 2 - (norms**2).sum()) / 2
        total += h.tree.height * math.sqrt(h.hss_rank) * np.linalg.norm(fam.beta) * math.sqrt(pair_sum) * eps
    return float(total)


def error_report(
    spec: PairwiseHamiltonian,
    h: Ttno,
    norm: str = "frobenius",
    hss: Optional[Sequence[HssMatrix]] = None,
    eps: Optional[float] = None,
    reference: Optional[np.ndarray] = None,
    cap: int = DEFAULT_DENSE_CAP,
) -> ErrorReport:
    """Compare ``h`` against a dense reference (the exact Hamiltonian by default)."""
    ref = dense_hamiltonian(spec, cap) if reference is None else reference
    diff = ttno_to_dense_matrix(h, cap) - ref
    absolute = _norm(diff, norm)
    scale = _norm(ref, norm)
    relative = absolute / scale if scale else absolute
    bound = error_bound(spec, hss, eps) if hss is not None and eps is not None else None
    return ErrorReport(absolute, relative, bound)


def matricized_operator(h: Ttno, leaves: Sequence[int], cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """``mat_leaves`` of the TTNO's operator tensor."""
    return matricize(contract_to_dense(h.network, cap), leaves)
