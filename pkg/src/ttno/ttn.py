"""Tree tensor networks (TTN) and tree tensor network operators (TTNO).

A :class:`TreeTensorNetwork` stores a basis matrix ``U_l`` (``n_l x r_l``)
for every leaf and a transfer tensor ``C_t`` of shape
``(r_t1, ..., r_tm, r_t)`` for every internal node. The root rank is 1 and
its trailing singleton is kept, so every transfer tensor has order ``m+1``.

A :class:`Ttno` is a network over mode sizes ``n_i**2``; mode ``i``'s index
merges (row, column) of a site operator with the row index fastest, i.e.
the leaf columns are ``vec`` of ``n_i x n_i`` matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .dimtree import DimensionTree, Key, parse_tree
from .tensor import as_tensor, matricize, mode_product, tensor_kronecker, truncated_svd, vectorize

__all__ = [
    "DEFAULT_DENSE_CAP",
    "DenseOracleTooLarge",
    "TreeTensorNetwork",
    "Ttno",
    "RankReport",
    "contract_to_dense",
    "ttno_to_dense_matrix",
    "apply_ttno",
    "rank_report",
    "matricization_ranks",
    "identity_ttno",
    "rank_one_ttno",
    "random_ttn",
    "random_ttno",
    "save_network",
    "load_network",
]

DEFAULT_DENSE_CAP = 2**24
COMPLEX_BYTES = 16


class DenseOracleTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TreeTensorNetwork:
    tree: DimensionTree
    leaf_bases: Mapping[int, np.ndarray]
    transfers: Mapping[Key, np.ndarray]

    def __post_init__(self):
        bases = {int(ell): as_tensor(u) for ell, u in self.leaf_bases.items()}
        transfers = {tuple(k): as_tensor(c) for k, c in self.transfers.items()}
        object.__setattr__(self, "leaf_bases", bases)
        object.__setattr__(self, "transfers", transfers)
        root = self.tree
        if root.is_leaf:
            u = bases.get(root.lo)
            if u is None or u.ndim != 2 or u.shape[1] != 1:
                raise ValueError("single-leaf network needs an n x 1 basis")
            return
        if set(bases) != set(root.leaves):
            raise ValueError(f"leaf bases given for {sorted(bases)}, tree has {root.leaves}")
        keys = {t.key for t in root.subtrees()}
        if set(transfers) != keys:
            raise ValueError(f"transfer tensors given for {sorted(transfers)}, tree needs {sorted(keys)}")
        for ell, u in bases.items():
            if u.ndim != 2:
                raise ValueError(f"leaf {ell}: basis must be a matrix, got shape {u.shape}")
        if transfers[root.key].ndim == len(root.children):
            transfers[root.key] = transfers[root.key][..., None]
        for t in root.subtrees():
            c = transfers[t.key]
            if c.ndim != len(t.children) + 1:
                raise ValueError(f"node {t.key}: transfer tensor must have order {len(t.children) + 1}")
            for i, child in enumerate(t.children):
                if c.shape[i] != self.rank(child.key):
                    raise ValueError(
                        f"node {t.key}: mode {i + 1} has size {c.shape[i]}, "
                        f"child {child.key} has rank {self.rank(child.key)}"
                    )
        if transfers[root.key].shape[-1] != 1:
            raise ValueError("root rank must be 1")

    def rank(self, key: Key) -> int:
        lo, hi = key
        if lo == hi:
            return self.leaf_bases[lo].shape[1]
        return self.transfers[(lo, hi)].shape[-1]

    @property
    def ranks(self) -> dict[Key, int]:
        return {t.key: self.rank(t.key) for t in self.tree.nodes()}

    @property
    def mode_dims(self) -> tuple[int, ...]:
        return tuple(self.leaf_bases[ell].shape[0] for ell in self.tree.leaves)

    @property
    def d(self) -> int:
        return self.tree.size


@dataclass(frozen=True, eq=False)
class Ttno:
    network: TreeTensorNetwork
    site_dims: tuple[int, ...]

    def __post_init__(self):
        site_dims = tuple(int(n) for n in self.site_dims)
        object.__setattr__(self, "site_dims", site_dims)
        if tuple(n * n for n in site_dims) != self.network.mode_dims:
            raise ValueError(
                f"mode sizes {self.network.mode_dims} are not the squares of site sizes {site_dims}"
            )

    @property
    def tree(self) -> DimensionTree:
        return self.network.tree

    @property
    def ranks(self) -> dict[Key, int]:
        return self.network.ranks

    def leaf_operators(self, ell: int) -> list[np.ndarray]:
        """Columns of leaf ``ell``'s basis reshaped to ``n x n`` matrices."""
        n = self.site_dims[ell - 1]
        u = self.network.leaf_bases[ell]
        return [np.reshape(u[:, j], (n, n), order="F") for j in range(u.shape[1])]


@dataclass(frozen=True)
class RankReport:
    ranks: dict[Key, int]
    representation_rank: int
    parameter_count: int

    @property
    def memory_bytes(self) -> int:
        return COMPLEX_BYTES * self.parameter_count


NetworkLike = Union[TreeTensorNetwork, Ttno]


def _net(x: NetworkLike) -> TreeTensorNetwork:
    return x.network if isinstance(x, Ttno) else x


def _check_cap(size: int, cap: int):
    if size > cap:
        raise DenseOracleTooLarge(f"dense oracle too large: {size} entries exceed cap {cap}")


def _basis(x: TreeTensorNetwork, t: DimensionTree, cap: int) -> np.ndarray:
    if t.is_leaf:
        return x.leaf_bases[t.lo]
    c = x.transfers[t.key]
    for i, child in enumerate(t.children, start=1):
        rows = math.prod(x.mode_dims[ell - 1] for ell in child.leaves)
        _check_cap(c.size // max(c.shape[i - 1], 1) * rows, cap)
        c = mode_product(c, _basis(x, child, cap), i)
    return np.reshape(c, (-1, c.shape[-1]), order="F")


def contract_to_dense(x: NetworkLike, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Full tensor represented by the network (root singleton dropped)."""
    x = _net(x)
    dims = x.mode_dims
    _check_cap(math.prod(dims), cap)
    u = _basis(x, x.tree, cap)
    return np.reshape(u[:, 0], dims, order="F")


def ttno_to_dense_matrix(h: Ttno, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Matrix ``Ĥ`` with ``Ĥ @ vec(X) == vec(H(X))``."""
    site = h.site_dims
    big = math.prod(site)
    _check_cap(big * big, cap)
    t = contract_to_dense(h.network, cap)
    d = len(site)
    split = np.reshape(t, [s for n in site for s in (n, n)], order="F")
    perm = [2 * i for i in range(d)] + [2 * i + 1 for i in range(d)]
    return np.reshape(np.transpose(split, perm), (big, big), order="F")


def apply_ttno(h: Ttno, x: TreeTensorNetwork) -> TreeTensorNetwork:
    """``H(X)`` as a network whose ranks are the products of both ranks."""
    if str(h.tree) != str(x.tree):
        raise ValueError("trees must coincide")
    if h.site_dims != x.mode_dims:
        raise ValueError(f"operator acts on {h.site_dims}, network has modes {x.mode_dims}")
    bases = {
        ell: np.hstack([a @ u for a in h.leaf_operators(ell)]) if h.network.rank((ell, ell)) else
        np.zeros((x.leaf_bases[ell].shape[0], 0), complex)
        for ell, u in x.leaf_bases.items()
    }
    transfers = {
        key: tensor_kronecker(c, x.transfers[key]) for key, c in h.network.transfers.items()
    }
    return TreeTensorNetwork(x.tree, bases, transfers)


def rank_report(x: NetworkLike) -> RankReport:
    x = _net(x)
    count = sum(u.size for u in x.leaf_bases.values()) + sum(c.size for c in x.transfers.values())
    ranks = x.ranks
    return RankReport(ranks, max(ranks.values()), int(count))


def matricization_ranks(x: NetworkLike, tol: float = 1e-10, cap: int = DEFAULT_DENSE_CAP) -> dict[Key, int]:
    """Numerical rank of ``mat_L(t)(X)`` for every node ``t``."""
    x = _net(x)
    full = contract_to_dense(x, cap)
    out = {}
    for t in x.tree.nodes():
        m = matricize(full, t.leaves) if full.ndim else full.reshape(1, 1)
        out[t.key] = truncated_svd(m, tol)[3]
    return out


def _ones_core(order: int) -> np.ndarray:
    return np.ones((1,) * order, dtype=complex)


def rank_one_ttno(tree: DimensionTree, mats: Sequence[np.ndarray]) -> Ttno:
    """TTNO of ``X -> X ×_1 A_1 ... ×_d A_d``: leaves ``vec(A_l)``, all cores 1."""
    mats = [as_tensor(a) for a in mats]
    bases = {ell: vectorize(mats[ell - 1])[:, None] for ell in tree.leaves}
    transfers = {t.key: _ones_core(len(t.children) + 1) for t in tree.subtrees()}
    return Ttno(TreeTensorNetwork(tree, bases, transfers), tuple(a.shape[0] for a in mats))


def identity_ttno(tree: DimensionTree, site_dims: Sequence[int]) -> Ttno:
    return rank_one_ttno(tree, [np.eye(n) for n in site_dims])


def random_ttn(
    tree: DimensionTree,
    mode_dims: Sequence[int],
    rank: Union[int, Mapping[Key, int]] = 2,
    rng: Optional[np.random.Generator] = None,
) -> TreeTensorNetwork:
    """Random complex network; ``rank`` is a constant or a per-node map."""
    rng = np.random.default_rng() if rng is None else rng

    def r(t: DimensionTree) -> int:
        if t is tree:
            return 1
        return rank[t.key] if isinstance(rank, Mapping) else int(rank)

    def crandn(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    bases = {t.lo: crandn(mode_dims[t.lo - 1], r(t)) for t in tree.leaf_nodes()}
    transfers = {
        t.key: crandn(*[r(c) for c in t.children], r(t)) for t in tree.subtrees()
    }
    return TreeTensorNetwork(tree, bases, transfers)


def random_ttno(
    tree: DimensionTree,
    site_dims: Sequence[int],
    rank: Union[int, Mapping[Key, int]] = 2,
    rng: Optional[np.random.Generator] = None,
) -> Ttno:
    net = random_ttn(tree, [n * n for n in site_dims], rank, rng)
    return Ttno(net, tuple(site_dims))


_FORMAT = "ttn-npz-1"


def save_network(path, x: NetworkLike) -> None:
    """Write a network (or TTNO) to an ``.npz`` archive."""
    net = _net(x)
    arrays = {
        "format": np.array(_FORMAT),
        "tree": np.array(str(net.tree)),
    }
    if isinstance(x, Ttno):
        arrays["site_dims"] = np.array(x.site_dims, dtype=np.int64)
    for ell, u in net.leaf_bases.items():
        arrays[f"leaf_{ell}"] = u
    for (lo, hi), c in net.transfers.items():
        arrays[f"transfer_{lo}_{hi}"] = c
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_network(path) -> NetworkLike:
    with np.load(path, allow_pickle=False) as z:
        if "format" not in z or str(z["format"]) != _FORMAT:
            raise ValueError(f"{path}: not a {_FORMAT} archive")
        tree = parse_tree(str(z["tree"]))
        bases, transfers = {}, {}
        for name in z.files:
            if name.startswith("leaf_"):
                bases[int(name[5:])] = z[name]
            elif name.startswith("transfer_"):
                lo, hi = name[9:].split("_")
                transfers[(int(lo), int(hi))] = z[name]
        net = TreeTensorNetwork(tree, bases, transfers)
        if "site_dims" in z:
            return Ttno(net, tuple(int(n) for n in z["site_dims"]))
    return net
