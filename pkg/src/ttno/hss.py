"""HSS compression of strictly upper-triangular interaction matrices.

The row and column bases are shared: a node's basis ``V_t`` spans the
block row ``βs(t, ¬t)`` of the symmetrized matrix ``βs = β + βᵀ``. Bases
are nested, ``V_t = blkdiag(V_t1, V_t2) @ R_t``, and orthonormal. Sibling
blocks are stored as couplings with

    β(t1, t2) ≈ V_t1 @ S_t1t2 @ V_t2.T

The plain transpose on the right is what the TTNO construction consumes
(``(B ⊗ A) vec(S) = vec(A S Bᵀ)``); for real β it coincides with ``V*``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .dimtree import DimensionTree, Key
from .tensor import truncated_svd

__all__ = [
    "HssMatrix",
    "check_interaction",
    "symmetrize",
    "block_row",
    "hss_compress",
    "hss_reconstruct",
    "hss_block_row_ranks",
    "hss_rank_table",
    "write_rank_csv",
]


def check_interaction(beta) -> np.ndarray:
    """Validate and return ``beta`` as a strictly upper-triangular complex matrix."""
    b = np.asarray(beta, dtype=np.complex128)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError(f"interaction matrix must be square, got shape {b.shape}")
    if np.any(np.tril(b) != 0):
        raise ValueError("interaction matrix must be strictly upper triangular")
    return b


def symmetrize(beta) -> np.ndarray:
    b = np.asarray(beta)
    return b + b.T


def block_row(beta_s: np.ndarray, tree: DimensionTree, key: Key) -> np.ndarray:
    """``βs(t, ¬t)`` with the complement columns in increasing order."""
    lo, hi = key
    rows = np.arange(lo - 1, hi)
    cols = np.array([j - 1 for j in tree.complement_leaves(key)], dtype=int)
    return beta_s[np.ix_(rows, cols)]


@dataclass(frozen=True, eq=False)
class HssMatrix:
    tree: DimensionTree
    leaf_bases: Mapping[int, np.ndarray]
    translations: Mapping[Key, np.ndarray]
    couplings: Mapping[tuple[Key, Key], np.ndarray]
    ranks: Mapping[Key, int]

    @property
    def hss_rank(self) -> int:
        return max((k for key, k in self.ranks.items() if key != self.tree.key), default=0)

    @property
    def d(self) -> int:
        return self.tree.size

    def basis(self, key: Key) -> np.ndarray:
        """Explicit ``V_t`` (``d_t x k_t``) expanded from the nested form."""
        t = self.tree.find(key)
        if t.is_leaf:
            return self.leaf_bases[t.lo]
        if key not in self.translations:  # the root carries no basis
            return np.zeros((t.size, 0), complex)
        v1, v2 = (self.basis(c.key) for c in t.children)
        blk = np.zeros((v1.shape[0] + v2.shape[0], v1.shape[1] + v2.shape[1]), complex)
        blk[: v1.shape[0], : v1.shape[1]] = v1
        blk[v1.shape[0]:, v1.shape[1]:] = v2
        return blk @ self.translations[key]


def _require_binary(tree: DimensionTree):
    if not tree.is_binary:
        raise ValueError("HSS requires binary tree")


def hss_compress(beta, tree: DimensionTree, eps: float, norm: str = "block") -> HssMatrix:
    """Bottom-up SVD compression at tolerance ``eps``.

    Parameters
    ----------
    beta : (d, d) array_like
        Strictly upper-triangular interaction matrix.
    tree : DimensionTree
        Binary tree over ``1..d``.
    eps : float
        With ``norm="block"`` a node keeps the singular values of its
        (projected) block row above ``eps`` times that block row's norm;
        ``norm="global"`` thresholds against ``eps * ||βs||_2`` instead.
    """
    b = check_interaction(beta)
    d = b.shape[0]
    if tree.lo != 1 or tree.hi != d:
        raise ValueError(f"tree covers {tree.lo}..{tree.hi}, matrix has d={d}")
    _require_binary(tree)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    bs = symmetrize(b)
    if norm == "block":
        mode, tol = "relative", eps
    elif norm == "global":
        mode = "absolute"
        tol = eps * (np.linalg.norm(bs, 2) if d > 1 else 0.0)
    else:
        raise ValueError(f"unknown norm {norm!r}")

    leaf_bases: dict[int, np.ndarray] = {}
    translations: dict[Key, np.ndarray] = {}
    couplings: dict[tuple[Key, Key], np.ndarray] = {}
    ranks: dict[Key, int] = {}
    explicit: dict[Key, np.ndarray] = {}

    for t in tree.postorder():
        if t is tree:
            ranks[t.key] = 0
        elif t.is_leaf:
            k = truncated_svd(block_row(bs, tree, t.key), tol, mode)[3]
            v = np.ones((1, k), complex)
            leaf_bases[t.lo] = v
            explicit[t.key] = v
            ranks[t.key] = k
        else:
            v1, v2 = (explicit[c.key] for c in t.children)
            n1 = v1.shape[0]
            row = block_row(bs, tree, t.key)
            projected = np.vstack([v1.conj().T @ row[:n1], v2.conj().T @ row[n1:]])
            r, _, _, k = truncated_svd(projected, tol, mode)
            translations[t.key] = r
            ranks[t.key] = k
            blk = np.zeros((t.size, v1.shape[1] + v2.shape[1]), complex)
            blk[:n1, : v1.shape[1]] = v1
            blk[n1:, v1.shape[1]:] = v2
            explicit[t.key] = blk @ r
        if not t.is_leaf:
            c1, c2 = t.children
            v1, v2 = explicit[c1.key], explicit[c2.key]
            sub = b[c1.lo - 1:c1.hi, c2.lo - 1:c2.hi]
            couplings[(c1.key, c2.key)] = v1.conj().T @ sub @ v2.conj()
    return HssMatrix(tree, leaf_bases, translations, couplings, ranks)


def hss_reconstruct(h: HssMatrix) -> np.ndarray:
    """Dense strictly upper-triangular ``β_k``."""
    d = h.d
    out = np.zeros((d, d), complex)
    bases: dict[Key, np.ndarray] = {}
    for t in h.tree.postorder():
        if t.is_leaf:
            bases[t.key] = h.leaf_bases[t.lo]
            continue
        c1, c2 = t.children
        v1, v2 = bases[c1.key], bases[c2.key]
        out[c1.lo - 1:c1.hi, c2.lo - 1:c2.hi] = v1 @ h.couplings[(c1.key, c2.key)] @ v2.T
        if t is not h.tree:
            bases[t.key] = _nest(v1, v2, h.translations[t.key])
    return out


def _nest(v1: np.ndarray, v2: np.ndarray, r: np.ndarray) -> np.ndarray:
    return np.vstack([v1 @ r[: v1.shape[1]], v2 @ r[v1.shape[1]:]])


def hss_block_row_ranks(beta, tree: DimensionTree, eps: float) -> dict[Key, int]:
    """Numerical rank of every HSS block row ``βs(t, ¬t)`` (root excluded)."""
    bs = symmetrize(check_interaction(beta))
    return {
        t.key: truncated_svd(block_row(bs, tree, t.key), eps)[3]
        for t in tree.nodes()
        if t is not tree
    }


def hss_rank_table(h: HssMatrix, beta) -> list[dict]:
    """Per-node diagnostics: ``k_t``, block-row ``σ_1`` and ``σ_{k+1}``."""
    bs = symmetrize(check_interaction(beta))
    rows = []
    for t in h.tree.nodes():
        if t is h.tree:
            continue
        s = np.linalg.svd(block_row(bs, h.tree, t.key), compute_uv=False)
        k = h.ranks[t.key]
        rows.append(
            {
                "node": f"{t.lo}-{t.hi}",
                "k": k,
                "sigma_1": float(s[0]) if s.size else 0.0,
                "sigma_next": float(s[k]) if k < s.size else 0.0,
            }
        )
    return rows


def write_rank_csv(h: HssMatrix, beta, fh: Optional[io.TextIOBase] = None) -> str:
    """Write :func:`hss_rank_table` as CSV; returns the text."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, ["node", "k", "sigma_1", "sigma_next"], lineterminator="\n")
    writer.writeheader()
    for row in hss_rank_table(h, beta):
        writer.writerow({**row, "sigma_1": repr(row["sigma_1"]), "sigma_next": repr(row["sigma_next"])})
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
