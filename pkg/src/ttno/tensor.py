"""Dense complex tensor algebra.

Tensors are plain ``numpy`` arrays of dtype ``complex128``. All linear
orderings are column-major (first index fastest), so that

    vec(A @ X @ B.T) == kron(B, A) @ vec(X)

holds for matrices, and merged indices follow reverse lexicographic order.
Mode numbers passed to :func:`matricize` are 1-based, as are tree leaves.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "as_tensor",
    "vectorize",
    "matricize",
    "unmatricize",
    "mode_product",
    "unfold_mode_product",
    "tensor_kronecker",
    "truncated_svd",
]


def as_tensor(t) -> np.ndarray:
    return np.asarray(t, dtype=np.complex128)


def vectorize(t) -> np.ndarray:
    """Column-major vectorization ``vec(t)``."""
    return np.reshape(as_tensor(t), -1, order="F")


def _check_modes(modes: Sequence[int], order: int) -> list[int]:
    ms = sorted(set(int(m) for m in modes))
    if not ms or ms[0] < 1 or ms[-1] > order or len(ms) != len(list(modes)):
        raise ValueError(f"invalid mode set {list(modes)} for order-{order} tensor")
    return ms


def matricize(t, modes: Sequence[int]) -> np.ndarray:
    """Return ``mat_I(t)``: rows merge the modes in ``modes``, columns the rest.

    Within rows and within columns the smallest mode index varies fastest.

    >>> t = np.arange(24).reshape((2, 3, 4), order="F")
    >>> matricize(t, [1, 3]).shape
    (8, 3)
    """
    t = as_tensor(t)
    rows = _check_modes(modes, t.ndim)
    cols = [m for m in range(1, t.ndim + 1) if m not in rows]
    perm = [m - 1 for m in rows + cols]
    nr = math.prod([t.shape[m - 1] for m in rows])
    nc = math.prod([t.shape[m - 1] for m in cols])
    return np.reshape(np.transpose(t, perm), (nr, nc), order="F")


def unmatricize(m, modes: Sequence[int], shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`matricize` for a tensor of the given ``shape``."""
    shape = tuple(int(s) for s in shape)
    rows = _check_modes(modes, len(shape))
    cols = [k for k in range(1, len(shape) + 1) if k not in rows]
    perm = [k - 1 for k in rows + cols]
    permuted = np.reshape(as_tensor(m), [shape[p] for p in perm], order="F")
    return np.transpose(permuted, np.argsort(perm))


def mode_product(t, u, mode: int) -> np.ndarray:
    """``t ×_mode u`` with ``mode`` 1-based; ``u`` acts on the mode index."""
    t = as_tensor(t)
    u = as_tensor(u)
    ax = mode - 1
    if u.ndim != 2 or u.shape[1] != t.shape[ax]:
        raise ValueError(
            f"mode {mode}: factor has {u.shape[-1] if u.ndim else 0} columns, "
            f"tensor mode size is {t.shape[ax]}"
        )
    out = np.tensordot(u, t, axes=([1], [ax]))
    return np.moveaxis(out, 0, ax)


def unfold_mode_product(c, factors: Sequence[Optional[np.ndarray]]) -> np.ndarray:
    """Tucker product ``C ×_1 U_1 ×_2 ... ×_m U_m``.

    ``factors`` may be shorter than the order of ``c``; trailing modes and
    modes with a ``None`` factor are left untouched.
    """
    out = as_tensor(c)
    if len(factors) > out.ndim:
        raise ValueError(f"{len(factors)} factors for an order-{out.ndim} tensor")
    for i, u in enumerate(factors, start=1):
        if u is None:
            continue
        u = as_tensor(u)
        if u.ndim == 1:
            u = u[:, None]
        if u.shape[1] != out.shape[i - 1]:
            raise ValueError(
                f"dimension mismatch in mode {i}: factor has {u.shape[1]} columns, "
                f"core mode size is {out.shape[i - 1]}"
            )
        out = mode_product(out, u, i)
    return out


def tensor_kronecker(a, b) -> np.ndarray:
    """Element-wise tensor Kronecker product, ``b``'s indices fastest.

    ``C[j_k + i_k * m_k, ...] = A[i_1, ...] * B[j_1, ...]`` (0-based), which
    reduces to ``np.kron`` for vectors and matrices.
    """
    a = as_tensor(a)
    b = as_tensor(b)
    if a.ndim != b.ndim:
        raise ValueError(f"order mismatch: {a.ndim} vs {b.ndim}")
    d = a.ndim
    outer = np.multiply.outer(b, a)  # (m_1..m_d, n_1..n_d)
    perm = [ax for k in range(d) for ax in (k, d + k)]
    shape = tuple(na * nb for na, nb in zip(a.shape, b.shape))
    return np.reshape(np.transpose(outer, perm), shape, order="F")


def truncated_svd(m, tol: float = 0.0, mode: str = "relative", rank: Optional[int] = None):
    """Truncated SVD ``m ≈ U @ diag(s) @ Vh``.

    Parameters
    ----------
    m : array_like, shape (p, q)
    tol : float
        Threshold. ``"relative"`` keeps singular values ``> tol * s[0]``,
        ``"absolute"`` keeps those ``> tol``. Values equal to the threshold
        are dropped, so ``k`` is the smallest integer with
        ``s[k] <= threshold``.
    mode : {"relative", "absolute", "rank"}
        ``"rank"`` keeps exactly ``min(rank, len(s))`` triplets.
    rank : int, optional
        Target rank for ``mode="rank"``.

    Returns
    -------
    U : ndarray, shape (p, k)
    s : ndarray, shape (k,)
    Vh : ndarray, shape (k, q)
    k : int
    """
    m = as_tensor(m)
    if m.ndim != 2:
        raise ValueError("truncated_svd expects a matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    p, q = m.shape
    if p == 0 or q == 0:
        return (np.zeros((p, 0), complex), np.zeros(0), np.zeros((0, q), complex), 0)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if mode == "relative":
        k = int(np.count_nonzero(s > tol * s[0])) if s[0] > 0 else 0
    elif mode == "absolute":
        k = int(np.count_nonzero(s > tol))
    elif mode == "rank":
        if rank is None or rank < 0:
            raise ValueError("mode='rank' needs a nonnegative rank")
        k = min(int(rank), len(s))
    else:
        raise ValueError(f"unknown truncation mode {mode!r}")
    return u[:, :k], s[:k], vh[:k, :], k
