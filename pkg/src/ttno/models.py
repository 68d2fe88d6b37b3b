"""Spin-1/2 chain Hamiltonians and Lindbladians with long-range couplings."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .build import InteractionFamily, PairwiseHamiltonian

__all__ = [
    "SIGMA_X",
    "N_EXCITED",
    "J_LOWER",
    "SpinModelParams",
    "beta_power_law",
    "beta_cosine",
    "c_alpha",
    "closed_system_spec",
    "open_system_spec",
    "synthetic_spec",
    "lindblad_single_site",
    "model_spec",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
N_EXCITED = np.array([[1, 0], [0, 0]], dtype=complex)
J_LOWER = np.array([[0, 0], [1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SpinModelParams:
    d: int
    alpha: float = 1.0
    omega: float = 3.0
    delta: float = -2.0
    nu: float = 2.0
    gamma: float = 1.0
    eps: float = 1e-12

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be at least 2")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")


def beta_power_law(d: int, alpha: float, scale: complex = 1.0) -> np.ndarray:
    """``β(i,j) = scale / (j-i)**alpha``; ``alpha=inf`` keeps nearest neighbours only."""
    b = np.zeros((d, d), dtype=complex)
    i, j = np.triu_indices(d, 1)
    dist = (j - i).astype(float)
    if math.isinf(alpha):
        b[i, j] = np.where(dist == 1, scale, 0)
    else:
        b[i, j] = scale / dist**alpha
    return b


def beta_cosine(d: int) -> np.ndarray:
    """``β(i,j) = 1 / (1 - cos(j-i))`` with the argument in radians."""
    b = np.zeros((d, d), dtype=complex)
    i, j = np.triu_indices(d, 1)
    b[i, j] = 1.0 / (1.0 - np.cos((j - i).astype(float)))
    return b


def c_alpha(d: int, alpha: float) -> float:
    """Kac normalization ``Σ_{k=1}^d k**(-alpha)`` (equal to 1 for ``alpha=inf``)."""
    if math.isinf(alpha):
        return 1.0
    return float(sum(k**-alpha for k in range(1, d + 1)))


def closed_system_spec(p: SpinModelParams) -> PairwiseHamiltonian:
    """``Ω Σ σx + Δ Σ n + ν Σ_{i<j} (j-i)^-α n n`` on qubits."""
    single = p.omega * SIGMA_X + p.delta * N_EXCITED
    fam = InteractionFamily(beta_power_law(p.d, p.alpha, p.nu), (N_EXCITED,) * p.d)
    return PairwiseHamiltonian((2,) * p.d, (fam,), (single,) * p.d)


def synthetic_spec(p: SpinModelParams) -> PairwiseHamiltonian:
    """Closed-system single-site part with the cosine interaction."""
    single = p.omega * SIGMA_X + p.delta * N_EXCITED
    fam = InteractionFamily(beta_cosine(p.d), (N_EXCITED,) * p.d)
    return PairwiseHamiltonian((2,) * p.d, (fam,), (single,) * p.d)


def lindblad_single_site(omega: float, delta: float, gamma: float) -> np.ndarray:
    """4x4 single-site generator: driving, detuning and decay through ``J``.

    Left multiplication ``Xρ`` appears as ``X ⊗ I`` and right
    multiplication ``ρX`` as ``I ⊗ Xᵀ``, so the density matrix is
    vectorized row by row.
    """
    jd = J_LOWER.conj().T
    jdj = jd @ J_LOWER
    drive = -1j * np.kron(SIGMA_X, I2) + 1j * np.kron(I2, SIGMA_X.T)
    detune = -1j * np.kron(N_EXCITED, I2) + 1j * np.kron(I2, N_EXCITED.T)
    decay = np.kron(J_LOWER, jd.T) - 0.5 * np.kron(jdj, I2) - 0.5 * np.kron(I2, jdj.T)
    return omega * drive + delta * detune + gamma * decay


def open_system_spec(p: SpinModelParams) -> PairwiseHamiltonian:
    """Lindbladian on vectorized density matrices (site dimension 4).

    Two interaction families: ``n⊗I`` with ``-iν/(2c_α)`` couplings and
    ``I⊗nᵀ`` with ``+iν/(2c_α)`` couplings.
    """
    scale = p.nu / (2.0 * c_alpha(p.d, p.alpha))
    left = np.kron(N_EXCITED, I2)
    right = np.kron(I2, N_EXCITED.T)
    fams = (
        InteractionFamily(beta_power_law(p.d, p.alpha, -1j * scale), (left,) * p.d),
        InteractionFamily(beta_power_law(p.d, p.alpha, 1j * scale), (right,) * p.d),
    )
    single = lindblad_single_site(p.omega, p.delta, p.gamma)
    return PairwiseHamiltonian((4,) * p.d, fams, (single,) * p.d)


_MODELS = {
    "closed": closed_system_spec,
    "open": open_system_spec,
    "synthetic": synthetic_spec,
}


def model_spec(name: str, p: SpinModelParams) -> PairwiseHamiltonian:
    try:
        return _MODELS[name](p)
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(_MODELS)}") from None
