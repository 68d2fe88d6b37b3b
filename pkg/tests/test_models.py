import math

import numpy as np
import pytest

from helpers import rel
from ttno.build import build_hss_compressed, dense_hamiltonian, site_operator
from ttno.dimtree import balanced_binary
from ttno.hss import hss_compress, symmetrize
from ttno.models import (
    J_LOWER,
    N_EXCITED,
    SIGMA_X,
    SpinModelParams,
    beta_cosine,
    beta_power_law,
    c_alpha,
    closed_system_spec,
    lindblad_single_site,
    model_spec,
    open_system_spec,
    synthetic_spec,
)


def brute_closed(d, omega, delta, nu, alpha):
    """Closed-system Hamiltonian assembled term by term."""
    dims = (2,) * d
    h = sum(site_operator(dims, {k: omega * SIGMA_X + delta * N_EXCITED}) for k in range(1, d + 1))
    for i in range(1, d + 1):
        for j in range(i + 1, d + 1):
            h = h + nu / (j - i) ** alpha * site_operator(dims, {i: N_EXCITED, j: N_EXCITED})
    return h


def test_power_law_values():
    b = beta_power_law(5, 1.0)
    assert b[0, 2] == 0.5
    nn = beta_power_law(5, math.inf)
    assert np.count_nonzero(nn) == 4 and np.all(np.diag(nn, 1) == 1)
    allpairs = beta_power_law(5, 0.0, scale=3.0)
    assert np.all(allpairs[np.triu_indices(5, 1)] == 3.0)


@pytest.mark.parametrize("beta", [beta_power_law(7, 2.0), beta_power_law(7, math.inf), beta_cosine(7)])
def test_generators_strictly_upper(beta):
    assert np.all(np.tril(beta) == 0)


def test_cosine_values():
    b = beta_cosine(6)
    assert b[0, 1] == pytest.approx(2.17534, abs=1e-5)
    bs = symmetrize(b)
    for i in range(6):
        for j in range(6):
            if i != j:
                assert bs[i, j] == pytest.approx(1 / (1 - math.cos(abs(i - j))))


def test_cosine_hss_rank():
    assert hss_compress(beta_cosine(16), balanced_binary(16), 1e-12).hss_rank == 8


def test_c_alpha():
    assert c_alpha(4, 1.0) == pytest.approx(25 / 12)
    assert c_alpha(10, math.inf) == 1.0


def test_closed_two_sites_is_n_kron_n():
    p = SpinModelParams(d=2, omega=0, delta=0, nu=1, alpha=1)
    assert np.allclose(dense_hamiltonian(closed_system_spec(p)), np.kron(N_EXCITED, N_EXCITED))


def test_closed_matches_brute_force():
    p = SpinModelParams(d=4)
    h = dense_hamiltonian(closed_system_spec(p))
    assert rel(h, brute_closed(4, 3.0, -2.0, 2.0, 1.0)) <= 1e-13
    assert np.allclose(h, h.conj().T)


def test_synthetic_dense_and_hermitian():
    h = dense_hamiltonian(synthetic_spec(SpinModelParams(d=4)))
    dims = (2,) * 4
    want = sum(site_operator(dims, {k: 3 * SIGMA_X - 2 * N_EXCITED}) for k in range(1, 5))
    for i in range(1, 5):
        for j in range(i + 1, 5):
            want = want + site_operator(dims, {i: N_EXCITED, j: N_EXCITED}) / (1 - math.cos(j - i))
    assert rel(h, want) <= 1e-13
    assert np.allclose(h, h.conj().T)


def test_synthetic_rank_eleven_at_d16():
    h, _ = build_hss_compressed(synthetic_spec(SpinModelParams(d=16)), balanced_binary(16), 1e-12)
    assert max(h.ranks.values()) == 11


def test_open_pair_terms_two_sites():
    p = SpinModelParams(d=2, omega=0, delta=0, gamma=0, nu=2, alpha=1)
    c = c_alpha(2, 1.0)
    a1 = np.kron(N_EXCITED, np.eye(2))
    a2 = np.kron(np.eye(2), N_EXCITED.T)
    want = (-1j * 2 / (2 * c)) * np.kron(a1, a1) + (1j * 2 / (2 * c)) * np.kron(a2, a2)
    assert np.allclose(dense_hamiltonian(open_system_spec(p)), want)


def test_lindblad_single_site_matches_superoperator():
    """Compare with the Lindblad generator applied to a random density matrix."""
    omega, delta, gamma = 0.4, -2.0, 1.0
    rng = np.random.default_rng(3)
    rho = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    h = omega * SIGMA_X + delta * N_EXCITED
    j = J_LOWER
    jdj = j.conj().T @ j
    want = -1j * (h @ rho - rho @ h) + gamma * (j @ rho @ j.conj().T - 0.5 * (jdj @ rho + rho @ jdj))
    # the generator acts on rho vectorized row by row
    got = lindblad_single_site(omega, delta, gamma) @ rho.reshape(-1)
    assert np.allclose(got, want.reshape(-1))


def test_decay_term_is_trace_preserving():
    l = lindblad_single_site(0.0, 0.0, 1.0)
    assert np.allclose(np.eye(2).reshape(-1) @ l, 0)


def test_open_without_interaction_is_local():
    p = SpinModelParams(d=3, omega=0.4, nu=0.0)
    spec = open_system_spec(p)
    d = lindblad_single_site(0.4, -2.0, 1.0)
    want = sum(site_operator((4,) * 3, {k: d}) for k in (1, 2, 3))
    assert np.allclose(dense_hamiltonian(spec), want)


def test_params_validation_and_lookup():
    with pytest.raises(ValueError):
        SpinModelParams(d=1)
    with pytest.raises(ValueError):
        SpinModelParams(d=4, eps=-1)
    with pytest.raises(ValueError, match="unknown model"):
        model_spec("ising", SpinModelParams(d=4))
    assert model_spec("open", SpinModelParams(d=3)).site_dims == (4, 4, 4)
