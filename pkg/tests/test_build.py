import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import crandn, rel, trees
from ttno.build import (
    InteractionFamily,
    PairwiseHamiltonian,
    binary_recursion_rhs,
    build_hss_compressed,
    build_unstructured,
    build_unstructured_mary,
    dense_hamiltonian,
    error_report,
    expected_rank,
    h_vec,
    matricization_rank_law,
    matricized_operator,
    operator_tensor,
    oracle_h_tau,
    site_operator,
    split_matricization,
    ttno_direct_sum,
)
from ttno.checks import random_spec
from ttno.dimtree import balanced_binary, degenerate, flat, parse_tree
from ttno.hss import hss_block_row_ranks
from ttno.models import N_EXCITED, SpinModelParams, beta_cosine, beta_power_law, synthetic_spec
from ttno.tensor import matricize, vectorize
from ttno.ttn import identity_ttno, matricization_ranks, random_ttno, ttno_to_dense_matrix

TOL = 1e-12


def build_any(spec, tree, mode="separate"):
    return build_unstructured(spec, tree, mode) if tree.is_binary else build_unstructured_mary(spec, tree, mode)


def test_dense_oracle_site_order():
    a, b = np.diag([1.0, 2.0]), np.array([[0, 1], [1, 0]], dtype=float)
    assert np.allclose(site_operator((2, 2, 2), {1: a, 3: b}), np.kron(np.kron(b, np.eye(2)), a))
    spec = PairwiseHamiltonian((2, 2), [InteractionFamily([[0, 3.0], [0, 0]], [a, b])])
    assert np.allclose(dense_hamiltonian(spec), 3.0 * np.kron(b, a))


def test_leaf_h_is_zero_without_single_site(rng):
    spec = random_spec(4, rng)
    assert np.all(h_vec(spec, [2]) == 0)


def test_two_site_h_is_scaled_kron(rng):
    a1, a2 = crandn(rng, 2, 2), crandn(rng, 2, 2)
    spec = PairwiseHamiltonian((2, 2), [InteractionFamily([[0, 0.7], [0, 0]], [a1, a2])])
    assert np.allclose(h_vec(spec, [1, 2]), 0.7 * np.kron(vectorize(a2), vectorize(a1)))


def test_root_h_is_the_operator(rng):
    spec = random_spec(4, rng, single_site=True)
    want = vectorize(operator_tensor(dense_hamiltonian(spec), spec.site_dims))
    assert rel(oracle_h_tau(spec, balanced_binary(4)), want) <= TOL


def test_d4_balanced_interior_ranks(rng):
    spec = random_spec(4, rng)
    h = build_unstructured(spec, balanced_binary(4))
    assert rel(ttno_to_dense_matrix(h), dense_hamiltonian(spec)) <= TOL
    assert h.ranks[(1, 2)] == h.ranks[(3, 4)] == 4
    assert h.ranks[(1, 1)] == 2


@given(trees(min_d=2, max_d=6), st.integers(0, 2**31), st.booleans(), st.integers(1, 2), st.sampled_from(["separate", "absorb"]))
def test_exactness_on_any_tree(tree, seed, single, fams, mode):
    rng = np.random.default_rng(seed)
    spec = random_spec(tree.size, rng, families=fams, single_site=single)
    h = build_any(spec, tree, mode)
    assert rel(ttno_to_dense_matrix(h), dense_hamiltonian(spec)) <= TOL


@given(trees(min_d=2, max_d=6), st.integers(0, 2**31), st.booleans())
def test_rank_law(tree, seed, single):
    spec = random_spec(tree.size, np.random.default_rng(seed), single_site=single)
    h = build_any(spec, tree)
    mr = matricization_ranks(h, 1e-10)
    law = matricization_rank_law(spec, tree, 1e-10)
    br = hss_block_row_ranks(spec.families[0].beta, tree, 1e-10) if tree.is_binary else None
    for t in tree.nodes():
        if t is tree:
            continue
        assert mr[t.key] == law[t.key] <= h.ranks[t.key]
        if t.is_leaf and tree.size > 2 and not single:
            assert mr[t.key] == 2
        elif br is not None and len(tree.complement_leaves(t)) >= 2:
            assert mr[t.key] == 2 + br[t.key]


def test_rank_law_with_one_site_complement():
    # the complement {1} carries no pair term, so its h vanishes
    spec = random_spec(3, np.random.default_rng(5))
    tree = degenerate(3)
    mr = matricization_ranks(build_unstructured(spec, tree), 1e-10)
    assert hss_block_row_ranks(spec.families[0].beta, tree, 1e-10)[(2, 3)] == 1
    assert mr[(2, 3)] == 2 == matricization_rank_law(spec, tree)[(2, 3)]


def test_nearest_neighbour_degenerate_exact():
    d = 8
    spec = PairwiseHamiltonian((2,) * d, [InteractionFamily(beta_power_law(d, math.inf), [N_EXCITED] * d)])
    tree = degenerate(d)
    h = build_unstructured(spec, tree)
    assert rel(ttno_to_dense_matrix(h), dense_hamiltonian(spec)) <= TOL
    assert all(h.ranks[t.key] <= 2 + t.size for t in tree.nodes())


def test_single_site_only(rng):
    d = 5
    ds = [crandn(rng, 2, 2) for _ in range(d)]
    spec = PairwiseHamiltonian((2,) * d, [InteractionFamily(np.zeros((d, d)), [np.eye(2)] * d)], ds)
    h = build_unstructured(spec, balanced_binary(d))
    want = sum(site_operator(spec.site_dims, {k + 1: m}) for k, m in enumerate(ds))
    assert rel(ttno_to_dense_matrix(h), want) <= TOL
    assert max(r for k, r in h.ranks.items() if k != (1, d)) == 2


def test_d_below_two_rejected():
    spec = PairwiseHamiltonian((2,), [InteractionFamily(np.zeros((1, 1)), [np.eye(2)])])
    with pytest.raises(ValueError, match="pairwise Hamiltonian needs d >= 2"):
        build_unstructured(spec, balanced_binary(1))


def test_mary_matches_binary_builder_ranks(rng):
    spec = random_spec(6, rng, single_site=True)
    tree = balanced_binary(6)
    assert build_unstructured_mary(spec, tree).ranks == build_unstructured(spec, tree).ranks


def test_ternary_and_flat_trees(rng):
    spec = random_spec(6, rng)
    h = build_unstructured_mary(spec, parse_tree("((1,2),(3,4),(5,6))"))
    assert rel(ttno_to_dense_matrix(h), dense_hamiltonian(spec)) <= TOL
    spec5 = random_spec(5, rng, single_site=True)
    hf = build_unstructured_mary(spec5, flat(5))
    assert hf.network.transfers[(1, 5)].ndim == 6
    assert rel(ttno_to_dense_matrix(hf), dense_hamiltonian(spec5)) <= TOL


@pytest.mark.parametrize("make", [balanced_binary, degenerate])
def test_binary_recursion(make, rng):
    spec = random_spec(6, rng, single_site=True, families=2)
    for t in make(6).subtrees():
        assert rel(binary_recursion_rhs(spec, t), oracle_h_tau(spec, t)) <= TOL


def test_split_matricization(rng):
    spec = random_spec(6, rng, single_site=True)
    h = dense_hamiltonian(spec)
    for leaves in ([3, 4], [2, 3, 4], [4, 5, 6], [1]):
        assert rel(split_matricization(spec, leaves), matricize(operator_tensor(h, spec.site_dims), leaves)) <= TOL
        assert rel(matricized_operator(build_unstructured(spec, balanced_binary(6)), leaves),
                   matricize(operator_tensor(h, spec.site_dims), leaves)) <= TOL


@given(trees(min_d=2, max_d=6, binary=True), st.integers(0, 2**31), st.booleans())
def test_compressed_at_zero_eps_is_exact(tree, seed, single):
    spec = random_spec(tree.size, np.random.default_rng(seed), families=2, single_site=single)
    h, _ = build_hss_compressed(spec, tree, 0.0)
    assert rel(ttno_to_dense_matrix(h), ttno_to_dense_matrix(build_unstructured(spec, tree))) <= TOL


def test_compressed_rejects_non_binary(rng):
    with pytest.raises(ValueError, match="HSS requires binary tree"):
        build_hss_compressed(random_spec(4, rng), flat(4), 0.0)


@pytest.mark.parametrize("d", [8, 16, 64])
def test_nearest_neighbour_rank_four(d):
    spec = PairwiseHamiltonian((2,) * d, [InteractionFamily(beta_power_law(d, math.inf), [N_EXCITED] * d)])
    h, hss = build_hss_compressed(spec, balanced_binary(d), 1e-12)
    assert max(h.ranks.values()) <= 4
    assert max(h.ranks.values()) <= expected_rank(spec, hss)


def test_synthetic_rank_eleven():
    h, hss = build_hss_compressed(synthetic_spec(SpinModelParams(d=16)), balanced_binary(16), 1e-12)
    assert hss[0].hss_rank == 8
    assert max(h.ranks.values()) == 11


def test_absorb_mode_saves_one_rank():
    spec = synthetic_spec(SpinModelParams(d=16))
    h, hss = build_hss_compressed(spec, balanced_binary(16), 1e-12, single_site="absorb")
    assert max(h.ranks.values()) == 10 == expected_rank(spec, hss, "absorb")


def test_zero_family_contributes_no_columns(rng):
    d = 6
    live = InteractionFamily(np.triu(crandn(rng, d, d), 1), [crandn(rng, 2, 2) for _ in range(d)])
    dead = InteractionFamily(np.zeros((d, d)), [crandn(rng, 2, 2) for _ in range(d)])
    one = build_unstructured(PairwiseHamiltonian((2,) * d, [live]), balanced_binary(d))
    two = build_unstructured(PairwiseHamiltonian((2,) * d, [live, dead]), balanced_binary(d))
    assert one.ranks == two.ranks


def test_direct_sum(rng):
    tree = balanced_binary(4)
    a, b = random_ttno(tree, (2,) * 4, 1, rng), random_ttno(tree, (2,) * 4, 1, rng)
    s = ttno_direct_sum(a, b)
    assert rel(ttno_to_dense_matrix(s), ttno_to_dense_matrix(a) + ttno_to_dense_matrix(b)) <= 1e-13
    eye = identity_ttno(tree, (2,) * 4)
    assert np.allclose(ttno_to_dense_matrix(ttno_direct_sum(eye, eye)), 2 * np.eye(16))
    zero = random_ttno(tree, (2,) * 4, 1, rng)
    zero.network.leaf_bases[1][:] = 0
    assert np.allclose(ttno_to_dense_matrix(ttno_direct_sum(a, zero)), ttno_to_dense_matrix(a))
    with pytest.raises(ValueError, match="trees must coincide"):
        ttno_direct_sum(a, random_ttno(degenerate(4), (2,) * 4, 1, rng))


def test_error_report_and_bound():
    d = 8
    spec = synthetic_spec(SpinModelParams(d=d))
    spec = PairwiseHamiltonian(spec.site_dims, [InteractionFamily(beta_power_law(d, 1.0), [N_EXCITED] * d)], spec.single_site)
    h, hss = build_hss_compressed(spec, balanced_binary(d), 1e-4)
    rep = error_report(spec, h, hss=hss, eps=1e-4)
    assert 0 < rep.relative < 1e-3
    assert rep.measured_constant is not None and rep.measured_constant < 1
    exact = error_report(spec, build_unstructured(spec, balanced_binary(d)), norm="spectral")
    assert exact.relative <= TOL and exact.bound is None


def test_cosine_beta_used_by_synthetic():
    spec = synthetic_spec(SpinModelParams(d=6))
    assert np.allclose(spec.families[0].beta, beta_cosine(6))
