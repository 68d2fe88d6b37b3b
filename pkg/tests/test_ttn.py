import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import crandn, rel, trees
from ttno.build import InteractionFamily, PairwiseHamiltonian, build_unstructured
from ttno.dimtree import balanced_binary, degenerate, leaf, node
from ttno.tensor import matricize, unfold_mode_product, vectorize
from ttno.ttn import (
    DenseOracleTooLarge,
    TreeTensorNetwork,
    Ttno,
    apply_ttno,
    contract_to_dense,
    identity_ttno,
    load_network,
    matricization_ranks,
    random_ttn,
    random_ttno,
    rank_one_ttno,
    rank_report,
    save_network,
    ttno_to_dense_matrix,
)


def hand_contract(x, t):
    """Recursive contraction written directly from the definition."""
    if t.is_leaf:
        return x.leaf_bases[t.lo]
    c = x.transfers[t.key]
    factors = [hand_contract(x, ch) for ch in t.children]
    full = unfold_mode_product(c, factors)
    return full.reshape(-1, full.shape[-1], order="F")


def test_rank_one_network_is_outer_product(rng):
    us = [crandn(rng, 3, 1) for _ in range(4)]
    tree = balanced_binary(4)
    x = TreeTensorNetwork(tree, {i + 1: u for i, u in enumerate(us)}, {t.key: np.ones((1, 1, 1)) for t in tree.subtrees()})
    outer = np.einsum("a,b,c,d->abcd", *(u[:, 0] for u in us))
    assert np.allclose(contract_to_dense(x), outer)
    assert set(matricization_ranks(x).values()) == {1}


def test_two_site_matricization_is_u1_c_u2t(rng):
    u1, u2, c = crandn(rng, 3, 2), crandn(rng, 4, 3), crandn(rng, 2, 3)
    x = TreeTensorNetwork(node(leaf(1), leaf(2)), {1: u1, 2: u2}, {(1, 2): c})
    assert x.transfers[(1, 2)].shape == (2, 3, 1)  # root singleton appended
    assert np.allclose(matricize(contract_to_dense(x), [1]), u1 @ c @ u2.T)


@given(trees(max_d=5), st.integers(0, 2**31))
def test_contract_matches_hand_contraction(tree, seed):
    rng = np.random.default_rng(seed)
    x = random_ttn(tree, (2,) * tree.size, 2, rng)
    assert np.allclose(vectorize(contract_to_dense(x)), hand_contract(x, tree)[:, 0])


def test_unfold_with_scalar_core_is_rank_one_operator(rng):
    a = crandn(rng, 2, 2)
    assert np.allclose(unfold_mode_product(np.ones((1, 1)), [vectorize(a)])[:, 0], vectorize(a))


def test_rank_one_ttno_is_kronecker_product(rng):
    mats = [crandn(rng, 2, 2) for _ in range(3)]
    h = rank_one_ttno(degenerate(3), mats)
    assert np.allclose(ttno_to_dense_matrix(h), np.kron(np.kron(mats[2], mats[1]), mats[0]))


def test_identity_ttno(rng):
    h = identity_ttno(balanced_binary(4), (2, 2, 2, 2))
    assert np.allclose(ttno_to_dense_matrix(h), np.eye(16))
    assert rank_report(h).representation_rank == 1
    x = random_ttn(h.tree, (2,) * 4, 2, rng)
    assert np.allclose(contract_to_dense(apply_ttno(h, x)), contract_to_dense(x))


def test_rank_one_ttno_on_rank_one_ttn(rng):
    tree = balanced_binary(4)
    mats = [crandn(rng, 2, 2) for _ in range(4)]
    x = random_ttn(tree, (2,) * 4, 1, rng)
    y = apply_ttno(rank_one_ttno(tree, mats), x)
    want = contract_to_dense(x)
    for k, a in enumerate(mats):
        want = np.moveaxis(np.tensordot(a, want, axes=([1], [k])), 0, k)
    assert max(y.ranks.values()) == 1
    assert np.allclose(contract_to_dense(y), want)


@pytest.mark.parametrize("make", [balanced_binary, degenerate])
def test_apply_matches_dense_matvec(make, rng):
    tree = make(4)
    h = random_ttno(tree, (2,) * 4, 2, rng)
    x = random_ttn(tree, (2,) * 4, 3, rng)
    y = apply_ttno(h, x)
    assert y.ranks[(1, 2) if make is balanced_binary else (2, 4)] == 6
    assert rel(vectorize(contract_to_dense(y)), ttno_to_dense_matrix(h) @ vectorize(contract_to_dense(x))) <= 1e-12


@given(trees(max_d=4), st.integers(0, 2**31))
def test_apply_on_any_tree(tree, seed):
    rng = np.random.default_rng(seed)
    h = random_ttno(tree, (2,) * tree.size, 2, rng)
    x = random_ttn(tree, (2,) * tree.size, 2, rng)
    got = vectorize(contract_to_dense(apply_ttno(h, x)))
    assert rel(got, ttno_to_dense_matrix(h) @ vectorize(contract_to_dense(x))) <= 1e-12


def test_apply_requires_same_tree(rng):
    h = random_ttno(balanced_binary(4), (2,) * 4, 2, rng)
    x = random_ttn(degenerate(4), (2,) * 4, 2, rng)
    with pytest.raises(ValueError, match="trees must coincide"):
        apply_ttno(h, x)


def test_parameter_count_and_memory():
    x = TreeTensorNetwork(node(leaf(1), leaf(2)), {1: np.zeros((2, 2)), 2: np.zeros((2, 2))}, {(1, 2): np.zeros((2, 2, 1))})
    rep = rank_report(x)
    assert rep.parameter_count == 12
    assert rep.memory_bytes == 16 * 12
    assert rep.representation_rank == 2


def test_unstructured_d8_interior_rank_six(rng):
    d = 8
    spec = PairwiseHamiltonian((2,) * d, [InteractionFamily(np.triu(crandn(rng, d, d), 1), [crandn(rng, 2, 2) for _ in range(d)])])
    h = build_unstructured(spec, balanced_binary(d))
    assert max(r for k, r in h.ranks.items() if k != (1, d)) == 6


@given(trees(max_d=5), st.integers(0, 2**31))
def test_matricization_ranks_bounded_by_stored(tree, seed):
    x = random_ttn(tree, (2,) * tree.size, 2, np.random.default_rng(seed))
    mr = matricization_ranks(x)
    assert all(mr[k] <= r for k, r in x.ranks.items())


def test_zero_network_has_rank_zero():
    tree = balanced_binary(3)
    x = TreeTensorNetwork(tree, {ell: np.zeros((2, 1)) for ell in (1, 2, 3)}, {t.key: np.zeros((1, 1, 1)) for t in tree.subtrees()})
    assert set(matricization_ranks(x).values()) == {0}


def test_shape_validation():
    with pytest.raises(ValueError, match="mode 2 has size"):
        TreeTensorNetwork(node(leaf(1), leaf(2)), {1: np.zeros((2, 2)), 2: np.zeros((2, 3))}, {(1, 2): np.zeros((2, 2, 1))})
    with pytest.raises(ValueError, match="root rank"):
        TreeTensorNetwork(node(leaf(1), leaf(2)), {1: np.zeros((2, 1)), 2: np.zeros((2, 1))}, {(1, 2): np.zeros((1, 1, 2))})
    net = TreeTensorNetwork(node(leaf(1), leaf(2)), {1: np.zeros((3, 1)), 2: np.zeros((4, 1))}, {(1, 2): np.zeros((1, 1))})
    with pytest.raises(ValueError, match="squares"):
        Ttno(net, (2, 2))


def test_dense_cap(rng):
    h = random_ttno(balanced_binary(4), (2,) * 4, 2, rng)
    with pytest.raises(DenseOracleTooLarge, match="dense oracle too large"):
        ttno_to_dense_matrix(h, cap=100)


def test_save_load_round_trip(tmp_path, rng):
    h = random_ttno(balanced_binary(5), (2,) * 5, 3, rng)
    save_network(tmp_path / "h.npz", h)
    back = load_network(tmp_path / "h.npz")
    assert isinstance(back, Ttno) and back.site_dims == h.site_dims
    assert np.array_equal(ttno_to_dense_matrix(back), ttno_to_dense_matrix(h))
    x = random_ttn(degenerate(3), (2, 3, 4), 2, rng)
    save_network(tmp_path / "x.npz", x)
    y = load_network(tmp_path / "x.npz")
    assert isinstance(y, TreeTensorNetwork) and np.array_equal(contract_to_dense(y), contract_to_dense(x))


def test_load_rejects_foreign_archive(tmp_path):
    np.savez(tmp_path / "junk.npz", a=np.zeros(2))
    with pytest.raises(ValueError, match="not a"):
        load_network(tmp_path / "junk.npz")


def test_dense_cap_checked_before_contracting(rng):
    h = random_ttno(balanced_binary(64), (2,) * 64, 2, rng)
    with pytest.raises(DenseOracleTooLarge):
        ttno_to_dense_matrix(h)
    with pytest.raises(DenseOracleTooLarge):
        contract_to_dense(h, cap=2**70)
