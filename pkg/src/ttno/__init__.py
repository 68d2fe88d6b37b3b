"""Tree tensor network operators for pairwise-interaction Hamiltonians.

Exact constructions with interior ranks ``2 + d_t`` and HSS-compressed
constructions with ranks ``2 + k_t``, plus dense oracles to check them.
"""

from .build import (
    ErrorReport,
    InteractionFamily,
    PairwiseHamiltonian,
    build_hss_compressed,
    build_unstructured,
    build_unstructured_mary,
    dense_hamiltonian,
    error_report,
    expected_rank,
    oracle_h_tau,
    ttno_direct_sum,
)
from .dimtree import DimensionTree, balanced_binary, degenerate, flat, make_tree, parse_tree
from .hss import HssMatrix, hss_block_row_ranks, hss_compress, hss_reconstruct
from .models import (
    SpinModelParams,
    beta_cosine,
    beta_power_law,
    closed_system_spec,
    open_system_spec,
    synthetic_spec,
)
from .ttn import (
    RankReport,
    TreeTensorNetwork,
    Ttno,
    apply_ttno,
    contract_to_dense,
    load_network,
    matricization_ranks,
    rank_report,
    save_network,
    ttno_to_dense_matrix,
)

__version__ = "0.1.0"
