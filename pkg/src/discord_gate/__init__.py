"""Decide whether reduced system-bath dynamics is a completely positive map.

The package builds the linear (Hermitian) map that a joint unitary induces on
the system for a given initial state, tests it for complete positivity via its
Choi matrix, and relates the outcome to vanishing quantum discord of the
initial state.
"""
from .linalg import (
    RandomSource,
    Spectrum,
    haar_unitary,
    is_psd,
    kron,
    partial_trace_bath,
    random_density,
    spectral_decompose,
    svd,
)
from .maps import (
    ChoiMatrix,
    OperatorSumMap,
    apply_map,
    choi_matrix,
    cp_difference,
    induced_map,
    is_cp,
    kraus_from_vqd,
    map_properties,
)
from .states import (
    BipartiteState,
    BlockDecomposition,
    BlockPartition,
    CQForm,
    GenParams,
    decompose,
    evolve,
    find_blocks,
    find_cq_basis,
    generate_state,
    is_sl,
    is_vqd,
    structural_cp_form,
)
from .verify import (
    AdversarialUnitary,
    Certificate,
    VerificationReport,
    VerifyConfig,
    adversarial_unitary,
    discord_oracle,
    find_cp_violation,
    lemma_a_witness,
    monte_carlo_verify,
    principal_submatrix_pkl,
    submatrix_eig_checks,
)

__version__ = "0.1.0"

__all__ = [
    "RandomSource",
    "Spectrum",
    "haar_unitary",
    "is_psd",
    "kron",
    "partial_trace_bath",
    "random_density",
    "spectral_decompose",
    "svd",
    "ChoiMatrix",
    "OperatorSumMap",
    "apply_map",
    "choi_matrix",
    "cp_difference",
    "induced_map",
    "is_cp",
    "kraus_from_vqd",
    "map_properties",
    "BipartiteState",
    "BlockDecomposition",
    "BlockPartition",
    "CQForm",
    "GenParams",
    "decompose",
    "evolve",
    "find_blocks",
    "find_cq_basis",
    "generate_state",
    "is_sl",
    "is_vqd",
    "structural_cp_form",
    "AdversarialUnitary",
    "Certificate",
    "VerificationReport",
    "VerifyConfig",
    "adversarial_unitary",
    "discord_oracle",
    "find_cp_violation",
    "lemma_a_witness",
    "monte_carlo_verify",
    "principal_submatrix_pkl",
    "submatrix_eig_checks",
]
