"""Entanglement distillation from bipartite fermionic quasifree states.

Core objects: covariance matrices (states), real projections and
partial isometries (protocols), and the Pfaffian formulas connecting
them.  `fock` holds an exact dense oracle for small systems, `lattice`
the scalable pipeline for the hopping chain.
"""

from .linalg import pfaffian, polar_decompose, random_orthogonal, svd
from .protocol import (
    DistillationReport,
    ProtocolChoice,
    hashing_rate,
    optimal_choice,
    optimal_pf_bound,
    run_protocol,
    sample_suboptimal,
    scan_m,
)
from .states import (
    BipartiteSplit,
    BlockDecomposition,
    CovarianceMatrix,
    RealProjectionPair,
    ValidationError,
    blocks,
    fock_fidelity,
    load_covariance,
    maximally_entangled_projection,
    output_fidelity,
    parity_expectation,
    parity_probability,
    partner_projection,
    protocol_quantities,
    restrict,
    save_covariance,
    twirl_coefficients,
    validate,
)

__all__ = [
    "BipartiteSplit",
    "BlockDecomposition",
    "CovarianceMatrix",
    "DistillationReport",
    "ProtocolChoice",
    "RealProjectionPair",
    "ValidationError",
    "blocks",
    "fock_fidelity",
    "hashing_rate",
    "load_covariance",
    "maximally_entangled_projection",
    "optimal_choice",
    "optimal_pf_bound",
    "output_fidelity",
    "parity_expectation",
    "parity_probability",
    "partner_projection",
    "pfaffian",
    "polar_decompose",
    "protocol_quantities",
    "random_orthogonal",
    "restrict",
    "run_protocol",
    "sample_suboptimal",
    "save_covariance",
    "scan_m",
    "svd",
    "twirl_coefficients",
    "validate",
]

__version__ = "0.1.0"
