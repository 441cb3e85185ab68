"""Finite-time convergent gossip topologies (Base-(k+1) family and baselines)."""

__version__ = "0.1.0"

from .builders import (
    base_graph, build, exponential, from_tag, hyper_hypercube, one_peer_exponential,
    one_peer_hypercube, ring, simple_base, torus,
)
from .consensus import (
    consensus_rate, run_gossip, sequence_product, sequence_rate_table, verify_finite_time,
)
from .dsgd import DSGDConfig, QuadraticProblem, dsgd_run, make_problem, topology_sweep
from .factorization import base_digits, min_factorization, pq_split
from .graph import (
    EdgeList, GraphSequence, MixingMatrix, apply_mix, consensus_error, to_mixing_matrix,
    validate_sequence,
)
from .kernels import BACKEND

__all__ = [
    "BACKEND", "DSGDConfig", "EdgeList", "GraphSequence", "MixingMatrix", "apply_mix", "base_digits",
    "base_graph", "build", "consensus_error", "consensus_rate", "dsgd_run", "exponential", "from_tag",
    "hyper_hypercube", "make_problem", "min_factorization", "one_peer_exponential", "one_peer_hypercube",
    "pq_split", "QuadraticProblem", "ring", "run_gossip", "sequence_product", "sequence_rate_table",
    "simple_base", "to_mixing_matrix", "topology_sweep", "torus", "validate_sequence", "verify_finite_time",
]
