"""Exact tools for counting sign changes of leading minors along convex sequences of matrices.

Modules: core (matrices, moves, nsc), reduce (reduction to k - 1 rows),
certify (prerank certificates and their checker), bound (closed-form bounds),
search (witness search), curve (convex curves and the discrete bridge),
cli (the `gcx` command).
"""

from .bound import conjecture_bound, constructive_bound, dual_bound, theorem_bound
from .certify import build_certificate, check_certificate
from .core import ConvexSeq, ExactMatrix, MoveStep, leading_minor, minor, nsc, random_convex_seq
from .search import SearchConfig, maximize_nsc, verify_witness

__all__ = [
    "ConvexSeq",
    "ExactMatrix",
    "MoveStep",
    "SearchConfig",
    "build_certificate",
    "check_certificate",
    "conjecture_bound",
    "constructive_bound",
    "dual_bound",
    "leading_minor",
    "maximize_nsc",
    "minor",
    "nsc",
    "random_convex_seq",
    "theorem_bound",
    "verify_witness",
]
