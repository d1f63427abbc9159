"""Toolkit for bipartite non-signaling distributions.

Computes affine-decomposition complexity measures (L1 mass over local or
quantum-certified components), their dual Bell/Tsirelson certificates,
XOR-game biases, and Monte-Carlo simulations of simultaneous-messages
protocols.
"""

from .core import (
    Alphabets,
    ConditionalDistribution,
    CorrelationRep,
    LocalVertex,
    AffineModel,
    BellFunctional,
    ValidationReport,
    ShapeError,
    UnsupportedRepresentationError,
    InfeasibleRepresentationError,
    ResourceLimitError,
    TOL_FEAS,
    TOL_RECON,
    validate,
    to_correlation_rep,
    from_correlation_rep,
    enumerate_local_vertices,
    affine_basis,
    statistical_distance,
    symmetrize_marginals,
    pr_box,
    boolean_distribution,
    load_distribution,
    dump_distribution,
)
from .lp import LinearProgram, LpSolution, solve_lp
from .sdp import SdpProgram, SdpSolution, solve_sdp
from . import bounds, games, simulate

__version__ = "0.1.0"
