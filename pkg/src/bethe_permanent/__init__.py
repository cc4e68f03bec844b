"""Approximate matrix permanents with belief propagation.

The Bethe approximation treats per(W) as the partition function of a
bipartite matching model and estimates it as ``exp(-min F_Bethe)``.  Exact
permanents (brute force, Ryser), a uniform-permutation sampler, weak
baselines, permanent kernels and benchmark studies are included for
comparison.
"""

from .bp import (
    BeliefState,
    BetheResult,
    BPConfig,
    MessageState,
    bethe_free_energy,
    compute_beliefs,
    estimate_permanent,
    extract_belief_matrix,
    init_messages,
    run_bp,
    sinkhorn_scale,
    update_messages,
)
from .errors import (
    DomainError,
    NumericError,
    ParseError,
    PermanentError,
    ShapeError,
    SizeError,
)
from .exact import (
    LogValue,
    brute_force_permanent,
    determinant,
    ryser_permanent,
    scaled_diagonal,
)
from .matrix import (
    RngSpec,
    as_square_matrix,
    is_permutation,
    parse_matrix,
    random_permutation,
    random_uniform_matrix,
    serialize_matrix,
)
from .sampler import SampleEstimate, sample_permanent

__version__ = "0.1.0"
