"""Noncommutative Grassmannians, flag manifolds and their resolvents at matrix scale.

Points are stored as invertible block frames over M_n(M_k(C)), in exact
rational (Gaussian rational) or floating complex arithmetic.
"""

from .algebra import (
    DEFAULT_TOL,
    LayeredMatrix,
    SubalgebraSpec,
    amplify,
    block_matrix,
    hermitian_sqrt,
    identity,
    interleaved_direct_sum,
    layered,
    layered_invert,
    layered_multiply,
    matrix_from_json,
    matrix_to_json,
    middle_lift,
    scalar_similarity_lift,
    subalgebra_contains,
    zeros,
)
from .dilation import (
    ClosedOperatorModel,
    ContractionModel,
    graph_transform,
    halmos_dilation,
    inverse_graph_transform,
    resolvent_correspondence_check,
)
from .errors import *  # noqa: F401,F403
from .grassmann import (
    FlagPoint,
    FlagSignature,
    GrassPoint,
    affine_embed,
    affine_extract,
    column_space_equiv,
    direct_sum,
    flag_affine_embed,
    flag_equiv,
    flag_project,
    gr_canonicalize,
    gr_equiv,
    matrix_unit_block,
    pinch,
    shift_act,
    similarity,
)
from .harness import RunConfig, VerdictReport, replay, run_suite
from .ncfunc import (
    NcFunctionHandle,
    ScalingPolicy,
    check_direct_sum,
    check_intertwining,
    check_similarity,
    dd_apply,
    dd_flag_apply,
    envelope_extend,
    first_order_difference_check,
)
from .resolvent import (
    ProjectivePoint,
    flag_resolvent,
    flag_resolvent_equation_residual,
    flag_resolvent_set,
    grass_resolvent,
    in_resolvent_set,
    is_transversal,
    partial_converse_check,
    r_matrix,
    resolvent_equation_residual,
    resolvent_function,
)

__version__ = "0.1.0"
