"""Lyapunov equation solvers and a-priori decay bounds for their solutions."""

from .core import (
    BandedSymmetricMatrix,
    EigenDecomposition,
    KroneckerSumOperator,
    SparseMatrix,
    kron_sum_apply,
    laplacian2d,
    linear_to_pair,
    pair_to_linear,
    sym_eig,
    tridiag,
    unvec,
    vec,
)
from .decay_bounds import (
    BoundQuadrature,
    DecayEnvelope,
    FreundParameters,
    SegmentSpec,
    demko_bound,
    entry_bound,
    entry_bound_table,
    entry_envelope,
    freund_bound,
    freund_parameters,
    kron_decay_envelope,
    y_diag_bound,
    y_lastcol_bound,
)
from .equation_solvers import (
    QuadratureSpec,
    SolveReport,
    inverse_kron_column,
    lyapunov_residual,
    refinement_history,
    solve_integral_exponential,
    solve_integral_resolvent,
    solve_kron_oracle,
    solve_spectral,
    solve_via_stable,
    solve_with_report,
)
from .errors import (
    ConventionError,
    DimensionError,
    IndefiniteFactorWarning,
    LyapunovError,
    QuadratureError,
    SizeLimitError,
    SolvabilityError,
    SymmetryError,
    TermFailureError,
    UnboundedError,
)
from .krylov import (
    ConvergenceTrace,
    KrylovDecomposition,
    LowRankFactor,
    galerkin_solve,
    lanczos_extend,
    residual_explicit,
    truncate_factor,
)
from .sparse_rhs import (
    SparsifyReport,
    SplitPlan,
    predict_pattern,
    split_solve,
    split_solve_dense,
    threshold_sparsify,
)

__version__ = "0.1.0"
