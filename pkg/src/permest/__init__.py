"""permest: randomized Gaussian determinant estimators for matrix
permanents, with exact oracles, Sinkhorn scaling, bipartite
broad-connectedness checks, and singular-value experiment harnesses.

The core identity: for a nonnegative square matrix A and a matrix G of
i.i.d. standard normals, ``det^2(sqrt(A) o G)`` (entrywise root and
product) is an unbiased estimator of per(A).  The quality of that
estimator is governed by small singular values of inhomogeneous Gaussian
matrices, which the :mod:`permest.spectrum` harnesses probe empirically.
"""

from .errors import (
    CapacityError,
    ConvergenceError,
    DimensionError,
    DomainError,
    NumericError,
    StructuralError,
)
from .estimator import (
    EstimatorRun,
    EstimatorStats,
    estimator_error_report,
    log_det_squared,
    log_sum_exp,
    run_estimator,
    summarize,
)
from .exact import (
    SignedLogValue,
    identity_plus_offdiag,
    permanent_identity_plus_offdiag,
    permanent_identity_plus_offdiag_series,
    permanent_naive,
    permanent_ryser,
)
from .graphs import (
    NOT_REFUTED,
    REFUTED,
    VERIFIED,
    BipartiteGraph,
    ConnectivityParams,
    ConnectivityReport,
    broad_neighbors,
    check_broadly_connected,
    graph_from_matrix,
    graph_from_threshold,
    load_graph,
    save_graph,
)
from .matrices import (
    MeanMatrix,
    SeedSpec,
    VarianceProfile,
    as_matrix,
    entrywise_sqrt,
    hadamard,
    load_matrix,
    matrix_fingerprint,
    sample_gaussian_matrix,
    sample_inhomogeneous_gaussian,
    save_matrix,
)
from .scaling import ScalingResult, log_permanent_offset, sinkhorn_scale
from .spectrum import (
    GapReport,
    SingularSpectrum,
    TailExperimentConfig,
    TruncationSchedule,
    concentration_experiment,
    intermediate_sv_tail,
    jensen_gap_experiment,
    max_truncation_levels,
    mean_norm_check,
    second_moment_check,
    singular_values,
    smallest_sv_tail,
    truncated_log_det,
    truncation_schedule,
    wilson_interval,
)

__version__ = "0.1.0"

__all__ = [
    "BipartiteGraph",
    "CapacityError",
    "ConnectivityParams",
    "ConnectivityReport",
    "ConvergenceError",
    "DimensionError",
    "DomainError",
    "EstimatorRun",
    "EstimatorStats",
    "GapReport",
    "MeanMatrix",
    "NOT_REFUTED",
    "NumericError",
    "REFUTED",
    "ScalingResult",
    "SeedSpec",
    "SignedLogValue",
    "SingularSpectrum",
    "StructuralError",
    "TailExperimentConfig",
    "TruncationSchedule",
    "VERIFIED",
    "VarianceProfile",
    "as_matrix",
    "broad_neighbors",
    "check_broadly_connected",
    "concentration_experiment",
    "entrywise_sqrt",
    "estimator_error_report",
    "graph_from_matrix",
    "graph_from_threshold",
    "hadamard",
    "identity_plus_offdiag",
    "intermediate_sv_tail",
    "jensen_gap_experiment",
    "load_graph",
    "load_matrix",
    "log_det_squared",
    "log_permanent_offset",
    "log_sum_exp",
    "matrix_fingerprint",
    "max_truncation_levels",
    "mean_norm_check",
    "permanent_identity_plus_offdiag",
    "permanent_identity_plus_offdiag_series",
    "permanent_naive",
    "permanent_ryser",
    "run_estimator",
    "sample_gaussian_matrix",
    "sample_inhomogeneous_gaussian",
    "save_graph",
    "save_matrix",
    "second_moment_check",
    "singular_values",
    "sinkhorn_scale",
    "smallest_sv_tail",
    "summarize",
    "truncated_log_det",
    "truncation_schedule",
    "wilson_interval",
]
