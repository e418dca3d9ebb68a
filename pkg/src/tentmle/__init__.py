"""Log-concave maximum likelihood density estimation over tent functions.

The estimator represents a density as the exponential of the least concave
function interpolating one height per data point, zero outside the convex
hull. Fitting ascends the likelihood with stochastic gradients driven by
hit-and-run sampling; exact quadrature, a brute-force oracle, partition
estimation, and a command line front end round out the toolkit.
"""

from . import errors
from .estimator import LogConcaveMLE
from .fit import (
    FitConfig,
    FitReport,
    Model,
    default_chain_budget,
    expected_gap_bound,
    fit_with_restarts,
    log_likelihood,
    normalize,
    oracle_fit,
    sgd_fit,
    strict_chain_budget,
)
from .model_io import (
    document_to_model,
    model_to_document,
    read_model,
    write_model,
)
from .partition import (
    SliceEstimate,
    level_set_volume,
    log_partition_quadrature,
    log_partition_sliced,
    statistic_expectation_quadrature,
    tent_moments_quadrature,
    truncation_depth,
)
from .sampling import (
    AffineMap,
    Chord,
    Hyperplane,
    LineTent,
    chord_range,
    chord_through,
    default_chain_steps,
    estimate_covariance,
    hit_and_run,
    level_set_separation,
    line_tent_1d,
    restrict_to_line,
    round_to_isotropic,
    sample_chain,
    sample_line_tent,
    segment_mass,
    segment_masses,
)
from .tent import PointSet, PolyStat, as_heights, in_hull, poly_stat, tent_eval

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "Chord",
    "FitConfig",
    "FitReport",
    "Hyperplane",
    "LineTent",
    "LogConcaveMLE",
    "Model",
    "PointSet",
    "PolyStat",
    "SliceEstimate",
    "as_heights",
    "chord_range",
    "chord_through",
    "default_chain_budget",
    "default_chain_steps",
    "document_to_model",
    "errors",
    "estimate_covariance",
    "expected_gap_bound",
    "fit_with_restarts",
    "hit_and_run",
    "in_hull",
    "level_set_separation",
    "level_set_volume",
    "line_tent_1d",
    "log_likelihood",
    "log_partition_quadrature",
    "log_partition_sliced",
    "model_to_document",
    "normalize",
    "oracle_fit",
    "poly_stat",
    "read_model",
    "restrict_to_line",
    "round_to_isotropic",
    "sample_chain",
    "sample_line_tent",
    "segment_mass",
    "segment_masses",
    "sgd_fit",
    "statistic_expectation_quadrature",
    "strict_chain_budget",
    "tent_eval",
    "tent_moments_quadrature",
    "truncation_depth",
    "write_model",
]
