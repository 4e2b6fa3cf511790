"""Per-coordinate adaptive online gradient descent over box constraints.

Library layout:

  core         sparse vectors, boxes, projection, examples
  losses       linear / absolute / hinge / logistic losses and quadratics
  learners     fixed-rate, adaptive-global, per-coordinate, strongly-convex
               descent; passive-aggressive baseline; the coordinate
               decomposition wrapper
  bounds       regret bounds, the prefix-sqrt inequality, comparators,
               the RegretLedger
  adversarial  the oscillation/ramp family separating constant from
               per-coordinate rates
  data_io      libsvm parsing/serialization, pinned shuffling, results CSV
  engine       dense fast paths for the logistic experiment
  datasets     synthetic stream generators and the bundled sample
  harness      experiment runners behind the CLI
"""

from .adversarial import (
    BadFamilyInstance,
    bad_family,
    best_fixed_eta,
    oscillation_stream,
    ramp_stream,
    regret_floor,
    run_fixed_rate,
    run_per_coordinate,
)
from .bounds import (
    ContractViolation,
    RegretLedger,
    best_constant_rate_bound,
    dominance_check,
    golden_section_minimize,
    per_coordinate_bound,
    prefix_sqrt_inequality,
    rate_sequence_bound,
    static_optimum,
)
from .core import Box, Example, SparseVector, axpy, dot, project
from .data_io import (
    Dataset,
    EmptyDatasetError,
    LibsvmParseError,
    SplitMix64,
    parse_libsvm,
    parse_libsvm_text,
    serialize_libsvm,
    shuffle,
    unit_scale,
    write_results_csv,
)
from .harness import ExperimentResult, RunConfig, UsageError, run_experiment
from .learners import (
    AdaptiveGlobalOGD,
    CompositeDecomposition,
    ConfigurationError,
    FixedStepOGD,
    PassiveAggressive,
    PerCoordinateOGD,
    StronglyConvexOGD,
    per_coordinate_factory,
    strongly_convex_factory,
)
from .losses import (
    AbsoluteLoss,
    ConvexQuadratic,
    HingeLoss,
    LinearLoss,
    LogisticLoss,
    sigmoid,
)

__version__ = "0.1.0"

__all__ = [
    "AbsoluteLoss",
    "AdaptiveGlobalOGD",
    "BadFamilyInstance",
    "Box",
    "CompositeDecomposition",
    "ConfigurationError",
    "ContractViolation",
    "ConvexQuadratic",
    "Dataset",
    "EmptyDatasetError",
    "Example",
    "ExperimentResult",
    "FixedStepOGD",
    "HingeLoss",
    "LibsvmParseError",
    "LinearLoss",
    "LogisticLoss",
    "PassiveAggressive",
    "PerCoordinateOGD",
    "RegretLedger",
    "RunConfig",
    "SparseVector",
    "SplitMix64",
    "StronglyConvexOGD",
    "UsageError",
    "axpy",
    "bad_family",
    "best_constant_rate_bound",
    "best_fixed_eta",
    "dominance_check",
    "dot",
    "golden_section_minimize",
    "oscillation_stream",
    "parse_libsvm",
    "parse_libsvm_text",
    "per_coordinate_bound",
    "per_coordinate_factory",
    "prefix_sqrt_inequality",
    "project",
    "ramp_stream",
    "rate_sequence_bound",
    "regret_floor",
    "run_experiment",
    "run_fixed_rate",
    "run_per_coordinate",
    "serialize_libsvm",
    "shuffle",
    "sigmoid",
    "static_optimum",
    "strongly_convex_factory",
    "unit_scale",
    "write_results_csv",
]
