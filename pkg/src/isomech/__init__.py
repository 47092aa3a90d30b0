"""Score adjustment from self-reported rankings by order-constrained projection.

An owner who knows the true quality order of their items reports a ranking
(or a coarser ordered partition); the mechanism projects noisy raw scores
onto the cone that ranking induces.  For convex nondecreasing utilities
the truthful report is optimal in expectation, and the projection never
increases total squared error.  This package provides exact solvers for
the projection and its variants, the majorization toolkit behind those
guarantees, utility and noise families, a Monte-Carlo harness that checks
the guarantees empirically, and a command-line interface.
"""

from .estimators import ScoreAdjuster
from .exceptions import (
    CombinatorialBlowupError,
    InvalidPartitionError,
    InvalidPlanError,
    InvalidRankingError,
    InvalidScoresError,
    IsomechError,
    LengthMismatchError,
    MissingTrueScoresError,
    NotDecomposableError,
    NotFaithfulPairError,
    NotMajorizedError,
    ParameterError,
    SwapStepError,
    VariantMismatchError,
)
from .majorization import (
    SchurProbeReport,
    SwapStep,
    apply_upward_swap,
    check_hlp,
    check_schur_convex,
    decompose_swaps,
    majorizes,
)
from .mechanism import (
    Diagnostics,
    MechanismConfig,
    MechanismOutcome,
    OwnerReport,
    block_ranking,
    full_ranking,
    run_mechanism,
    truthful_report,
)
from .noise import (
    NoiseModel,
    exchangeable_latent,
    iid_gaussian,
    permuted_base,
    sample_noise,
    trial_seed,
)
from .simulation import (
    FaithfulnessResult,
    RiskPoint,
    StrategyStats,
    TrialPlan,
    TrialReport,
    enumerate_strategies,
    run_faithfulness_pair,
    run_risk_scaling,
    run_strategy_comparison,
    tie_equivalent,
)
from .solvers import (
    IsotonicFit,
    Pool,
    pad_permutation,
    project_block,
    project_isotonic,
    soft_combination,
    solve_penalized,
)
from .utilities import (
    ScoreDependentUtility,
    SeparableUtility,
    SymmetricUtility,
    ThresholdedUtility,
    Utility,
    builtin_utilities,
    check_convex_nondecreasing,
    eval_utility,
    hinge_exponential,
    hinge_linear,
    max_coordinate,
    score_dependent,
    separable,
    square_plus,
    thresholded,
)
from .validation import (
    check_blocks,
    check_ranking,
    check_scores,
    total_variation,
    truthful_ranking,
)

__version__ = "0.1.0"

__all__ = [
    "CombinatorialBlowupError",
    "Diagnostics",
    "FaithfulnessResult",
    "InvalidPartitionError",
    "InvalidPlanError",
    "InvalidRankingError",
    "InvalidScoresError",
    "IsomechError",
    "IsotonicFit",
    "LengthMismatchError",
    "MechanismConfig",
    "MechanismOutcome",
    "MissingTrueScoresError",
    "NoiseModel",
    "NotDecomposableError",
    "NotFaithfulPairError",
    "NotMajorizedError",
    "OwnerReport",
    "ParameterError",
    "Pool",
    "RiskPoint",
    "SchurProbeReport",
    "ScoreAdjuster",
    "ScoreDependentUtility",
    "SeparableUtility",
    "StrategyStats",
    "SwapStep",
    "SwapStepError",
    "SymmetricUtility",
    "ThresholdedUtility",
    "TrialPlan",
    "TrialReport",
    "Utility",
    "VariantMismatchError",
    "apply_upward_swap",
    "block_ranking",
    "builtin_utilities",
    "check_blocks",
    "check_convex_nondecreasing",
    "check_hlp",
    "check_ranking",
    "check_schur_convex",
    "check_scores",
    "decompose_swaps",
    "enumerate_strategies",
    "eval_utility",
    "exchangeable_latent",
    "full_ranking",
    "hinge_exponential",
    "hinge_linear",
    "iid_gaussian",
    "majorizes",
    "max_coordinate",
    "pad_permutation",
    "permuted_base",
    "project_block",
    "project_isotonic",
    "run_faithfulness_pair",
    "run_mechanism",
    "run_risk_scaling",
    "run_strategy_comparison",
    "sample_noise",
    "score_dependent",
    "separable",
    "soft_combination",
    "solve_penalized",
    "square_plus",
    "thresholded",
    "tie_equivalent",
    "total_variation",
    "trial_seed",
    "truthful_ranking",
    "truthful_report",
]
