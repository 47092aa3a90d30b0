"""Exception types raised by the public API.

Every error that reports a bad input names the offending index, id, or
parameter in its message, so callers can surface actionable diagnostics
without string-parsing beyond the message itself.
"""


class IsomechError(Exception):
    """Base class for all package-specific errors."""


class InvalidScoresError(IsomechError, ValueError):
    """A score vector is empty, non-numeric, or contains NaN/inf."""


class InvalidRankingError(IsomechError, ValueError):
    """A ranking is not a permutation: wrong length, duplicate, or out of range."""


class InvalidPartitionError(IsomechError, ValueError):
    """A block partition does not split ``range(n)`` into disjoint nonempty blocks."""


class ParameterError(IsomechError, ValueError):
    """A scalar parameter is outside its valid range (theta, lam, a, c, ...)."""


class LengthMismatchError(IsomechError, ValueError):
    """Two vectors that must share a length do not."""


class SwapStepError(IsomechError, ValueError):
    """An upward-swap step has a bad index pair or negative mass."""


class NotMajorizedError(IsomechError, ValueError):
    """A pair of vectors fails the prefix-dominance precondition."""


class NotDecomposableError(IsomechError, RuntimeError):
    """The swap-decomposition construction failed to terminate cleanly.

    The greedy construction provably succeeds on any majorizing pair, so
    seeing this error indicates a bug rather than a bad input.
    """


class VariantMismatchError(IsomechError, ValueError):
    """An owner report's shape does not match the configured mechanism variant."""


class MissingTrueScoresError(IsomechError, ValueError):
    """A score-dependent utility was evaluated without true scores."""


class InvalidPlanError(IsomechError, ValueError):
    """A simulation plan is internally inconsistent."""


class CombinatorialBlowupError(IsomechError, ValueError):
    """An exhaustive strategy enumeration would exceed the supported size."""


class NotFaithfulPairError(IsomechError, ValueError):
    """The two candidate rankings do not satisfy prefix dominance on true scores."""
