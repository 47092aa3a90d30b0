"""Input validation helpers and small score-vector primitives.

Conventions used across the package:

* A *score vector* is a 1-d float array of length ``n >= 1`` with finite
  entries.  Position ``i`` holds the score of item ``i``.
* A *ranking* is a permutation of ``0..n-1`` given as an index array.
  ``order[0]`` is the item claimed best, so the induced constraint reads
  ``adjusted[order[0]] >= adjusted[order[1]] >= ...``.
* A *block partition* is an ordered sequence of disjoint nonempty index
  blocks covering ``0..n-1``; earlier blocks are claimed no worse than
  later ones.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .exceptions import (
    InvalidPartitionError,
    InvalidRankingError,
    InvalidScoresError,
)


def check_scores(values, name: str = "scores") -> np.ndarray:
    """Coerce ``values`` to a 1-d float64 array and validate it.

    Raises InvalidScoresError if the input is empty, not one-dimensional,
    not numeric, or contains NaN or infinity.  Returns a fresh array, so
    callers may mutate the result without aliasing the input.
    """
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidScoresError(f"{name} must be numeric: {exc}") from None
    if arr.ndim != 1:
        raise InvalidScoresError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidScoresError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise InvalidScoresError(f"{name} contains a non-finite value at index {bad}")
    return arr.copy()


def check_ranking(order, n: int) -> np.ndarray:
    """Validate that ``order`` is a permutation of ``0..n-1``.

    Returns the ranking as an int array.  Raises InvalidRankingError naming
    the first offending position when the length is wrong, an entry is out
    of range, or an entry is repeated.
    """
    arr = np.asarray(order)
    if arr.ndim != 1:
        raise InvalidRankingError(f"ranking must be one-dimensional, got shape {arr.shape}")
    if arr.size != n:
        raise InvalidRankingError(f"ranking has length {arr.size}, expected {n}")
    if not np.issubdtype(arr.dtype, np.integer):
        as_float = np.asarray(order, dtype=float)
        if not np.all(as_float == np.floor(as_float)):
            bad = int(np.flatnonzero(as_float != np.floor(as_float))[0])
            raise InvalidRankingError(f"ranking entry at position {bad} is not an integer")
        arr = as_float.astype(int)
    else:
        arr = arr.astype(int)
    seen = np.zeros(n, dtype=bool)
    for pos, item in enumerate(arr):
        if item < 0 or item >= n:
            raise InvalidRankingError(
                f"ranking entry {item} at position {pos} is out of range for n={n}"
            )
        if seen[item]:
            raise InvalidRankingError(f"ranking repeats item {item} at position {pos}")
        seen[item] = True
    return arr


def check_blocks(blocks: Sequence, n: int) -> tuple[np.ndarray, ...]:
    """Validate an ordered block partition of ``0..n-1``.

    Each block must be nonempty, blocks must be pairwise disjoint, and
    together they must cover every index exactly once.  Returns a tuple of
    int arrays (one per block, input order preserved).
    """
    if len(blocks) == 0:
        raise InvalidPartitionError("partition must contain at least one block")
    out = []
    seen = np.zeros(n, dtype=bool)
    for b, block in enumerate(blocks):
        arr = np.asarray(block)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidPartitionError(f"block {b} must be a nonempty index sequence")
        if not np.issubdtype(arr.dtype, np.integer):
            raise InvalidPartitionError(f"block {b} contains non-integer entries")
        arr = arr.astype(int)
        for item in arr:
            if item < 0 or item >= n:
                raise InvalidPartitionError(f"block {b} contains out-of-range index {item}")
            if seen[item]:
                raise InvalidPartitionError(f"index {item} appears in more than one block")
            seen[item] = True
        out.append(arr)
    if not seen.all():
        missing = int(np.flatnonzero(~seen)[0])
        raise InvalidPartitionError(f"partition does not cover index {missing}")
    return tuple(out)


def total_variation(scores) -> float:
    """Spread of a score vector: max minus min.

    For a vector sorted in decreasing order this equals the sum of adjacent
    gaps, which is the quantity the worst-case risk bounds are stated in.
    """
    arr = check_scores(scores, name="scores")
    return float(arr.max() - arr.min())


def truthful_ranking(true_scores) -> np.ndarray:
    """Ranking that sorts the given scores in decreasing order.

    Ties are broken by item index (stable sort), so the result is
    deterministic; any tie-consistent order induces the same constraint set
    up to relabeling within tied groups.
    """
    arr = check_scores(true_scores, name="true_scores")
    return np.argsort(-arr, kind="stable")
