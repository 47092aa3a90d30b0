"""Projection of score vectors onto ranking-constrained cones.

The hard solver projects a raw score vector onto the cone of vectors that
are nonincreasing along a reported ranking, using pool-adjacent-violators
merging.  Variants cover ordered block partitions (projection after a
padding permutation), convex blends of the projection with the raw scores,
and a penalized relaxation whose solution path is piecewise linear in the
penalty weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import ParameterError
from .validation import check_blocks, check_ranking, check_scores


class Pool(NamedTuple):
    """A maximal constant segment of the fit, in ranked (permuted) positions.

    ``start``/``stop`` follow half-open slice conventions, so the segment
    covers positions ``start, ..., stop - 1`` of the permuted vector.
    """

    start: int
    stop: int
    value: float


@dataclass(frozen=True, eq=False)
class IsotonicFit:
    """Result of projecting scores onto a ranking cone.

    Attributes
    ----------
    adjusted : ndarray
        Projected scores, indexed by item (original order).
    pools : tuple of Pool
        Constant segments of the fit in ranked positions, best to worst.
    objective : float
        Half the squared distance between raw and adjusted scores.
    """

    adjusted: np.ndarray
    pools: tuple[Pool, ...]
    objective: float


def _pava_nonincreasing(values):
    """Pool-adjacent-violators pass for a nonincreasing target.

    Takes a sequence of floats and returns ``(fitted, pools)`` where
    ``fitted`` is a list of the same length and ``pools`` is a list of
    ``(start, stop, mean)`` triples.  Adjacent pools merge exactly when the
    right pool mean strictly exceeds the left pool mean; equal neighbors
    are left as separate pools, which changes nothing about the fitted
    vector but keeps the pass deterministic.
    """
    sums: list[float] = []
    counts: list[int] = []
    starts: list[int] = []
    for k, x in enumerate(values):
        cur_sum = x
        cur_cnt = 1
        cur_start = k
        # Merge while the pool on the left has a strictly smaller mean.
        while sums and sums[-1] * cur_cnt < cur_sum * counts[-1]:
            cur_sum += sums.pop()
            cur_cnt += counts.pop()
            cur_start = starts.pop()
        sums.append(cur_sum)
        counts.append(cur_cnt)
        starts.append(cur_start)
    fitted: list[float] = []
    pools: list[tuple[int, int, float]] = []
    for total, cnt, start in zip(sums, counts, starts):
        value = total / cnt
        pools.append((start, start + cnt, value))
        fitted.extend([value] * cnt)
    return fitted, pools


def _fit_from_order(y: np.ndarray, order: np.ndarray) -> IsotonicFit:
    permuted = y[order].tolist()
    fitted, raw_pools = _pava_nonincreasing(permuted)
    adjusted = np.empty_like(y)
    adjusted[order] = fitted
    objective = 0.5 * float(np.sum((y - adjusted) ** 2))
    pools = tuple(Pool(s, e, v) for s, e, v in raw_pools)
    return IsotonicFit(adjusted=adjusted, pools=pools, objective=objective)


def project_isotonic(y, ranking) -> IsotonicFit:
    """Project scores onto the cone induced by a full ranking.

    Finds the vector closest to ``y`` in squared distance among all vectors
    ``r`` with ``r[ranking[0]] >= r[ranking[1]] >= ...``.  Runs in linear
    time after permuting by the ranking.
    """
    y = check_scores(y, name="y")
    order = check_ranking(ranking, y.size)
    return _fit_from_order(y, order)


def pad_permutation(blocks, y) -> np.ndarray:
    """Expand an ordered block partition into a full ranking.

    Within each block, items are ordered by decreasing raw score (ties kept
    in index order); blocks are concatenated in their given order.  The
    chain cone of the returned ranking is contained in the block cone, and
    projecting onto it yields the block-cone projection.
    """
    y = check_scores(y, name="y")
    blocks = check_blocks(blocks, y.size)
    parts = []
    for block in blocks:
        inner = np.argsort(-y[block], kind="stable")
        parts.append(block[inner])
    return np.concatenate(parts)


def project_block(y, blocks) -> IsotonicFit:
    """Project scores onto the cone induced by an ordered block partition.

    The constraint requires every item of an earlier block to end up no
    lower than every item of a later block; within a block there is no
    constraint.  The minimizer keeps the raw within-block order, so the
    problem reduces to a chain projection along the padding permutation.
    Pools are reported in the padded order.
    """
    y = check_scores(y, name="y")
    order = pad_permutation(blocks, y)
    return _fit_from_order(y, order)


def soft_combination(y, ranking, theta: float) -> np.ndarray:
    """Blend the hard projection with the raw scores.

    Returns ``theta * projected + (1 - theta) * y`` for ``theta`` strictly
    between 0 and 1; the endpoints are rejected because they degenerate to
    the raw scores or the hard projection.
    """
    if not (isinstance(theta, (int, float)) and np.isfinite(theta)):
        raise ParameterError(f"theta must be a finite number, got {theta!r}")
    if not 0.0 < theta < 1.0:
        raise ParameterError(f"theta must lie strictly between 0 and 1, got {theta}")
    fit = project_isotonic(y, ranking)
    y = check_scores(y, name="y")
    return theta * fit.adjusted + (1.0 - theta) * y


def _penalized_path_nonincreasing(v, lam: float):
    """Exact minimizer of ``0.5*||v - x||^2 + lam * sum(pos(x[k+1] - x[k]))``.

    Follows the solution path in the penalty weight: fitted values are
    piecewise constant on groups, groups move linearly in the weight, and
    two adjacent groups fuse when their values collide.  Group values obey
    the stationarity identity ``value = (sum + weight * (h_right - h_left))
    / size`` where ``h`` is 1 on boundaries that are still increasing and 0
    otherwise, so values are recomputed from group sums at every event
    rather than accumulated.  Returns ``(fitted, groups)`` with groups as
    ``(start, stop, value)`` triples.
    """
    sums: list[float] = []
    widths: list[int] = []
    starts: list[int] = []
    for k, x in enumerate(v):
        if widths and x == v[k - 1]:
            sums[-1] += x
            widths[-1] += 1
        else:
            sums.append(x)
            widths.append(1)
            starts.append(k)
    values = [sums[j] / widths[j] for j in range(len(sums))]
    h = [1.0 if values[j + 1] > values[j] else 0.0 for j in range(len(values) - 1)]
    lam_cur = 0.0
    while len(sums) > 1:
        count = len(sums)
        h_left = [0.0] + h
        h_right = h + [0.0]
        slope = [(h_right[j] - h_left[j]) / widths[j] for j in range(count)]
        values = [
            (sums[j] + lam_cur * (h_right[j] - h_left[j])) / widths[j] for j in range(count)
        ]
        delta_min = None
        hit: set[int] = set()
        for j in range(count - 1):
            closing = slope[j] - slope[j + 1]
            if closing == 0.0:
                continue
            delta = (values[j + 1] - values[j]) / closing
            if delta < 0.0:
                continue
            if delta_min is None or delta < delta_min * (1.0 - 1e-12):
                delta_min = delta
                hit = {j}
            elif delta <= delta_min * (1.0 + 1e-12):
                hit.add(j)
        if delta_min is None or lam_cur + delta_min >= lam:
            break
        lam_cur += delta_min
        values = [
            (sums[j] + lam_cur * (h_right[j] - h_left[j])) / widths[j] for j in range(count)
        ]
        new_sums: list[float] = []
        new_widths: list[int] = []
        new_starts: list[int] = []
        new_values: list[float] = []
        for j in range(count):
            if j > 0 and (j - 1) in hit:
                new_sums[-1] += sums[j]
                new_widths[-1] += widths[j]
            else:
                new_sums.append(sums[j])
                new_widths.append(widths[j])
                new_starts.append(starts[j])
                new_values.append(values[j])
        sums, widths, starts = new_sums, new_widths, new_starts
        h = [
            1.0 if new_values[j + 1] > new_values[j] else 0.0
            for j in range(len(new_values) - 1)
        ]
    count = len(sums)
    h_left = [0.0] + h
    h_right = h + [0.0]
    final = [(sums[j] + lam * (h_right[j] - h_left[j])) / widths[j] for j in range(count)]
    fitted: list[float] = []
    groups: list[tuple[int, int, float]] = []
    for j in range(count):
        fitted.extend([final[j]] * widths[j])
        groups.append((starts[j], starts[j] + widths[j], final[j]))
    return fitted, groups


def check_penalty_weight(lam) -> float:
    """Validate a penalty weight: a finite, strictly positive number."""
    if not (isinstance(lam, (int, float)) and np.isfinite(lam)):
        raise ParameterError(f"lam must be a finite number, got {lam!r}")
    if lam <= 0:
        raise ParameterError(f"lam must be strictly positive, got {lam}")
    return float(lam)


def solve_penalized(y, ranking, lam: float) -> np.ndarray:
    """Minimize squared distance plus a one-sided penalty on ranking violations.

    Solves ``0.5 * ||y - r||^2 + lam * sum(pos(r[next] - r[prev]))`` where
    the positive parts run over adjacent pairs of the reported ranking.
    Large weights recover the hard projection exactly; the solution path is
    continuous, so moderate weights shrink violations without removing them.
    """
    lam = check_penalty_weight(lam)
    y = check_scores(y, name="y")
    order = check_ranking(ranking, y.size)
    fitted, _ = _penalized_path_nonincreasing(y[order].tolist(), lam)
    adjusted = np.empty_like(y)
    adjusted[order] = fitted
    return adjusted
