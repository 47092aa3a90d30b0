"""Prefix-dominance comparisons, mass-moving swaps, and convexity probes.

Majorization here is the *unsorted* prefix form: ``x`` majorizes ``y`` when
every prefix sum of ``x`` is at least the matching prefix sum of ``y`` and
the totals agree.  This is the order that the ranking-cone projection
preserves, and it is strictly stronger than the classical sorted form.

An *upward swap* moves nonnegative mass from a later coordinate to an
earlier one.  Swaps generate the order: a vector majorizes another exactly
when it can be reached by a finite sequence of upward swaps, and
``decompose_swaps`` constructs such a sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import (
    LengthMismatchError,
    NotDecomposableError,
    NotMajorizedError,
    SwapStepError,
)
from .validation import check_scores


@dataclass(frozen=True)
class SwapStep:
    """Move ``mass >= 0`` from coordinate ``j`` to coordinate ``i < j``."""

    i: int
    j: int
    mass: float


@dataclass(frozen=True)
class SchurProbeReport:
    """Outcome of randomized Schur-convexity probing.

    ``pair_violations`` holds ``(x, y, f_x, f_y)`` tuples where a majorizing
    pair failed ``f(x) >= f(y)``; ``gradient_violations`` holds
    ``(point, i, j, product)`` tuples where the sorted-gradient criterion
    failed.  An empty report means every probe passed.
    """

    pair_checks: int
    gradient_checks: int
    pair_violations: tuple
    gradient_violations: tuple

    @property
    def ok(self) -> bool:
        return not self.pair_violations and not self.gradient_violations


def majorizes(x, y, *, exact: bool = False) -> bool:
    """Test prefix dominance: every prefix sum of ``x`` >= that of ``y``,
    with equal totals.

    The float comparison uses an absolute slack of ``1e-9 * (1 + ||x||_1)``
    so that vectors produced by float arithmetic are not rejected over
    rounding dust.  With ``exact=True`` the entries are converted to exact
    rationals and compared without slack, which is the right mode for small
    integer-valued oracle instances.
    """
    x = check_scores(x, name="x")
    y = check_scores(y, name="y")
    if x.size != y.size:
        raise LengthMismatchError(f"length mismatch: {x.size} vs {y.size}")
    if exact:
        px = Fraction(0)
        py = Fraction(0)
        for a, b in zip(x.tolist(), y.tolist()):
            px += Fraction(a)
            py += Fraction(b)
            if px < py:
                return False
        return px == py
    tol = 1e-9 * (1.0 + float(np.sum(np.abs(x))))
    cx = np.cumsum(x)
    cy = np.cumsum(y)
    if abs(cx[-1] - cy[-1]) > tol:
        return False
    return bool(np.all(cx >= cy - tol))


def apply_upward_swap(z, step: SwapStep) -> np.ndarray:
    """Apply one upward swap, returning a new vector.

    Adds ``step.mass`` at position ``step.i`` and removes it at position
    ``step.j``; requires ``i < j`` and nonnegative mass, so the result
    always majorizes the input.
    """
    z = check_scores(z, name="z")
    if not (0 <= step.i < step.j < z.size):
        raise SwapStepError(
            f"swap indices must satisfy 0 <= i < j < n, got i={step.i}, j={step.j}, n={z.size}"
        )
    if not np.isfinite(step.mass) or step.mass < 0:
        raise SwapStepError(f"swap mass must be nonnegative and finite, got {step.mass}")
    out = z.copy()
    out[step.i] += step.mass
    out[step.j] -= step.mass
    return out


def decompose_swaps(x, y) -> list[SwapStep]:
    """Write ``x`` as the result of upward swaps applied to ``y``.

    Greedy transport: walk the coordinates left to right; whenever the
    current coordinate still needs mass, pull it from the nearest later
    coordinate that has surplus.  Prefix dominance guarantees a donor always
    exists, so the construction cannot fail on a genuinely majorizing pair;
    NotDecomposableError signals an internal inconsistency, not bad input.
    Replaying the returned steps on ``y`` reproduces ``x`` up to rounding,
    and every intermediate vector majorizes its predecessor.
    """
    x = check_scores(x, name="x")
    y = check_scores(y, name="y")
    if x.size != y.size:
        raise LengthMismatchError(f"length mismatch: {x.size} vs {y.size}")
    if not majorizes(x, y):
        raise NotMajorizedError("x does not majorize y, no swap decomposition exists")
    need = (x - y).tolist()
    tol = 1e-9 * (1.0 + float(np.sum(np.abs(x))))
    steps: list[SwapStep] = []
    donor = 0
    for i in range(len(need)):
        if need[i] <= tol:
            continue
        donor = max(donor, i + 1)
        while need[i] > tol:
            while donor < len(need) and need[donor] >= -tol:
                donor += 1
            if donor >= len(need):
                raise NotDecomposableError(
                    f"no donor found for coordinate {i}; this indicates a bug"
                )
            mass = min(need[i], -need[donor])
            steps.append(SwapStep(i=i, j=donor, mass=mass))
            need[i] -= mass
            need[donor] += mass
    return steps


def check_hlp(fn, x, y, tol: float = 1e-9) -> bool:
    """Check the convex-sum inequality on a sorted majorizing pair.

    For nonincreasing ``x`` and ``y`` with ``x`` majorizing ``y`` and a
    convex scalar ``fn``, the sum of ``fn`` over ``x`` must be at least the
    sum over ``y``.  Preconditions are verified and raise; the return value
    reports only the inequality itself.
    """
    x = check_scores(x, name="x")
    y = check_scores(y, name="y")
    slack = 1e-9 * (1.0 + float(np.max(np.abs(x))))
    if np.any(np.diff(x) > slack) or np.any(np.diff(y) > slack):
        raise NotMajorizedError("check_hlp requires both vectors sorted nonincreasing")
    if not majorizes(x, y):
        raise NotMajorizedError("check_hlp requires x to majorize y")
    fx = float(sum(fn(t) for t in x.tolist()))
    fy = float(sum(fn(t) for t in y.tolist()))
    return fx >= fy - tol * (1.0 + max(abs(fx), abs(fy)))


def _sorted_majorizing_pair(rng, n: int):
    """Sample a sorted pair where ``x`` majorizes ``y``.

    Starts from a sorted ``y``, applies random upward swaps, then re-sorts
    the result descending.  Sorting can only raise prefix sums, so the
    sorted ``x`` still majorizes the already-sorted ``y``.
    """
    y = np.sort(rng.normal(0.0, 2.0, size=n))[::-1]
    x = y.copy()
    for _ in range(int(rng.integers(1, 2 * n))):
        i = int(rng.integers(0, n - 1))
        j = int(rng.integers(i + 1, n))
        mass = rng.exponential(0.5)
        x[i] += mass
        x[j] -= mass
    return np.sort(x)[::-1], y


def check_schur_convex(fn, n: int, trials: int, seed: int) -> SchurProbeReport:
    """Randomized probe of Schur-convexity for a symmetric vector function.

    Two independent checks run ``trials`` times each: sampled sorted
    majorizing pairs must satisfy ``fn(x) >= fn(y)``, and at random points
    the criterion ``(r_i - r_j) * (g_i - g_j) >= 0`` must hold, where ``g``
    is a central finite-difference gradient with step ``1e-5`` scaled by
    coordinate magnitude.  Violations beyond ``1e-6`` times the function
    scale are collected in the report.
    """
    rng = np.random.default_rng(seed)
    pair_violations = []
    gradient_violations = []
    for _ in range(trials):
        x, y = _sorted_majorizing_pair(rng, n)
        fx = float(fn(x))
        fy = float(fn(y))
        tol = 1e-6 * max(1e-6, abs(fx), abs(fy))
        if fx < fy - tol:
            pair_violations.append((x.copy(), y.copy(), fx, fy))
    for _ in range(trials):
        r = rng.normal(0.0, 2.0, size=n)
        i, j = rng.choice(n, size=2, replace=False)
        g = np.empty(2)
        for k, idx in enumerate((i, j)):
            h = 1e-5 * max(1.0, abs(r[idx]))
            hi = r.copy()
            lo = r.copy()
            hi[idx] += h
            lo[idx] -= h
            g[k] = (float(fn(hi)) - float(fn(lo))) / (2.0 * h)
        product = (r[i] - r[j]) * (g[0] - g[1])
        tol = 1e-6 * max(1e-6, abs(float(fn(r))))
        if product < -tol:
            gradient_violations.append((r.copy(), int(i), int(j), float(product)))
    return SchurProbeReport(
        pair_checks=trials,
        gradient_checks=trials,
        pair_violations=tuple(pair_violations),
        gradient_violations=tuple(gradient_violations),
    )
