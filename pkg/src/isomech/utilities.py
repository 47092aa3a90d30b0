"""Owner utility functions used by the truthfulness experiments.

Three shapes are supported:

* separable utilities: a scalar function summed over adjusted scores,
* score-dependent utilities: a sum of ``g(adjusted_i) * h(true_i)`` terms,
* symmetric (non-separable) utilities: any symmetric function of the whole
  adjusted vector, such as the maximum coordinate.

The truthful-reporting guarantees hold for nondecreasing convex separable
utilities, for score-dependent utilities with ``g`` nonnegative convex
nondecreasing and ``h`` nonnegative nondecreasing, and for symmetric
functions that respect majorization.  The thresholded family deliberately
breaks convexity and is shipped as a negative control.
"""

from __future__ import annotations

import math

import numpy as np

from .exceptions import MissingTrueScoresError, ParameterError


def _as_floats(values) -> list[float]:
    if isinstance(values, np.ndarray):
        return values.tolist()
    return [float(t) for t in values]


def check_convex_nondecreasing(scalar, lo: float, hi: float, name: str, points: int = 81):
    """Sampled shape check for a scalar utility on ``[lo, hi]``.

    Verifies finiteness, monotonicity, and nonnegative second differences
    on an even grid.  Raises ParameterError naming the function when a
    check fails.  This is a screen, not a proof: it catches configuration
    mistakes, while the randomized midpoint tests in the suite provide the
    stronger evidence.
    """
    xs = np.linspace(lo, hi, points)
    vals = np.array([float(scalar(x)) for x in xs])
    if not np.all(np.isfinite(vals)):
        raise ParameterError(f"utility {name} is non-finite on [{lo}, {hi}]")
    scale = 1.0 + float(np.max(np.abs(vals)))
    if np.any(np.diff(vals) < -1e-9 * scale):
        raise ParameterError(f"utility {name} is not nondecreasing on [{lo}, {hi}]")
    second = vals[2:] - 2.0 * vals[1:-1] + vals[:-2]
    if np.any(second < -1e-8 * scale):
        raise ParameterError(f"utility {name} is not convex on [{lo}, {hi}]")


class Utility:
    """Base interface: ``evaluate(adjusted, true_scores=None) -> float``."""

    name = "utility"
    needs_true_scores = False
    is_separable = False

    def evaluate(self, adjusted, true_scores=None) -> float:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


class SeparableUtility(Utility):
    """Sum of a scalar function over the adjusted scores."""

    is_separable = True

    def __init__(self, scalar, name: str, validate: bool = True,
                 valid_range: tuple[float, float] = (-20.0, 20.0)):
        self.scalar = scalar
        self.name = name
        self.valid_range = valid_range
        if validate:
            check_convex_nondecreasing(scalar, valid_range[0], valid_range[1], name)

    def validate_on(self, lo: float, hi: float):
        """Re-run the shape screen on an experiment's attainable range."""
        check_convex_nondecreasing(self.scalar, lo, hi, self.name)

    def evaluate(self, adjusted, true_scores=None) -> float:
        scalar = self.scalar
        return float(sum(scalar(t) for t in _as_floats(adjusted)))


class ThresholdedUtility(Utility):
    """Step payoff: ``u`` per item at or above the threshold, else nothing.

    Not convex, and the truthful-reporting guarantee genuinely fails for
    it; it exists so experiments can demonstrate that failure.
    """

    is_separable = True

    def __init__(self, u: float, r0: float):
        if not (np.isfinite(u) and u > 0):
            raise ParameterError(f"thresholded utility needs u > 0, got {u}")
        if not np.isfinite(r0):
            raise ParameterError(f"thresholded utility needs a finite threshold, got {r0}")
        self.u = float(u)
        self.r0 = float(r0)
        self.name = f"thresholded(u={u}, r0={r0})"
        self.scalar = lambda t, u=self.u, r0=self.r0: u if t >= r0 else 0.0

    def evaluate(self, adjusted, true_scores=None) -> float:
        u, r0 = self.u, self.r0
        return float(sum(u for t in _as_floats(adjusted) if t >= r0))


class ScoreDependentUtility(Utility):
    """Sum of ``g(adjusted_i) * h(true_i)`` over items.

    ``g`` must be nonnegative, convex, and nondecreasing; ``h`` must be
    nonnegative and nondecreasing.  Evaluation requires the true scores.
    """

    needs_true_scores = True

    def __init__(self, g, h, name: str = "score-dependent",
                 valid_range: tuple[float, float] = (-20.0, 20.0), validate: bool = True):
        self.g = g
        self.h = h
        self.name = name
        if validate:
            lo, hi = valid_range
            check_convex_nondecreasing(g, lo, hi, f"{name}.g")
            xs = np.linspace(lo, hi, 81)
            hv = np.array([float(h(x)) for x in xs])
            gv = np.array([float(g(x)) for x in xs])
            if np.any(gv < -1e-12) or np.any(hv < -1e-12):
                raise ParameterError(f"utility {name} needs nonnegative g and h")
            if np.any(np.diff(hv) < -1e-9 * (1.0 + float(np.max(np.abs(hv))))):
                raise ParameterError(f"utility {name} needs a nondecreasing h")

    def evaluate(self, adjusted, true_scores=None) -> float:
        if true_scores is None:
            raise MissingTrueScoresError(
                f"utility {self.name} requires true scores to evaluate"
            )
        g, h = self.g, self.h
        return float(
            sum(g(a) * h(r) for a, r in zip(_as_floats(adjusted), _as_floats(true_scores)))
        )


class SymmetricUtility(Utility):
    """A symmetric function of the whole adjusted vector."""

    def __init__(self, fn, name: str):
        self.fn = fn
        self.name = name

    def evaluate(self, adjusted, true_scores=None) -> float:
        return float(self.fn(np.asarray(adjusted, dtype=float)))


def hinge_linear(a: float = 1.0, b: float = 0.0) -> SeparableUtility:
    """``max(0, a*r + b)`` summed over items; requires slope ``a > 0``."""
    if not (np.isfinite(a) and a > 0):
        raise ParameterError(f"hinge-linear needs a > 0, got {a}")
    if not np.isfinite(b):
        raise ParameterError(f"hinge-linear needs finite b, got {b}")
    return SeparableUtility(
        lambda t: max(0.0, a * t + b), f"hinge-linear(a={a}, b={b})", validate=False
    )


def hinge_exponential(a: float = 1.0, b: float = 0.0, c: float = 1.0) -> SeparableUtility:
    """``max(0, exp(a*r + b) - c)`` summed over items; needs ``a > 0, c > 0``."""
    if not (np.isfinite(a) and a > 0):
        raise ParameterError(f"hinge-exponential needs a > 0, got {a}")
    if not (np.isfinite(c) and c > 0):
        raise ParameterError(f"hinge-exponential needs c > 0, got {c}")
    if not np.isfinite(b):
        raise ParameterError(f"hinge-exponential needs finite b, got {b}")
    return SeparableUtility(
        lambda t: max(0.0, math.exp(min(a * t + b, 700.0)) - c),
        f"hinge-exponential(a={a}, b={b}, c={c})",
        validate=False,
    )


def square_plus() -> SeparableUtility:
    """``max(0, r)**2`` summed over items."""
    return SeparableUtility(lambda t: max(0.0, t) ** 2, "square-plus", validate=False)


def thresholded(u: float = 1.0, r0: float = 0.0) -> ThresholdedUtility:
    """Step payoff at threshold ``r0`` (non-convex negative control)."""
    return ThresholdedUtility(u, r0)


def max_coordinate() -> SymmetricUtility:
    """Largest adjusted score; symmetric, non-separable, respects majorization."""
    return SymmetricUtility(lambda r: float(np.max(r)), "max-coordinate")


def score_dependent(g, h, name: str = "score-dependent", **kwargs) -> ScoreDependentUtility:
    """Build a score-dependent utility from scalar callables ``g`` and ``h``."""
    return ScoreDependentUtility(g, h, name=name, **kwargs)


def separable(fn, name: str = "custom-separable", **kwargs) -> SeparableUtility:
    """Build a separable utility from a scalar callable, with a shape screen."""
    return SeparableUtility(fn, name, **kwargs)


def eval_utility(utility: Utility, adjusted, true_scores=None) -> float:
    """Evaluate a utility on adjusted scores (module-level convenience)."""
    return utility.evaluate(adjusted, true_scores=true_scores)


def builtin_utilities() -> dict:
    """Catalog of named builtin families, keyed by their config names."""
    return {
        "hinge-linear": hinge_linear,
        "hinge-exponential": hinge_exponential,
        "square-plus": square_plus,
        "max-coordinate": max_coordinate,
        "thresholded": thresholded,
    }
