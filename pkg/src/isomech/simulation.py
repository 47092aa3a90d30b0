"""Monte-Carlo harness for truthfulness, risk, and dominance experiments.

Every experiment is driven by counter-based per-trial seeds, so results are
reproducible bit for bit and independent of evaluation order.  Competing
strategies always see the same noise draw within a trial (common random
numbers), which makes paired comparisons far tighter than independent runs
would be.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    CombinatorialBlowupError,
    InvalidPlanError,
    NotFaithfulPairError,
    ParameterError,
    VariantMismatchError,
)
from .majorization import majorizes
from .mechanism import MechanismConfig, OwnerReport, truthful_report
from .noise import NoiseModel, sample_noise, trial_seed
from .solvers import _pava_nonincreasing, _penalized_path_nonincreasing
from .utilities import Utility
from .validation import check_blocks, check_ranking, check_scores

MAX_FULL_STRATEGIES = 40_320          # 8!
MAX_BLOCK_STRATEGIES = 10_000


@dataclass(frozen=True, eq=False)
class TrialPlan:
    """A complete description of one strategy-comparison experiment."""

    true_scores: np.ndarray
    noise: NoiseModel
    utility: Utility
    mechanism: MechanismConfig
    strategies: tuple[OwnerReport, ...]
    trials: int
    master_seed: int
    record_trials: bool = False


@dataclass(frozen=True)
class StrategyStats:
    """Per-strategy aggregates over all trials.

    ``paired_gap`` is the mean of (truthful utility - this strategy's
    utility) over shared noise draws; positive values mean the truthful
    report did better.
    """

    report: OwnerReport
    mean_utility: float
    utility_std_err: float
    mean_sq_error: float
    paired_gap: float
    gap_std_err: float
    is_truthful: bool
    tie_equivalent: bool


@dataclass(frozen=True, eq=False)
class TrialReport:
    """Results of a strategy comparison under common random numbers."""

    strategies: tuple[StrategyStats, ...]
    reference: StrategyStats
    truthful_index: int
    trials: int
    n_items: int
    trial_utilities: np.ndarray | None = field(default=None, repr=False)

    @property
    def truthful_is_argmax(self) -> bool:
        best = max(s.mean_utility for s in self.strategies)
        scale = 1.0 + abs(best)
        return self.reference.mean_utility >= best - 1e-12 * scale


def tie_equivalent(report_a: OwnerReport, report_b: OwnerReport, true_scores) -> bool:
    """Whether two reports differ only inside groups of tied true scores.

    Two full rankings are tie-equivalent when they claim the same sequence
    of true scores; two block reports are tie-equivalent when block sizes
    match and corresponding blocks hold the same multiset of true scores.
    Tie-equivalent reports induce the same adjusted-score distribution
    under exchangeable noise.
    """
    R = check_scores(true_scores, name="true_scores")
    if report_a.kind != report_b.kind:
        return False
    if report_a.ranking is not None:
        claimed_a = R[list(report_a.ranking)]
        claimed_b = R[list(report_b.ranking)]
        return bool(np.array_equal(claimed_a, claimed_b))
    if len(report_a.blocks) != len(report_b.blocks):
        return False
    for block_a, block_b in zip(report_a.blocks, report_b.blocks):
        if len(block_a) != len(block_b):
            return False
        if not np.array_equal(np.sort(R[list(block_a)]), np.sort(R[list(block_b)])):
            return False
    return True


def enumerate_strategies(kind: str, n: int, sizes=None) -> tuple[OwnerReport, ...]:
    """All reports of one kind, in deterministic lexicographic order.

    ``kind="ranking"`` yields every permutation of ``0..n-1`` (capped at
    8! = 40320); ``kind="block"`` yields every ordered partition with the
    given block sizes (capped at 10000 partitions).
    """
    if kind == "ranking":
        count = math.factorial(n)
        if count > MAX_FULL_STRATEGIES:
            raise CombinatorialBlowupError(
                f"{count} rankings for n={n} exceeds the cap of {MAX_FULL_STRATEGIES}"
            )
        return tuple(OwnerReport(ranking=perm) for perm in itertools.permutations(range(n)))
    if kind == "block":
        if sizes is None:
            raise ParameterError("block enumeration requires sizes")
        sizes = tuple(int(s) for s in sizes)
        if any(s < 1 for s in sizes) or sum(sizes) != n:
            raise ParameterError(f"block sizes {sizes} do not partition n={n}")
        count = math.factorial(n)
        for s in sizes:
            count //= math.factorial(s)
        if count > MAX_BLOCK_STRATEGIES:
            raise CombinatorialBlowupError(
                f"{count} partitions with sizes {sizes} exceeds the cap of "
                f"{MAX_BLOCK_STRATEGIES}"
            )
        out: list[OwnerReport] = []

        def recurse(remaining: tuple[int, ...], chosen: list[tuple[int, ...]]):
            if len(chosen) == len(sizes):
                out.append(OwnerReport(blocks=tuple(chosen)))
                return
            size = sizes[len(chosen)]
            for combo in itertools.combinations(remaining, size):
                rest = tuple(i for i in remaining if i not in combo)
                recurse(rest, chosen + [combo])

        recurse(tuple(range(n)), [])
        return tuple(out)
    raise ParameterError(f"unknown strategy kind {kind!r}")


def _noise_padding(noise: NoiseModel) -> float:
    pad = 6.0 * (noise.sigma + noise.tau)
    if noise.kind == "permuted-base" and isinstance(noise.base, np.ndarray):
        pad += float(np.max(np.abs(noise.base)))
    return pad


def _validate_plan(plan: TrialPlan):
    R = check_scores(plan.true_scores, name="true_scores")
    n = R.size
    if plan.trials < 1:
        raise InvalidPlanError(f"trials must be at least 1, got {plan.trials}")
    if not plan.strategies:
        raise InvalidPlanError("plan needs at least one strategy")
    kinds = {report.kind for report in plan.strategies}
    if len(kinds) > 1:
        raise InvalidPlanError("plan mixes full-ranking and block strategies")
    kind = kinds.pop()
    if (plan.mechanism.variant == "block") != (kind == "blocks"):
        raise VariantMismatchError(
            f"variant {plan.mechanism.variant!r} does not accept {kind} strategies"
        )
    sizes = None
    for report in plan.strategies:
        if report.ranking is not None:
            check_ranking(np.asarray(report.ranking), n)
        else:
            check_blocks(report.blocks, n)
            shape = tuple(len(b) for b in report.blocks)
            if sizes is None:
                sizes = shape
            elif shape != sizes:
                raise InvalidPlanError(
                    f"block strategies disagree on sizes: {sizes} vs {shape}"
                )
    if hasattr(plan.utility, "validate_on"):
        pad = _noise_padding(plan.noise)
        plan.utility.validate_on(float(R.min()) - pad, float(R.max()) + pad)
    return R, sizes


def _make_adjuster(config: MechanismConfig):
    """Return a function mapping a permuted score list to its fitted list."""
    if config.variant in ("hard", "block"):
        return lambda v: _pava_nonincreasing(v)[0]
    if config.variant == "penalized":
        lam = config.lam
        return lambda v: _penalized_path_nonincreasing(v, lam)[0]
    theta = config.theta
    keep = 1.0 - theta

    def blend(v):
        fitted, _ = _pava_nonincreasing(v)
        return [theta * f + keep * raw for f, raw in zip(fitted, v)]

    return blend


def _pad_order(blocks, y_list) -> list[int]:
    order: list[int] = []
    for block in blocks:
        order.extend(sorted(block, key=lambda i: (-y_list[i], i)))
    return order


def run_strategy_comparison(plan: TrialPlan) -> TrialReport:
    """Compare reporting strategies under shared noise draws.

    Each trial draws one noise vector from the per-trial seed, forms the
    raw scores, runs the configured mechanism under every strategy, and
    evaluates the owner's utility.  The truthful report (derived from the
    true scores) is always evaluated as the pairing reference, whether or
    not it appears in the strategy list.
    """
    R, sizes = _validate_plan(plan)
    n = R.size
    R_list = R.tolist()
    reference = truthful_report(R, plan.mechanism, block_sizes=sizes)
    adjust = _make_adjuster(plan.mechanism)

    prepared = []
    for report in plan.strategies:
        if report.ranking is not None:
            order = list(report.ranking)
            prepared.append(("ranking", order, [R_list[i] for i in order]))
        else:
            prepared.append(("blocks", [list(b) for b in report.blocks], None))
    try:
        ref_index = plan.strategies.index(reference)
    except ValueError:
        ref_index = -1
    if ref_index < 0:
        if reference.ranking is not None:
            ref_order = list(reference.ranking)
            ref_prepared = ("ranking", ref_order, [R_list[i] for i in ref_order])
        else:
            ref_prepared = ("blocks", [list(b) for b in reference.blocks], None)

    n_strategies = len(prepared)
    sum_u = [0.0] * n_strategies
    sum_u2 = [0.0] * n_strategies
    sum_sq = [0.0] * n_strategies
    sum_d = [0.0] * n_strategies
    sum_d2 = [0.0] * n_strategies
    ref_sum_u = 0.0
    ref_sum_u2 = 0.0
    ref_sum_sq = 0.0
    recorded = (
        np.empty((plan.trials, n_strategies)) if plan.record_trials else None
    )
    evaluate = plan.utility.evaluate

    def strategy_utility(entry, y_list):
        kind, entry_order, R_perm = entry
        if kind == "ranking":
            order = entry_order
        else:
            order = _pad_order(entry_order, y_list)
            R_perm = [R_list[i] for i in order]
        v = [y_list[i] for i in order]
        fitted = adjust(v)
        util = evaluate(fitted, R_perm)
        sq = 0.0
        for f, r in zip(fitted, R_perm):
            diff = f - r
            sq += diff * diff
        return util, sq

    trials = plan.trials
    for t in range(trials):
        z = sample_noise(plan.noise, n, trial_seed(plan.master_seed, t))
        y_list = (R + z).tolist()
        utils = [0.0] * n_strategies
        for s in range(n_strategies):
            util, sq = strategy_utility(prepared[s], y_list)
            utils[s] = util
            sum_u[s] += util
            sum_u2[s] += util * util
            sum_sq[s] += sq
        if ref_index >= 0:
            ref_util = utils[ref_index]
        else:
            ref_util, ref_sq = strategy_utility(ref_prepared, y_list)
            ref_sum_u += ref_util
            ref_sum_u2 += ref_util * ref_util
            ref_sum_sq += ref_sq
        for s in range(n_strategies):
            d = ref_util - utils[s]
            sum_d[s] += d
            sum_d2[s] += d * d
        if recorded is not None:
            recorded[t] = utils

    def summarize(total, total2, count):
        mean = total / count
        if count > 1:
            var = max(0.0, (total2 - count * mean * mean) / (count - 1))
            se = math.sqrt(var / count)
        else:
            se = 0.0
        return mean, se

    stats = []
    for s, report in enumerate(plan.strategies):
        mean_u, se_u = summarize(sum_u[s], sum_u2[s], trials)
        gap, gap_se = summarize(sum_d[s], sum_d2[s], trials)
        stats.append(
            StrategyStats(
                report=report,
                mean_utility=mean_u,
                utility_std_err=se_u,
                mean_sq_error=sum_sq[s] / trials,
                paired_gap=gap,
                gap_std_err=gap_se,
                is_truthful=report == reference,
                tie_equivalent=tie_equivalent(report, reference, R),
            )
        )
    if ref_index >= 0:
        reference_stats = stats[ref_index]
    else:
        mean_u, se_u = summarize(ref_sum_u, ref_sum_u2, trials)
        reference_stats = StrategyStats(
            report=reference,
            mean_utility=mean_u,
            utility_std_err=se_u,
            mean_sq_error=ref_sum_sq / trials,
            paired_gap=0.0,
            gap_std_err=0.0,
            is_truthful=True,
            tie_equivalent=True,
        )
    return TrialReport(
        strategies=tuple(stats),
        reference=reference_stats,
        truthful_index=ref_index,
        trials=trials,
        n_items=n,
        trial_utilities=recorded,
    )


@dataclass(frozen=True)
class RiskPoint:
    """Risk estimates at one problem size."""

    n: int
    mechanism_risk: float
    mechanism_se: float
    raw_risk: float
    raw_risk_theory: float
    ratio: float
    ratio_std_err: float


def run_risk_scaling(n_grid, sigma: float, spread: float, trials: int,
                     master_seed: int) -> tuple[RiskPoint, ...]:
    """Estimate squared-error risk of the truthful hard mechanism across sizes.

    For each ``n`` the true scores are equally spaced descending with range
    ``spread``; the raw scores add iid gaussian noise, and the mechanism
    projects along the (truthful) identity ranking.  ``ratio`` normalizes
    the mechanism risk by ``n**(1/3) * sigma**(4/3) * spread**(2/3)``, the
    rate at which the worst-case risk grows.
    """
    if not (np.isfinite(sigma) and sigma > 0):
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if not (np.isfinite(spread) and spread >= 0):
        raise ParameterError(f"spread must be nonnegative, got {spread}")
    if trials < 2:
        raise ParameterError(f"trials must be at least 2, got {trials}")
    points = []
    for n in n_grid:
        n = int(n)
        if n < 2:
            raise ParameterError(f"each n must be at least 2, got {n}")
        R = np.linspace(spread, 0.0, n)
        sum_m = sum_m2 = sum_raw = 0.0
        for t in range(trials):
            rng = np.random.default_rng((master_seed, n, t))
            z = rng.normal(0.0, sigma, size=n)
            y = R + z
            fitted = np.asarray(_pava_nonincreasing(y.tolist())[0])
            mech = float(np.sum((fitted - R) ** 2))
            sum_m += mech
            sum_m2 += mech * mech
            sum_raw += float(z @ z)
        mean_m = sum_m / trials
        var_m = max(0.0, (sum_m2 - trials * mean_m * mean_m) / (trials - 1))
        se_m = math.sqrt(var_m / trials)
        denom = n ** (1.0 / 3.0) * sigma ** (4.0 / 3.0) * spread ** (2.0 / 3.0)
        points.append(
            RiskPoint(
                n=n,
                mechanism_risk=mean_m,
                mechanism_se=se_m,
                raw_risk=sum_raw / trials,
                raw_risk_theory=n * sigma * sigma,
                ratio=mean_m / denom if denom > 0 else math.nan,
                ratio_std_err=se_m / denom if denom > 0 else math.nan,
            )
        )
    return tuple(points)


@dataclass(frozen=True)
class FaithfulnessResult:
    """Paired comparison of two candidate rankings under shared noise."""

    mean_utility_1: float
    se_1: float
    mean_utility_2: float
    se_2: float
    gap: float
    gap_std_err: float
    trials: int

    @property
    def first_dominates(self) -> bool:
        return self.gap >= 0.0


def run_faithfulness_pair(true_scores, order_1, order_2, noise: NoiseModel,
                          utility: Utility, trials: int, master_seed: int,
                          mechanism: MechanismConfig | None = None) -> FaithfulnessResult:
    """Compare two rankings whose claimed score sequences are ordered.

    Requires the first ranking's claimed sequence of true scores to
    majorize the second's (prefix dominance); under that precondition the
    first ranking earns at least as much expected utility for any
    admissible utility.  Raises NotFaithfulPairError otherwise.
    """
    R = check_scores(true_scores, name="true_scores")
    n = R.size
    o1 = check_ranking(np.asarray(order_1), n)
    o2 = check_ranking(np.asarray(order_2), n)
    if not majorizes(R[o1], R[o2]):
        raise NotFaithfulPairError(
            "first ranking's claimed true scores do not majorize the second's"
        )
    if mechanism is None:
        mechanism = MechanismConfig(variant="hard")
    if mechanism.variant == "block":
        raise VariantMismatchError("faithfulness pairs compare full rankings")
    adjust = _make_adjuster(mechanism)
    o1_list = o1.tolist()
    o2_list = o2.tolist()
    R1 = R[o1].tolist()
    R2 = R[o2].tolist()
    evaluate = utility.evaluate
    sum_1 = sum_12 = sum_2 = sum_22 = sum_d = sum_d2 = 0.0
    for t in range(trials):
        z = sample_noise(noise, n, trial_seed(master_seed, t))
        y = (R + z).tolist()
        u1 = evaluate(adjust([y[i] for i in o1_list]), R1)
        u2 = evaluate(adjust([y[i] for i in o2_list]), R2)
        d = u1 - u2
        sum_1 += u1
        sum_12 += u1 * u1
        sum_2 += u2
        sum_22 += u2 * u2
        sum_d += d
        sum_d2 += d * d

    def stats(total, total2):
        mean = total / trials
        if trials > 1:
            var = max(0.0, (total2 - trials * mean * mean) / (trials - 1))
            return mean, math.sqrt(var / trials)
        return mean, 0.0

    m1, s1 = stats(sum_1, sum_12)
    m2, s2 = stats(sum_2, sum_22)
    gap, gap_se = stats(sum_d, sum_d2)
    return FaithfulnessResult(
        mean_utility_1=m1, se_1=s1, mean_utility_2=m2, se_2=s2,
        gap=gap, gap_std_err=gap_se, trials=trials,
    )
