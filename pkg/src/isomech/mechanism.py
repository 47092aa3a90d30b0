"""Policy layer: one validated transaction from raw scores to adjusted scores.

``run_mechanism`` is the auditable entry point: it checks that the owner's
report matches the configured variant, dispatches to the right solver, and
returns the adjusted scores together with diagnostics (constant segments,
objective value, residual norm).  The variants are:

* ``hard``: exact projection onto the full-ranking cone,
* ``block``: exact projection onto the ordered-partition cone,
* ``convex-combination``: blend ``theta * projection + (1 - theta) * raw``,
* ``penalized``: one-sided penalty on ranking violations with weight ``lam``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError, VariantMismatchError
from .solvers import (
    IsotonicFit,
    Pool,
    _penalized_path_nonincreasing,
    check_penalty_weight,
    pad_permutation,
    project_block,
    project_isotonic,
)
from .validation import check_blocks, check_ranking, check_scores

VARIANTS = ("hard", "block", "convex-combination", "penalized")


@dataclass(frozen=True)
class OwnerReport:
    """An owner's claim about the order of their items.

    Exactly one of ``ranking`` (full order, best first) and ``blocks``
    (ordered partition, best block first) is set.  Instances are built with
    ``full_ranking`` or ``block_ranking`` and are hashable, so they can key
    dictionaries of per-strategy results.
    """

    ranking: tuple[int, ...] | None = None
    blocks: tuple[tuple[int, ...], ...] | None = None

    @property
    def kind(self) -> str:
        return "ranking" if self.ranking is not None else "blocks"

    def describe(self) -> str:
        """Compact text form: ``2>0>1`` for rankings, ``0,1|2,3`` for blocks."""
        if self.ranking is not None:
            return ">".join(str(i) for i in self.ranking)
        return "|".join(",".join(str(i) for i in block) for block in self.blocks)


def full_ranking(order) -> OwnerReport:
    """Report a full ranking (sequence of item indices, best first)."""
    return OwnerReport(ranking=tuple(int(i) for i in order))


def block_ranking(blocks) -> OwnerReport:
    """Report an ordered partition into blocks (best block first)."""
    return OwnerReport(blocks=tuple(tuple(int(i) for i in b) for b in blocks))


@dataclass(frozen=True)
class MechanismConfig:
    """Which variant runs and with what parameters."""

    variant: str = "hard"
    theta: float | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParameterError(
                f"unknown variant {self.variant!r}, expected one of {VARIANTS}"
            )
        if self.variant == "convex-combination":
            if self.theta is None:
                raise ParameterError("convex-combination requires theta")
            if not (np.isfinite(self.theta) and 0.0 < self.theta < 1.0):
                raise ParameterError(
                    f"theta must lie strictly between 0 and 1, got {self.theta}"
                )
        if self.variant == "penalized":
            if self.lam is None:
                raise ParameterError("penalized requires lam")
            check_penalty_weight(self.lam)


@dataclass(frozen=True, eq=False)
class Diagnostics:
    """What the solver did: segments, objective, residual, penalty paid."""

    pools: tuple[Pool, ...]
    objective: float
    residual: float
    penalty: float = 0.0


@dataclass(frozen=True, eq=False)
class MechanismOutcome:
    """Adjusted scores plus the configuration and diagnostics behind them."""

    adjusted: np.ndarray
    variant: MechanismConfig
    diagnostics: Diagnostics


def _check_report(report: OwnerReport, config: MechanismConfig, n: int):
    if config.variant == "block":
        if report.blocks is None:
            raise VariantMismatchError(
                "block variant requires a block report, got a full ranking"
            )
        check_blocks(report.blocks, n)
    else:
        if report.ranking is None:
            raise VariantMismatchError(
                f"{config.variant} variant requires a full ranking, got blocks"
            )
        check_ranking(np.asarray(report.ranking), n)


def run_mechanism(y, report: OwnerReport, config: MechanismConfig) -> MechanismOutcome:
    """Adjust raw scores according to an owner report under one variant.

    The same inputs always produce bit-identical outputs: every code path
    is deterministic and allocation order is fixed.
    """
    y = check_scores(y, name="y")
    _check_report(report, config, y.size)

    if config.variant == "hard":
        fit = project_isotonic(y, np.asarray(report.ranking))
        return _outcome_from_fit(y, fit, config)
    if config.variant == "block":
        fit = project_block(y, report.blocks)
        return _outcome_from_fit(y, fit, config)
    if config.variant == "convex-combination":
        fit = project_isotonic(y, np.asarray(report.ranking))
        adjusted = config.theta * fit.adjusted + (1.0 - config.theta) * y
        diag = Diagnostics(
            pools=fit.pools,
            objective=0.5 * float(np.sum((y - adjusted) ** 2)),
            residual=float(np.linalg.norm(y - adjusted)),
        )
        return MechanismOutcome(adjusted=adjusted, variant=config, diagnostics=diag)
    # penalized
    order = check_ranking(np.asarray(report.ranking), y.size)
    fitted, groups = _penalized_path_nonincreasing(y[order].tolist(), config.lam)
    adjusted = np.empty_like(y)
    adjusted[order] = fitted
    penalty = config.lam * float(
        sum(max(0.0, fitted[k + 1] - fitted[k]) for k in range(len(fitted) - 1))
    )
    diag = Diagnostics(
        pools=tuple(Pool(s, e, v) for s, e, v in groups),
        objective=0.5 * float(np.sum((y - adjusted) ** 2)) + penalty,
        residual=float(np.linalg.norm(y - adjusted)),
        penalty=penalty,
    )
    return MechanismOutcome(adjusted=adjusted, variant=config, diagnostics=diag)


def _outcome_from_fit(y: np.ndarray, fit: IsotonicFit, config: MechanismConfig):
    diag = Diagnostics(
        pools=fit.pools,
        objective=fit.objective,
        residual=float(np.linalg.norm(y - fit.adjusted)),
    )
    return MechanismOutcome(adjusted=fit.adjusted, variant=config, diagnostics=diag)


def truthful_report(true_scores, config: MechanismConfig,
                    block_sizes: tuple[int, ...] | None = None) -> OwnerReport:
    """The report an owner with the given true scores would file honestly.

    For ranking variants this sorts the true scores in decreasing order
    (stable on ties).  For the block variant, ``block_sizes`` gives the
    partition shape and the best items fill the first block.
    """
    true_scores = check_scores(true_scores, name="true_scores")
    order = np.argsort(-true_scores, kind="stable")
    if config.variant != "block":
        return full_ranking(order)
    if block_sizes is None:
        raise ParameterError("block variant needs block_sizes for the truthful report")
    if sum(block_sizes) != true_scores.size or any(s < 1 for s in block_sizes):
        raise ParameterError(
            f"block sizes {block_sizes} do not partition n={true_scores.size}"
        )
    blocks = []
    at = 0
    for size in block_sizes:
        blocks.append(order[at:at + size])
        at += size
    return block_ranking(blocks)
