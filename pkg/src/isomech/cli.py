"""Command-line interface: adjust scores, test truthfulness, trace risk.

Subcommands
-----------
``adjust``        project a score file along a ranking file, emit JSON
``truthfulness``  run a strategy-comparison experiment from a JSON config
``risk-curve``    estimate mechanism risk across problem sizes, emit CSV

Exit codes: 0 on success, 2 for unreadable or malformed inputs (the message
names the offending line), 3 for consistent-but-contradictory inputs such
as an id that appears in one file and not the other, and 4 when an
exhaustive enumeration would blow up.  Outputs are written to a temporary
file and renamed into place, so a failing run never leaves partial output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from .exceptions import CombinatorialBlowupError, IsomechError
from .mechanism import MechanismConfig, OwnerReport, block_ranking, full_ranking, run_mechanism
from .noise import exchangeable_latent, iid_gaussian, permuted_base
from .simulation import TrialPlan, enumerate_strategies, run_risk_scaling, run_strategy_comparison
from .utilities import (
    hinge_exponential,
    hinge_linear,
    max_coordinate,
    score_dependent,
    square_plus,
    thresholded,
)

MAX_TOTAL_EVALUATIONS = 50_000_000

VARIANT_ALIASES = {
    "hard": "hard",
    "block": "block",
    "soft": "convex-combination",
    "convex-combination": "convex-combination",
    "penalized": "penalized",
}


class ParseFailure(Exception):
    """Input file or config could not be parsed (exit 2)."""


class ConsistencyFailure(Exception):
    """Inputs parse but contradict each other (exit 3)."""


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".isomech-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        _atomic_write(out, text)


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise ParseFailure(f"cannot read {path}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise ParseFailure(f"{path} is not valid UTF-8: {exc}") from None


def _sniff_delimiter(header_line: str) -> str:
    for candidate in ("\t", ";", ","):
        if candidate in header_line:
            return candidate
    return ","


def read_score_file(path: str):
    """Parse a delimiter-separated score file.

    Expects a header naming ``item_id`` and ``raw_score`` (optionally
    ``reviewer_count``).  Returns ``(ids, raw, reviewer_counts)`` where
    ``reviewer_counts`` is None when the column is absent.
    """
    text = _read_text(path)
    lines = text.splitlines()
    if not lines:
        raise ParseFailure(f"{path} line 1: file is empty")
    delimiter = _sniff_delimiter(lines[0])
    rows = list(csv.reader(lines, delimiter=delimiter))
    header = [cell.strip() for cell in rows[0]]
    try:
        id_col = header.index("item_id")
        score_col = header.index("raw_score")
    except ValueError:
        raise ParseFailure(
            f"{path} line 1: header must name item_id and raw_score, got {header}"
        ) from None
    count_col = header.index("reviewer_count") if "reviewer_count" in header else None
    ids: list[str] = []
    raw: list[float] = []
    counts: list[int] = []
    seen: set[str] = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            raise ParseFailure(f"{path} line {lineno}: expected {len(header)} fields, got {len(row)}")
        item = row[id_col].strip()
        if not item:
            raise ParseFailure(f"{path} line {lineno}: empty item_id")
        if item in seen:
            raise ConsistencyFailure(f"{path} line {lineno}: duplicate item_id {item!r}")
        seen.add(item)
        try:
            value = float(row[score_col])
        except ValueError:
            raise ParseFailure(
                f"{path} line {lineno}: cannot parse raw_score {row[score_col]!r}"
            ) from None
        if not np.isfinite(value):
            raise ParseFailure(f"{path} line {lineno}: raw_score must be finite")
        if count_col is not None:
            try:
                counts.append(int(row[count_col]))
            except ValueError:
                raise ParseFailure(
                    f"{path} line {lineno}: cannot parse reviewer_count {row[count_col]!r}"
                ) from None
        ids.append(item)
        raw.append(value)
    if not ids:
        raise ParseFailure(f"{path}: no data rows")
    return ids, raw, (counts if count_col is not None else None)


def read_ranking_file(path: str):
    """Parse a ranking file into a list of id-groups, best first.

    Each nonempty line is one group; ids on a line are comma-separated.
    A full ranking is the special case where every group has one id.
    """
    text = _read_text(path)
    groups: list[list[str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        group = [part.strip() for part in line.split(",")]
        if any(not part for part in group):
            raise ParseFailure(f"{path} line {lineno}: empty id in ranking line")
        groups.append(group)
    if not groups:
        raise ParseFailure(f"{path}: ranking file has no entries")
    return groups


def _ids_to_indices(groups, ids, path: str):
    index_of = {item: k for k, item in enumerate(ids)}
    seen: set[str] = set()
    resolved: list[list[int]] = []
    for group in groups:
        indices = []
        for item in group:
            if item not in index_of:
                raise ConsistencyFailure(
                    f"{path}: ranking names unknown item_id {item!r}"
                )
            if item in seen:
                raise ConsistencyFailure(
                    f"{path}: ranking repeats item_id {item!r}"
                )
            seen.add(item)
            indices.append(index_of[item])
        resolved.append(indices)
    missing = [item for item in ids if item not in seen]
    if missing:
        raise ConsistencyFailure(f"{path}: ranking omits item_id {missing[0]!r}")
    return resolved


def _build_report(groups, variant: str, path: str) -> OwnerReport:
    if variant == "block":
        return block_ranking(groups)
    flat = []
    for group in groups:
        if len(group) != 1:
            raise ConsistencyFailure(
                f"{path}: variant requires one id per line, found a line with {len(group)}"
            )
        flat.append(group[0])
    return full_ranking(flat)


def _config_from_args(variant_alias: str, theta: float, lam: float) -> MechanismConfig:
    variant = VARIANT_ALIASES[variant_alias]
    if variant == "convex-combination":
        return MechanismConfig(variant=variant, theta=theta)
    if variant == "penalized":
        return MechanismConfig(variant=variant, lam=lam)
    return MechanismConfig(variant=variant)


def cmd_adjust(args) -> int:
    ids, raw, counts = read_score_file(args.scores)
    groups = read_ranking_file(args.ranking)
    resolved = _ids_to_indices(groups, ids, args.ranking)
    config = _config_from_args(args.variant, args.theta, getattr(args, "lam"))
    report = _build_report(resolved, config.variant, args.ranking)
    outcome = run_mechanism(np.asarray(raw, dtype=float), report, config)
    items = []
    for k, item in enumerate(ids):
        entry = {"id": item, "raw": raw[k], "adjusted": float(outcome.adjusted[k])}
        if counts is not None:
            entry["reviewer_count"] = counts[k]
        items.append(entry)
    payload = {
        "items": items,
        "variant": args.variant,
        "objective": outcome.diagnostics.objective,
        "residual": outcome.diagnostics.residual,
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


_NOISE_KINDS = ("iid-gaussian", "exchangeable-latent", "permuted-base")


def _noise_from_config(cfg: dict):
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ParseFailure("config: noise must be an object with a 'kind'")
    kind = cfg["kind"]
    if kind == "iid-gaussian":
        return iid_gaussian(float(cfg.get("sigma", 1.0)))
    if kind == "exchangeable-latent":
        return exchangeable_latent(float(cfg.get("sigma", 1.0)), float(cfg.get("tau", 0.0)))
    if kind == "permuted-base":
        if "base" not in cfg:
            raise ParseFailure("config: permuted-base noise needs a 'base' vector")
        return permuted_base(np.asarray(cfg["base"], dtype=float))
    raise ParseFailure(f"config: unknown noise kind {kind!r}, expected one of {_NOISE_KINDS}")


def _scalar_from_config(cfg: dict, context: str):
    name = cfg.get("name")
    if name == "square-plus":
        return lambda t: max(0.0, t) ** 2
    if name == "hinge-linear":
        a = float(cfg.get("a", 1.0))
        b = float(cfg.get("b", 0.0))
        return lambda t: max(0.0, a * t + b)
    raise ParseFailure(f"config: {context} must be square-plus or hinge-linear, got {name!r}")


def _utility_from_config(cfg: dict):
    if not isinstance(cfg, dict) or "name" not in cfg:
        raise ParseFailure("config: utility must be an object with a 'name'")
    name = cfg["name"]
    if name == "hinge-linear":
        return hinge_linear(a=float(cfg.get("a", 1.0)), b=float(cfg.get("b", 0.0)))
    if name == "hinge-exponential":
        return hinge_exponential(
            a=float(cfg.get("a", 1.0)), b=float(cfg.get("b", 0.0)), c=float(cfg.get("c", 1.0))
        )
    if name == "square-plus":
        return square_plus()
    if name == "max-coordinate":
        return max_coordinate()
    if name == "thresholded":
        return thresholded(u=float(cfg.get("u", 1.0)), r0=float(cfg.get("r0", 0.0)))
    if name == "score-dependent":
        g = _scalar_from_config(cfg.get("g", {}), "utility.g")
        h = _scalar_from_config(cfg.get("h", {}), "utility.h")
        return score_dependent(g, h)
    raise ParseFailure(f"config: unknown utility {name!r}")


def _mechanism_from_config(cfg: dict) -> MechanismConfig:
    if not isinstance(cfg, dict):
        raise ParseFailure("config: mechanism must be an object")
    alias = cfg.get("variant", "hard")
    if alias not in VARIANT_ALIASES:
        raise ParseFailure(f"config: unknown variant {alias!r}")
    variant = VARIANT_ALIASES[alias]
    if variant == "convex-combination":
        return MechanismConfig(variant=variant, theta=float(cfg.get("theta", 0.5)))
    if variant == "penalized":
        lam = cfg.get("lambda", cfg.get("lam", 1.0))
        return MechanismConfig(variant=variant, lam=float(lam))
    return MechanismConfig(variant=variant)


def _strategies_from_config(choice, n: int, variant: str):
    if choice == "all":
        if variant == "block":
            raise ParseFailure(
                "config: strategies 'all' needs sizes for block variants; "
                "use {\"kind\": \"block\", \"sizes\": [...]}"
            )
        return enumerate_strategies("ranking", n)
    if isinstance(choice, dict):
        kind = choice.get("kind")
        if kind == "block":
            return enumerate_strategies("block", n, sizes=choice.get("sizes"))
        if kind == "ranking":
            return enumerate_strategies("ranking", n)
        raise ParseFailure(f"config: unknown strategies kind {kind!r}")
    if isinstance(choice, list):
        reports = []
        for entry in choice:
            if not isinstance(entry, list) or not entry:
                raise ParseFailure("config: each strategy must be a nonempty list")
            if isinstance(entry[0], list):
                reports.append(block_ranking(entry))
            else:
                reports.append(full_ranking(entry))
        return tuple(reports)
    raise ParseFailure("config: strategies must be 'all', an object, or a list")


def _load_json(path: str) -> dict:
    text = _read_text(path)
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"{path} line {exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(cfg, dict):
        raise ParseFailure(f"{path}: config must be a JSON object")
    return cfg


def cmd_truthfulness(args) -> int:
    cfg = _load_json(args.config)
    for key in ("true_scores", "noise", "utility", "strategies"):
        if key not in cfg:
            raise ParseFailure(f"{args.config}: config is missing {key!r}")
    true_scores = np.asarray(cfg["true_scores"], dtype=float)
    mechanism = _mechanism_from_config(cfg.get("mechanism", {}))
    strategies = _strategies_from_config(cfg["strategies"], true_scores.size, mechanism.variant)
    trials = int(args.trials if args.trials is not None else cfg.get("trials", 10_000))
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    if trials * len(strategies) > MAX_TOTAL_EVALUATIONS:
        raise CombinatorialBlowupError(
            f"{trials} trials x {len(strategies)} strategies exceeds "
            f"{MAX_TOTAL_EVALUATIONS} evaluations"
        )
    plan = TrialPlan(
        true_scores=true_scores,
        noise=_noise_from_config(cfg["noise"]),
        utility=_utility_from_config(cfg["utility"]),
        mechanism=mechanism,
        strategies=tuple(strategies),
        trials=trials,
        master_seed=seed,
    )
    report = run_strategy_comparison(plan)
    csv_buf = io.StringIO()
    writer = csv.writer(csv_buf)
    writer.writerow(
        ["strategy", "mean_utility", "std_err", "mean_sq_error", "paired_gap", "gap_std_err"]
    )
    for stat in report.strategies:
        writer.writerow(
            [
                stat.report.describe(),
                f"{stat.mean_utility:.10g}",
                f"{stat.utility_std_err:.10g}",
                f"{stat.mean_sq_error:.10g}",
                f"{stat.paired_gap:.10g}",
                f"{stat.gap_std_err:.10g}",
            ]
        )
    verdict = {
        "truthful_is_argmax": report.truthful_is_argmax,
        "truthful_strategy": report.reference.report.describe(),
        "truthful_mean_utility": report.reference.mean_utility,
        "best_mean_utility": max(s.mean_utility for s in report.strategies),
        "n_strategies": len(report.strategies),
        "trials": report.trials,
        "seed": seed,
    }
    _atomic_write(args.out + ".csv", csv_buf.getvalue())
    _atomic_write(args.out + ".json", json.dumps(verdict, indent=2) + "\n")
    return 0


def cmd_risk_curve(args) -> int:
    try:
        grid = [int(part) for part in args.n_grid.split(",") if part.strip()]
    except ValueError:
        raise ParseFailure(f"--n-grid must be comma-separated integers, got {args.n_grid!r}")
    points = run_risk_scaling(grid, args.sigma, args.spread, args.trials, args.seed)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["n", "mechanism_risk", "raw_risk", "ratio", "ratio_std_err"])
    for point in points:
        writer.writerow(
            [
                point.n,
                f"{point.mechanism_risk:.10g}",
                f"{point.raw_risk:.10g}",
                f"{point.ratio:.10g}",
                f"{point.ratio_std_err:.10g}",
            ]
        )
    _emit(buf.getvalue(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isomech",
        description="Score adjustment from self-reported rankings, plus a simulation harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    adjust = sub.add_parser("adjust", help="adjust a score file along a ranking file")
    adjust.add_argument("scores", help="DSV file with item_id and raw_score columns")
    adjust.add_argument("ranking", help="ranking file: one id per line, or comma-grouped blocks")
    adjust.add_argument("--variant", choices=sorted(set(VARIANT_ALIASES) - {"convex-combination"}),
                        default="hard")
    adjust.add_argument("--theta", type=float, default=0.5, help="blend weight for soft")
    adjust.add_argument("--lambda", dest="lam", type=float, default=1.0,
                        help="penalty weight for penalized")
    adjust.add_argument("--out", default=None, help="output JSON path (default stdout)")
    adjust.set_defaults(func=cmd_adjust)

    truth = sub.add_parser("truthfulness", help="run a strategy comparison from a JSON config")
    truth.add_argument("config", help="JSON experiment config")
    truth.add_argument("--trials", type=int, default=None, help="override config trials")
    truth.add_argument("--seed", type=int, default=None, help="override config seed")
    truth.add_argument("--out", required=True,
                       help="output prefix; writes <out>.csv and <out>.json")
    truth.set_defaults(func=cmd_truthfulness)

    risk = sub.add_parser("risk-curve", help="estimate mechanism risk across sizes")
    risk.add_argument("--n-grid", default="256,1024,4096", help="comma-separated sizes")
    risk.add_argument("--sigma", type=float, default=1.0, help="noise level")
    risk.add_argument("--spread", type=float, default=1.0,
                      help="range of the equally spaced true scores")
    risk.add_argument("--trials", type=int, default=2000, help="trials per size")
    risk.add_argument("--seed", type=int, default=0, help="master seed")
    risk.add_argument("--out", default=None, help="output CSV path (default stdout)")
    risk.set_defaults(func=cmd_risk_curve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConsistencyFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CombinatorialBlowupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except IsomechError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
