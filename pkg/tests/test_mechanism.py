"""Mechanism dispatch: variants, diagnostics, and report validation."""

import numpy as np
import pytest

from isomech import (
    Diagnostics,
    InvalidPartitionError,
    InvalidRankingError,
    MechanismConfig,
    MechanismOutcome,
    OwnerReport,
    ParameterError,
    VariantMismatchError,
    block_ranking,
    full_ranking,
    project_block,
    project_isotonic,
    run_mechanism,
    soft_combination,
    solve_penalized,
    truthful_report,
)


class TestOwnerReport:
    def test_full_ranking(self):
        report = full_ranking([2, 0, 1])
        assert report.kind == "ranking"
        assert report.ranking == (2, 0, 1)
        assert report.blocks is None
        assert report.describe() == "2>0>1"

    def test_block_ranking(self):
        report = block_ranking([[0, 1], [2, 3]])
        assert report.kind == "blocks"
        assert report.blocks == ((0, 1), (2, 3))
        assert report.describe() == "0,1|2,3"

    def test_hashable_and_comparable(self):
        assert full_ranking([0, 1]) == full_ranking([0, 1])
        assert full_ranking([0, 1]) != full_ranking([1, 0])
        assert len({full_ranking([0, 1]), full_ranking([0, 1])}) == 1
        assert len({block_ranking([[0], [1]]), block_ranking([[1], [0]])}) == 2


class TestConfig:
    def test_defaults_to_hard(self):
        assert MechanismConfig().variant == "hard"

    def test_unknown_variant(self):
        with pytest.raises(ParameterError):
            MechanismConfig(variant="softmax")

    def test_convex_combination_requires_interior_theta(self):
        MechanismConfig(variant="convex-combination", theta=0.5)
        with pytest.raises(ParameterError):
            MechanismConfig(variant="convex-combination")
        for theta in (0.0, 1.0, -0.5, float("nan")):
            with pytest.raises(ParameterError):
                MechanismConfig(variant="convex-combination", theta=theta)

    def test_penalized_requires_positive_weight(self):
        MechanismConfig(variant="penalized", lam=2.0)
        with pytest.raises(ParameterError):
            MechanismConfig(variant="penalized")
        for lam in (0.0, -1.0, float("inf")):
            with pytest.raises(ParameterError):
                MechanismConfig(variant="penalized", lam=lam)


class TestDispatch:
    def test_hard_matches_projection(self):
        y = np.array([1.0, 3.0, 2.0])
        report = full_ranking([1, 2, 0])
        out = run_mechanism(y, report, MechanismConfig(variant="hard"))
        assert isinstance(out, MechanismOutcome)
        np.testing.assert_array_equal(
            out.adjusted, project_isotonic(y, [1, 2, 0]).adjusted
        )

    def test_block_matches_block_projection(self):
        y = np.array([4.4, 6.6, 5.0, -1.0])
        report = block_ranking([[0, 2], [1, 3]])
        out = run_mechanism(y, report, MechanismConfig(variant="block"))
        np.testing.assert_array_equal(
            out.adjusted, project_block(y, [[0, 2], [1, 3]]).adjusted
        )

    def test_convex_combination_matches_blend(self):
        y = np.array([1.0, 3.0])
        out = run_mechanism(
            y, full_ranking([0, 1]), MechanismConfig(variant="convex-combination", theta=0.25)
        )
        np.testing.assert_allclose(out.adjusted, soft_combination(y, [0, 1], 0.25))
        np.testing.assert_allclose(out.adjusted, [1.25, 2.75])

    def test_penalized_matches_solver(self):
        y = np.array([0.0, 2.0])
        out = run_mechanism(
            y, full_ranking([0, 1]), MechanismConfig(variant="penalized", lam=0.5)
        )
        np.testing.assert_allclose(out.adjusted, solve_penalized(y, [0, 1], 0.5))
        np.testing.assert_allclose(out.adjusted, [0.5, 1.5])

    def test_bit_identical_across_calls(self):
        rng = np.random.default_rng(401)
        y = rng.normal(0, 2, size=12)
        order = rng.permutation(12)
        for config in (
            MechanismConfig(variant="hard"),
            MechanismConfig(variant="convex-combination", theta=0.3),
            MechanismConfig(variant="penalized", lam=1.7),
        ):
            a = run_mechanism(y, full_ranking(order), config)
            b = run_mechanism(y, full_ranking(order), config)
            assert np.array_equal(a.adjusted, b.adjusted)
            assert a.diagnostics.objective == b.diagnostics.objective


class TestDiagnostics:
    def test_hard_conserves_mass_within_pools(self):
        rng = np.random.default_rng(402)
        for _ in range(50):
            n = int(rng.integers(2, 20))
            y = rng.normal(0, 3, size=n)
            order = rng.permutation(n)
            out = run_mechanism(y, full_ranking(order), MechanismConfig(variant="hard"))
            permuted = y[order]
            for start, stop, value in out.diagnostics.pools:
                assert value * (stop - start) == pytest.approx(
                    float(permuted[start:stop].sum()), rel=1e-10, abs=1e-12
                )
            # the adjusted vector in report order is nonincreasing
            seq = out.adjusted[order]
            assert np.all(np.diff(seq) <= 1e-12)
            # total mass is conserved by averaging
            assert float(out.adjusted.sum()) == pytest.approx(float(y.sum()), rel=1e-10)

    def test_residual_matches_adjustment_norm(self):
        y = np.array([1.0, 3.0])
        out = run_mechanism(y, full_ranking([0, 1]), MechanismConfig())
        assert out.diagnostics.residual == pytest.approx(np.sqrt(2.0))
        assert out.diagnostics.objective == pytest.approx(1.0)
        assert out.diagnostics.penalty == 0.0

    def test_penalized_objective_includes_penalty(self):
        y = np.array([0.0, 2.0])
        lam = 0.5
        out = run_mechanism(
            y, full_ranking([0, 1]), MechanismConfig(variant="penalized", lam=lam)
        )
        fitted = out.adjusted
        fit_cost = 0.5 * float(np.sum((y - fitted) ** 2))
        rise = max(0.0, fitted[1] - fitted[0])
        assert out.diagnostics.penalty == pytest.approx(lam * rise)
        assert out.diagnostics.objective == pytest.approx(fit_cost + lam * rise)
        # (0.5, 1.5): fit cost 0.25, remaining rise 1.0, penalty 0.5
        assert out.diagnostics.objective == pytest.approx(0.75)

    def test_block_satisfies_between_block_constraints(self):
        rng = np.random.default_rng(403)
        for _ in range(50):
            n = 8
            y = rng.normal(0, 3, size=n)
            perm = rng.permutation(n)
            blocks = [perm[:3], perm[3:5], perm[5:]]
            out = run_mechanism(y, block_ranking(blocks), MechanismConfig(variant="block"))
            adj = out.adjusted
            for earlier, later in zip(blocks, blocks[1:]):
                assert float(adj[earlier].min()) >= float(adj[later].max()) - 1e-12

    def test_diagnostics_type(self):
        out = run_mechanism([1.0], full_ranking([0]), MechanismConfig())
        assert isinstance(out.diagnostics, Diagnostics)


class TestReportValidation:
    def test_block_report_with_ranking_variant(self):
        with pytest.raises(VariantMismatchError):
            run_mechanism([1.0, 2.0], block_ranking([[0], [1]]), MechanismConfig())

    def test_ranking_report_with_block_variant(self):
        with pytest.raises(VariantMismatchError):
            run_mechanism(
                [1.0, 2.0], full_ranking([0, 1]), MechanismConfig(variant="block")
            )

    def test_ranking_must_be_a_permutation(self):
        with pytest.raises(InvalidRankingError):
            run_mechanism([1.0, 2.0], full_ranking([0, 0]), MechanismConfig())
        with pytest.raises(InvalidRankingError):
            run_mechanism([1.0, 2.0], full_ranking([0, 1, 2]), MechanismConfig())

    def test_blocks_must_partition(self):
        with pytest.raises(InvalidPartitionError):
            run_mechanism(
                [1.0, 2.0, 3.0],
                block_ranking([[0], [1]]),
                MechanismConfig(variant="block"),
            )
        with pytest.raises(InvalidPartitionError):
            run_mechanism(
                [1.0, 2.0],
                block_ranking([[0, 1], [1]]),
                MechanismConfig(variant="block"),
            )


class TestTruthfulReport:
    def test_ranking_sorts_descending(self):
        report = truthful_report([1.0, 9.0, 4.0], MechanismConfig())
        assert report.ranking == (1, 2, 0)

    def test_stable_on_ties(self):
        report = truthful_report([1.0, 1.0, 2.0], MechanismConfig())
        assert report.ranking == (2, 0, 1)

    def test_block_shape(self):
        report = truthful_report(
            [1.0, 9.0, 4.0, 0.0],
            MechanismConfig(variant="block"),
            block_sizes=(2, 2),
        )
        assert report.blocks == ((1, 2), (0, 3))

    def test_block_requires_sizes(self):
        with pytest.raises(ParameterError):
            truthful_report([1.0, 2.0], MechanismConfig(variant="block"))
        with pytest.raises(ParameterError):
            truthful_report(
                [1.0, 2.0], MechanismConfig(variant="block"), block_sizes=(3,)
            )
        with pytest.raises(ParameterError):
            truthful_report(
                [1.0, 2.0], MechanismConfig(variant="block"), block_sizes=(2, 0)
            )

    def test_truthful_report_is_a_fixed_point_when_scores_are_feasible(self):
        true_scores = np.array([5.0, 3.0, 1.0])
        report = truthful_report(true_scores, MechanismConfig())
        out = run_mechanism(true_scores, report, MechanismConfig())
        np.testing.assert_array_equal(out.adjusted, true_scores)
