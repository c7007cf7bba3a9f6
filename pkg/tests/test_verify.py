import numpy as np
import pytest
from scipy.stats import norm

from annealcert.convergence import minorization_constant, tv_bound_after
from annealcert.domain import BoundedDomain, DeterministicCriterion
from annealcert.errors import GridTooLargeError, SamplingBudgetError
from annealcert.guarantees import GuaranteeSpec
from annealcert.registry import get_function
from annealcert.rng import chain_rng
from annealcert.sampler import Proposal
from annealcert.target import TargetSpec, normalized_density
from annealcert.verify import (
    ExceedanceOracle,
    SuiteSettings,
    Verdict,
    discretize,
    doeblin_constant,
    empirical_sigma_check,
    exact_tv_discretized,
    grid_tv,
    is_approx_optimizer,
    mueller_two_cell_stationary,
    rejection_sample_target,
    run_suite,
    stationary_distribution,
    transition_matrix,
    two_sample_tv,
)

UNIT = BoundedDomain([0.0], [1.0])
IDENTITY = DeterministicCriterion(lambda x: x[:, 0], vectorized=True, name="identity")
SMALL = SuiteSettings(
    samples=2000, mc=2000, chain_steps=20_000, tv_steps=2000, cells=100, battery=2, bijection_trials=500, min_j_trials=100
)


class TestRejectionSampler:
    def test_constant_criterion_gives_uniform(self, rng):
        crit = DeterministicCriterion(lambda x: np.full(len(x), 0.4), vectorized=True)
        draws = rejection_sample_target(TargetSpec(J=1, delta=0.5), UNIT, crit, 20_000, rng)
        assert draws.complete
        reference = UNIT.sample_uniform(rng, 20_000)
        assert two_sample_tv(draws.points, reference, 10, [0.0], [1.0]) <= 0.05

    def test_matches_bumps1d_law(self, rng, bumps1d):
        target = TargetSpec(J=6, delta=0.5)
        draws = rejection_sample_target(target, bumps1d.domain, bumps1d.criterion, 100_000, rng)
        grid = discretize(bumps1d.criterion, 0.0, 1.0, 10_000)
        assert grid_tv(draws.points, grid, normalized_density(target, grid.u), 50) <= 0.02

    def test_budget_exhaustion_is_reported(self, rng, bumps1d):
        draws = rejection_sample_target(
            TargetSpec(J=200, delta=0.01), bumps1d.domain, bumps1d.criterion, 1000, rng, max_proposals=1000, batch=500
        )
        assert not draws.complete
        assert draws.proposals == 1000


class TestOracle:
    def test_constant_criterion_is_always_optimal(self, rng):
        crit = DeterministicCriterion(lambda x: np.full(len(x), 0.3), vectorized=True)
        assert is_approx_optimizer([0.5], 0.0, 0.01, crit, UNIT, 10_000, rng) is Verdict.YES

    def test_identity_examples(self, rng):
        assert is_approx_optimizer([0.5], 0.0, 0.4, IDENTITY, UNIT, 10_000, rng) is Verdict.NO
        assert is_approx_optimizer([0.5], 0.2, 0.35, IDENTITY, UNIT, 10_000, rng) is Verdict.YES

    def test_needs_enough_reference_points(self, rng):
        with pytest.raises(ValueError):
            is_approx_optimizer([0.5], 0.0, 0.4, IDENTITY, UNIT, 999, rng)

    def test_fraction_is_vectorized(self, rng):
        oracle = ExceedanceOracle.build(IDENTITY, UNIT, 10_000, rng)
        f = oracle.fraction(np.array([0.0, 0.5, 1.0]), 0.0)
        assert f[0] == pytest.approx(1.0, abs=1e-3)
        assert f[1] == pytest.approx(0.5, abs=0.03)
        assert f[2] == 0.0


class TestSigmaCheck:
    def test_degenerate_spec_always_passes(self, rng, bumps1d):
        check = empirical_sigma_check(
            GuaranteeSpec(epsilon=1.0, alpha=1.0), TargetSpec(J=1, delta=1.0), bumps1d.criterion, bumps1d.domain,
            2000, 2000, rng,
        )
        assert check.fraction == 1.0
        assert check.passed

    @pytest.mark.parametrize("name", ["bumps1d", "step1d"])
    def test_worked_configuration(self, name, rng):
        entry = get_function(name)
        check = empirical_sigma_check(
            GuaranteeSpec(epsilon=0.1, alpha=0.1), TargetSpec(J=30, delta=0.5), entry.criterion, entry.domain,
            2000, 2000, rng, u_max=entry.max_value,
        )
        assert check.passed

    def test_sampling_budget(self, rng, bumps1d):
        with pytest.raises(SamplingBudgetError):
            empirical_sigma_check(
                GuaranteeSpec(epsilon=0.1, alpha=0.1), TargetSpec(J=500, delta=0.01), bumps1d.criterion,
                bumps1d.domain, 1000, 1000, rng, max_proposals=10_000,
            )


class TestDiscretizedChains:
    def test_stationary_vector_matches_density(self, bumps1d):
        grid = discretize(bumps1d.criterion, 0.0, 1.0, 200)
        target = TargetSpec(J=6, delta=0.5)
        exact = normalized_density(target, grid.u)
        for proposal in (
            Proposal.uniform(UNIT),
            Proposal.walk(UNIT, 0.05),
            Proposal.mixture(UNIT, 0.5, 0.05),
        ):
            pi = stationary_distribution(transition_matrix(target, grid, proposal))
            assert np.max(np.abs(pi - exact)) <= 1e-10

    def test_rows_sum_to_one(self, bumps1d):
        grid = discretize(bumps1d.criterion, 0.0, 1.0, 50)
        P = transition_matrix(TargetSpec(J=3, delta=0.5), grid, Proposal.mixture(UNIT, 0.3, 0.1))
        assert np.allclose(P.sum(axis=1), 1.0, atol=1e-14)
        assert P.min() >= 0.0

    def test_two_cell_closed_form(self):
        crit = DeterministicCriterion(lambda x: np.full(len(x), 0.5), vectorized=True)
        grid = discretize(crit, 0.0, 1.0, 2)
        proposal = Proposal.walk(UNIT, 0.3)
        P = transition_matrix(TargetSpec(J=2, delta=0.5), grid, proposal)
        q = norm.cdf(0.75 / 0.3) - norm.cdf(0.25 / 0.3)
        assert P[0, 1] == pytest.approx(q, rel=1e-12)
        curve = exact_tv_discretized(TargetSpec(J=2, delta=0.5), grid, proposal, 30)
        for k, tv in curve:
            assert tv == pytest.approx(0.5 * abs(1.0 - 2.0 * q) ** k, abs=1e-12)

    def test_starting_at_stationarity(self, bumps1d):
        grid = discretize(bumps1d.criterion, 0.0, 1.0, 100)
        target = TargetSpec(J=4, delta=0.5)
        pi = stationary_distribution(transition_matrix(target, grid, Proposal.uniform(UNIT)))
        curve = exact_tv_discretized(target, grid, Proposal.uniform(UNIT), 5, initial=pi)
        assert all(tv <= 1e-12 for _, tv in curve)

    def test_tv_dominated_by_bound(self, bumps1d):
        grid = discretize(bumps1d.criterion, 0.0, 1.0, 200)
        target = TargetSpec(J=6, delta=0.5)
        proposal = Proposal.uniform(UNIT)
        bound = minorization_constant(target, proposal.uniform_weight)
        curve = exact_tv_discretized(target, grid, proposal, 2000, every=10)
        tvs = [tv for _, tv in curve]
        assert all(tv <= tv_bound_after(bound, k) + 1e-12 for k, tv in curve)
        assert all(b <= a + 1e-12 for a, b in zip(tvs, tvs[1:]))

    def test_doeblin_at_least_beta(self, bumps1d):
        grid = discretize(bumps1d.criterion, 0.0, 1.0, 200)
        target = TargetSpec(J=6, delta=0.5)
        P = transition_matrix(target, grid, Proposal.uniform(UNIT))
        assert doeblin_constant(P, stationary_distribution(P)) >= minorization_constant(target, 1.0).beta

    def test_grid_limit(self, bumps1d):
        grid = discretize(bumps1d.criterion, 0.0, 1.0, 2001)
        with pytest.raises(GridTooLargeError):
            transition_matrix(TargetSpec(J=2, delta=0.5), grid, Proposal.uniform(UNIT))

    def test_mueller_two_cell_marginal(self):
        marginal = mueller_two_cell_stationary((0.2, 0.7), 0.5)
        assert marginal == pytest.approx(np.array([0.7, 1.2]) / 1.9, abs=1e-12)


class TestSuites:
    def test_bijection_suite(self):
        report = run_suite("bijection", SMALL)
        assert report.passed
        assert {c.name for c in report.checks} == {"bijection-roundtrip", "sigma-rho-form", "min-J-exact"}

    def test_tv_domination_suite(self):
        report = run_suite("tv-domination", SMALL)
        assert report.passed, [c.to_json_dict() for c in report.checks if not c.passed]

    def test_stationarity_suite(self):
        report = run_suite("stationarity", SuiteSettings())
        assert report.passed, [c.to_json_dict() for c in report.checks if not c.passed]
        names = {c.name for c in report.checks}
        assert {"mcmc-vs-exact-bumps1d", "mueller-two-cell"} <= names

    def test_report_json(self):
        d = run_suite("bijection", SMALL).to_json_dict()
        assert d["pass"] is True
        assert all("pass" in c for c in d["checks"])

    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            run_suite("everything", SMALL)

    @pytest.mark.slow
    def test_full_battery(self):
        report = run_suite("all", SuiteSettings())
        assert report.passed, [c.to_json_dict() for c in report.checks if not c.passed]
