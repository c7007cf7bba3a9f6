import math

import numpy as np
import pytest
from pydantic import ValidationError

from annealcert.errors import GuaranteeError, UnreachableConfidenceError
from annealcert.guarantees import (
    Certificate,
    DELTA_BRACKET,
    GuaranteeSpec,
    ProofParams,
    compose_confidence,
    min_delta_J,
    min_J,
    optimal_delta,
    proof_params_from_spec,
    random_search_samples,
    sigma,
    sigma_from_proof_params,
    spec_from_proof_params,
)
from annealcert.target import TargetSpec

WORKED = GuaranteeSpec(epsilon=0.1, alpha=0.1)


def _random_specs(seed: int, n: int):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield GuaranteeSpec(
            epsilon=rng.uniform(0.01, 1.0), alpha=rng.uniform(0.01, 1.0), sigma_target=rng.uniform(0.5, 0.999)
        ), float(np.exp(rng.uniform(math.log(1e-2), math.log(10.0))))


class TestSigma:
    def test_degenerate_is_one(self):
        assert sigma(GuaranteeSpec(epsilon=1.0, alpha=1.0), TargetSpec(J=1, delta=1.0)) == 1.0

    def test_zero_epsilon_value(self):
        s = sigma(GuaranteeSpec(epsilon=0.0, alpha=0.5), TargetSpec(J=1, delta=1.0))
        assert s == pytest.approx(1.0 / 7.0, rel=1e-12)

    def test_worked_example(self):
        assert sigma(WORKED, TargetSpec(J=100, delta=0.5)) == pytest.approx(0.8982, abs=5e-4)

    def test_zero_epsilon_does_not_depend_on_J(self):
        spec = GuaranteeSpec(epsilon=0.0, alpha=0.3)
        values = {sigma(spec, TargetSpec(J=J, delta=0.7)) for J in (1, 10, 1000)}
        assert len(values) == 1

    def test_increases_with_J(self):
        for spec, delta in _random_specs(5, 50):
            if spec.epsilon < 0.05:
                continue
            prev = sigma(spec, TargetSpec(J=1, delta=delta))
            for J in range(2, 51):
                cur = sigma(spec, TargetSpec(J=J, delta=delta))
                if prev < 1.0 - 1e-12:
                    assert cur > prev
                else:
                    assert cur >= prev
                prev = cur

    def test_increases_with_epsilon_and_alpha(self):
        t = TargetSpec(J=20, delta=0.5)
        grid = [0.05, 0.1, 0.2, 0.4, 0.8]
        by_eps = [sigma(GuaranteeSpec(epsilon=e, alpha=0.2), t) for e in grid]
        by_alpha = [sigma(GuaranteeSpec(epsilon=0.2, alpha=a), t) for a in grid]
        assert all(b > a for a, b in zip(by_eps, by_eps[1:]))
        assert all(b > a for a, b in zip(by_alpha, by_alpha[1:]))

    def test_tends_to_one(self):
        assert sigma(WORKED, TargetSpec(J=1e6, delta=0.5)) > 1.0 - 1e-9

    @pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
    def test_bad_alpha(self, alpha):
        with pytest.raises(ValidationError, match=r"alpha"):
            GuaranteeSpec(epsilon=0.1, alpha=alpha)

    def test_zero_alpha_message(self):
        with pytest.raises(ValidationError, match=r"\(0, 1\]"):
            GuaranteeSpec(epsilon=0.1, alpha=0.0)

    @pytest.mark.parametrize("eps", [-0.1, 1.1, float("nan")])
    def test_bad_epsilon(self, eps):
        with pytest.raises(ValidationError):
            GuaranteeSpec(epsilon=eps, alpha=0.1)


class TestMinJ:
    def test_worked_example(self):
        assert min_J(GuaranteeSpec(epsilon=0.1, alpha=0.1, sigma_target=0.95), 0.5) == 112

    def test_degenerate(self):
        assert min_J(GuaranteeSpec(epsilon=1.0, alpha=1.0, sigma_target=0.99), 0.5) == 1

    def test_target_below_sigma_at_one(self):
        assert min_J(GuaranteeSpec(epsilon=0.1, alpha=0.1, sigma_target=0.01), 0.5) == 1

    def test_zero_epsilon_unreachable(self):
        with pytest.raises(UnreachableConfidenceError, match="epsilon = 0"):
            min_J(GuaranteeSpec(epsilon=0.0, alpha=0.5, sigma_target=0.95), 1.0)

    @pytest.mark.parametrize("delta", [0.0, -1.0, float("inf")])
    def test_bad_delta(self, delta):
        with pytest.raises(GuaranteeError):
            min_J(WORKED, delta)

    def test_exact_on_random_specs(self):
        for spec, delta in _random_specs(17, 1000):
            J = min_J(spec, delta)
            assert sigma(spec, TargetSpec(J=J, delta=delta)) >= spec.sigma_target
            if J > 1:
                assert sigma(spec, TargetSpec(J=J - 1, delta=delta)) < spec.sigma_target


class TestDeltaSearch:
    def test_optimal_delta_beats_fixed_choices(self):
        for spec, _ in _random_specs(23, 50):
            for J in (1.0, 10.0, 75.0):
                _, best = optimal_delta(spec, J)
                for d in (0.01, 0.5, 2.0, 50.0):
                    assert best >= sigma(spec, TargetSpec(J=J, delta=d)) * (1.0 - 1e-12)

    def test_optimum_at_upper_bracket_end(self):
        # σ is still rising at the largest δ when J = 1 reaches the target
        spec = GuaranteeSpec(epsilon=0.87496, alpha=0.75215, sigma_target=0.5)
        delta, value = optimal_delta(spec, 1.0)
        assert DELTA_BRACKET[0] <= delta <= DELTA_BRACKET[1]
        for end in DELTA_BRACKET:
            assert value >= sigma(spec, TargetSpec(J=1, delta=end))
        t = min_delta_J(spec)
        assert t.J == 1
        assert t.delta <= DELTA_BRACKET[1]
        assert sigma(spec, t) >= spec.sigma_target

    def test_optimal_delta_at_J_one_never_loses_to_an_end(self):
        for spec, _ in _random_specs(57, 150):
            delta, value = optimal_delta(spec, 1.0)
            assert DELTA_BRACKET[0] <= delta <= DELTA_BRACKET[1]
            assert value >= max(sigma(spec, TargetSpec(J=1, delta=end)) for end in DELTA_BRACKET)

    def test_optimal_delta_worked(self):
        delta, value = optimal_delta(WORKED, 100)
        assert value >= sigma(WORKED, TargetSpec(J=100, delta=0.5))
        assert 1e-6 <= delta <= 1e3

    def test_optimal_delta_degenerate(self):
        assert optimal_delta(GuaranteeSpec(epsilon=1.0, alpha=1.0), 3) == (1.0, 1.0)

    def test_optimal_delta_needs_J(self):
        with pytest.raises(GuaranteeError):
            optimal_delta(WORKED, 0.5)

    def test_min_delta_J_worked(self):
        t = min_delta_J(WORKED)
        assert t.J <= 112
        assert t.is_integer
        assert sigma(WORKED, t) >= WORKED.sigma_target

    def test_min_delta_J_dominates_fixed_delta(self):
        for spec, _ in _random_specs(31, 40):
            t = min_delta_J(spec)
            assert sigma(spec, t) >= spec.sigma_target
            assert t.J <= min_J(spec, 0.5)

    def test_min_delta_J_degenerate(self):
        t = min_delta_J(GuaranteeSpec(epsilon=1.0, alpha=1.0, sigma_target=0.99))
        assert t.J == 1

    def test_zero_epsilon_reachable_through_delta(self):
        t = min_delta_J(GuaranteeSpec(epsilon=0.0, alpha=1.0, sigma_target=0.95))
        assert t.J == 1
        assert sigma(GuaranteeSpec(epsilon=0.0, alpha=1.0), t) >= 0.95

    def test_zero_epsilon_unreachable(self):
        with pytest.raises(UnreachableConfidenceError):
            min_delta_J(GuaranteeSpec(epsilon=0.0, alpha=0.5, sigma_target=0.95))


class TestProofParams:
    def test_worked_values(self):
        p = proof_params_from_spec(WORKED, 0.5)
        assert p.rho == pytest.approx(0.9375, rel=1e-15)
        assert p.alpha_bar == pytest.approx(0.04, rel=1e-15)

    def test_zero_epsilon_has_unit_rho(self):
        p = proof_params_from_spec(GuaranteeSpec(epsilon=0.0, alpha=0.5), 1.0)
        assert p.rho == 1.0
        assert p.rho_complement == 0.0

    def test_full_epsilon(self):
        assert proof_params_from_spec(GuaranteeSpec(epsilon=1.0, alpha=0.5), 0.5).rho == pytest.approx(0.6)

    def test_inverse_examples(self):
        assert spec_from_proof_params(ProofParams(rho=1.0, alpha_bar=0.2), 0.5)[0] == 0.0
        eps, alpha = spec_from_proof_params(ProofParams(rho=0.9375, alpha_bar=0.04), 0.5)
        assert eps == pytest.approx(0.1, rel=1e-12)
        assert alpha == pytest.approx(0.1, rel=1e-12)
        eps, alpha = spec_from_proof_params(ProofParams(rho=0.6, alpha_bar=0.1), 0.5)
        assert eps == pytest.approx(1.0, rel=1e-12)
        assert alpha == pytest.approx(0.1, rel=1e-12)

    def test_inverse_rejects_out_of_range(self):
        with pytest.raises(GuaranteeError):
            spec_from_proof_params(ProofParams(rho=0.5, alpha_bar=0.1), 0.5)
        with pytest.raises(GuaranteeError):
            spec_from_proof_params(ProofParams(rho=0.9375, alpha_bar=0.9), 0.5)

    def test_round_trip_and_rho_form(self):
        rng = np.random.default_rng(41)
        for _ in range(2000):
            spec = GuaranteeSpec(epsilon=rng.uniform(0.0, 1.0), alpha=rng.uniform(1e-3, 1.0))
            delta = float(np.exp(rng.uniform(math.log(1e-3), math.log(1e2))))
            J = float(rng.uniform(1.0, 1000.0))
            p = proof_params_from_spec(spec, delta)
            eps, alpha = spec_from_proof_params(p, delta)
            assert eps == pytest.approx(spec.epsilon, rel=1e-12, abs=1e-300)
            assert alpha == pytest.approx(spec.alpha, rel=1e-12)
            assert sigma_from_proof_params(p, J, delta) == pytest.approx(
                sigma(spec, TargetSpec(J=J, delta=delta)), rel=1e-12
            )


class TestComposition:
    def test_examples(self):
        assert compose_confidence(0.99, 0.0) == 0.99
        assert compose_confidence(0.9, 0.05) == pytest.approx(0.85)
        assert compose_confidence(0.5, 0.7) == 0.0

    @pytest.mark.parametrize("s, tv", [(0.0, 0.1), (1.2, 0.1), (0.9, -0.1), (0.9, 1.5)])
    def test_bad_ranges(self, s, tv):
        with pytest.raises(GuaranteeError):
            compose_confidence(s, tv)

    def test_certificate_checks_composition(self):
        t = TargetSpec(J=100, delta=0.5)
        s = sigma(WORKED, t)
        Certificate(spec=WORKED, target=t, sigma=s, k=10, tv_bound=0.1, confidence=compose_confidence(s, 0.1))
        with pytest.raises(ValidationError, match="confidence"):
            Certificate(spec=WORKED, target=t, sigma=s, k=10, tv_bound=0.1, confidence=s)

    def test_json_form(self):
        t = TargetSpec(J=100, delta=0.5)
        s = sigma(WORKED, t)
        cert = Certificate(spec=WORKED, target=t, sigma=s, k=10, tv_bound=0.1, confidence=compose_confidence(s, 0.1))
        d = cert.to_json_dict()
        assert d["J"] == 100 and isinstance(d["J"], int)
        assert d["sigma"] == float(f"{s:.12g}")
        assert d["reportable"] is True
        assert d["feasible"] is True


@pytest.mark.parametrize("alpha, sigma_target, n", [(0.1, 0.95, 29), (1.0, 0.95, 1), (0.5, 0.5, 1)])
def test_random_search_samples(alpha, sigma_target, n):
    assert random_search_samples(alpha, sigma_target) == n
