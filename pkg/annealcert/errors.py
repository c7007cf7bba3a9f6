"""Exception hierarchy for annealcert."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .guarantees import Certificate


class AnnealError(Exception):
    """Base class for every error raised by annealcert."""


class CriterionRangeError(AnnealError):
    """A criterion value (or an expected-value draw) fell outside [0, 1]."""

    def __init__(self, value: float, where: str = "criterion"):
        self.value = value
        super().__init__(
            f"{where} returned {value!r}, outside [0, 1]; rescale it with "
            "scale_criterion() using known bounds (values are never clamped)"
        )


class DomainError(AnnealError, ValueError):
    """Invalid box or a point outside its box."""


class GuaranteeError(AnnealError, ValueError):
    """Invalid (epsilon, alpha, sigma, J, delta) combination."""


class UnreachableConfidenceError(GuaranteeError):
    """The requested confidence cannot be reached for any J."""


class InfeasibleCertificateError(AnnealError):
    """The composed step count exceeds the configured budget.

    ``certificate`` carries the full statement with the exact k.
    """

    def __init__(self, certificate: "Certificate", budget: int):
        self.certificate = certificate
        self.budget = budget
        self.k = certificate.k
        super().__init__(f"infeasible within budget: k = {certificate.k} final-stage steps required, budget is {budget}")


class GridTooLargeError(AnnealError, ValueError):
    """Exact discretized analysis requested on too many cells."""


class ConfigError(AnnealError, ValueError):
    """CLI or config-file validation failure."""


class SamplingBudgetError(AnnealError):
    """An exact-sampling oracle ran out of proposals before collecting enough draws."""

    def __init__(self, collected: int, wanted: int, proposals: int):
        self.collected = collected
        self.wanted = wanted
        self.proposals = proposals
        super().__init__(f"rejection sampler stopped at {collected}/{wanted} draws after {proposals} proposals")
