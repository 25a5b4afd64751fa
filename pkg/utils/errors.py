class ConfigError(ValueError):
    """Raised when a problem, extension or run configuration is not admissible."""

    def __init__(self, message="Configuration is not admissible. Revisit the arguments."):
        self.message = message
        super().__init__(self.message)


class NumericalError(ArithmeticError):
    """Raised when a numerical construction fails to reach its tolerance."""

    def __init__(self, message="Numerical construction failed."):
        self.message = message
        super().__init__(self.message)


class ValidationFailure(AssertionError):
    """Raised when a validation suite reports at least one failed check."""

    def __init__(self, message="Validation suite reported failed checks."):
        self.message = message
        super().__init__(self.message)


class NonPositiveCoefficient(ConfigError):
    def __init__(self, message="p and r must be positive at every interior probe point."):
        super().__init__(message)


class NonIntegrable(ConfigError):
    def __init__(self, message="1/p, |q| or r is not integrable on a compact probe interval."):
        super().__init__(message)


class NotUnimodular(ConfigError):
    def __init__(self, message="Coupling matrix R must satisfy det(R) = 1."):
        super().__init__(message)


class OutOfRange(ConfigError):
    def __init__(self, message="Evaluation point is not spanned by the solution."):
        super().__init__(message)


class EqualSpectralParams(ConfigError):
    def __init__(
        self,
        message="Green-identity inner product needs z1 != z2; use quadrature_inner_product.",
    ):
        super().__init__(message)


class FriedrichsReference(ConfigError):
    def __init__(
        self,
        message="Separated(0, 0) is the Friedrichs reference extension and has no Krein coupling.",
    ):
        super().__init__(message)


class InadmissibleExtension(ConfigError):
    def __init__(
        self, message="Extension is inconsistent with the endpoint classification."
    ):
        super().__init__(message)


class DomainTooLarge(ConfigError):
    def __init__(self, message="Bessel series kernel is restricted to |w| <= 30."):
        super().__init__(message)


class OnCutZ(ConfigError):
    def __init__(self, message="z lies on the branch cut [0, inf)."):
        super().__init__(message)


class BadRunConfig(ConfigError):
    def __init__(self, message="Run configuration is invalid."):
        super().__init__(message)


class StepUnderflow(NumericalError):
    def __init__(
        self,
        message="Step size underflow; start from the endpoint with an asymptotic startup.",
    ):
        super().__init__(message)


class NonFiniteValue(NumericalError):
    def __init__(self, message="Solution overflowed or became non-finite."):
        super().__init__(message)


class NoConvergence(NumericalError):
    def __init__(self, message="Quadrature tail refinement stalled."):
        super().__init__(message)


class Inconclusive(NumericalError):
    def __init__(
        self,
        message="Endpoint tail diagnostics are inconclusive; deepen the probe tails.",
    ):
        super().__init__(message)


class ZeroEncountered(NumericalError):
    def __init__(
        self,
        message="Trial solution vanishes near the endpoint; lower lambda0.",
    ):
        super().__init__(message)


class NonConvergentLimit(NumericalError):
    def __init__(self, message="Wronskian limit extrapolants disagree."):
        super().__init__(message)


class NoDecaySeparation(NumericalError):
    def __init__(
        self,
        message="Dominant and recessive growth cannot be separated within the anchor cap.",
    ):
        super().__init__(message)


class AnchorNotConverged(NumericalError):
    def __init__(self, message="Weyl function drifts between doubled anchors."):
        super().__init__(message)


class SingularBoundaryMap(NumericalError):
    def __init__(
        self, message="Boundary-data matrix of the fundamental system is singular."
    ):
        super().__init__(message)


class NonPositiveNorm(NumericalError):
    def __init__(
        self, message="Deficiency norm from boundary data is not positive."
    ):
        super().__init__(message)


class DegenerateDenominator(NumericalError):
    def __init__(self, message="|cot(alpha) + m0(z)| is below 1e-12."):
        super().__init__(message)


class SingularK(NumericalError):
    def __init__(self, message="Krein matrix failed the condition guard."):
        super().__init__(message)


class PoleOrder(NumericalError):
    def __init__(
        self, message="Bessel order is too close to an integer for the connection formula."
    ):
        super().__init__(message)
