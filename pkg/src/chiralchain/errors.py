"""Exception and warning types raised by the solvers."""


class ChiralChainError(Exception):
    """Base class for all solver errors."""


class DegenerateAlpha(ChiralChainError, ValueError):
    """|alpha| is below tolerance; transmission and recursion divide by it."""


class DegenerateKappa(ChiralChainError, ValueError):
    """The two roots of kappa**2 - eta*kappa + alpha coincide."""


class PoleAtNu(ChiralChainError, ValueError):
    """A rational function of nu is evaluated at (or too close to) a pole."""


class TieBreak(ChiralChainError, ValueError):
    """The sign selector of the orthogonal plane-wave families is undefined."""


class DivergentState(ChiralChainError, ValueError):
    """Requested eigenstate grows without bound as r -> -inf."""


class NoRootFound(ChiralChainError, RuntimeError):
    """Bound-state search failed; ``min_residual`` holds the best residual seen."""

    def __init__(self, message, min_residual=float("nan")):
        super().__init__(message)
        self.min_residual = min_residual


class QuadratureFailure(ChiralChainError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, error_estimate=float("nan")):
        super().__init__(message)
        self.error_estimate = error_estimate


class TailTooLarge(ChiralChainError, RuntimeError):
    """Estimated error of the nu > nu_max tail exceeds tolerance."""


class UnsupportedRegime(ChiralChainError, ValueError):
    """Parameters outside the domain handled by the chosen method."""


class SingularBoundarySystem(ChiralChainError, ArithmeticError):
    """The 2x2 boundary closure of the cascade step is singular."""


class StabilityError(ChiralChainError, ArithmeticError):
    """A built-in self-check of the recursion failed."""


class ZeroTransmission(ChiralChainError, ArithmeticError):
    """|T_N|**2 underflows, so g2 is undefined."""


class MultipleRoots(UserWarning):
    """More than one distinct bound state was located."""
