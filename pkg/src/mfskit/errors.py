"""Exception and warning types shared across the toolkit."""


class MfskitError(Exception):
    """Base class for all toolkit errors."""


class SingularEvaluation(MfskitError):
    """A kernel was evaluated inside its singularity guard."""


class UnsupportedOperator(MfskitError):
    """Boundary-operator index out of range for the kernel's Dirichlet system."""


class DegenerateDomain(MfskitError):
    """Boundary parametrization is self-intersecting or otherwise invalid."""


class InvalidDilation(MfskitError):
    """Source pseudo-boundary dilation factor must exceed 1."""


class NotAHilbertNorm(MfskitError):
    """Gram/dual machinery requested for a norm with p != 2."""


class SingularGram(MfskitError):
    """Regularized Gram solve failed."""


class NonConvergence(MfskitError):
    """Iterative solve hit max_iter without meeting its tolerance.

    Carries the last iterate so callers can inspect it.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class SingularW(MfskitError):
    """The kN x kN interpolation matrix could not be solved at working precision."""


class InsufficientCandidates(MfskitError):
    """Fewer source candidates than requested selection size."""


class NearBoundary(MfskitError):
    """Evaluation point too close to the boundary for the quadrature guard."""


class ConditioningWarning(UserWarning):
    """Selected source set leaves the interpolation matrix badly conditioned."""
