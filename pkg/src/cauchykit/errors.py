"""Exception types shared across the toolkit."""


class CauchyKitError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatchError(CauchyKitError):
    """Shapes of operands are incompatible."""


class RankDeficiencyError(CauchyKitError):
    """A frame or form is rank deficient beyond the rank tolerance."""


class SignatureError(CauchyKitError):
    """i*Omega does not split evenly; Lagrangian machinery is unavailable."""


class UndersampledPathError(CauchyKitError):
    """Path samples are too coarse and no generator is available to refine."""


class DegenerateCrossingError(CauchyKitError):
    """A crossing is degenerate and no tie-breaking convention applies."""


class RefinementBudgetError(CauchyKitError):
    """Adaptive refinement exhausted its budget without resolving the data."""


class SpectralMarginError(CauchyKitError):
    """Spectrum touches the imaginary axis within the hard-zero tolerance."""


class QuadratureError(CauchyKitError):
    """Contour quadrature failed to reach its certified tolerance."""


class StepControlError(CauchyKitError):
    """ODE step-doubling control could not reach the requested tolerance."""


class CouplingPositivityError(CauchyKitError):
    """Endpoint coupling violates the positivity gate."""


class DoubleDegenerateError(CauchyKitError):
    """The coupled double has nontrivial kernel; bookkeeping is inconsistent."""


class WindowError(CauchyKitError):
    """Spectral window is too small for reliable flow bookkeeping."""


class ClassificationError(CauchyKitError):
    """An eigenvalue sits inside the ambiguous classification band."""


class IdenticallyZeroError(CauchyKitError):
    """An eigenvalue branch vanishes identically on a parameter subinterval."""


class ScenarioError(CauchyKitError):
    """A scenario file is malformed or violates the schema."""
