"""Exception types raised by specband.

All library errors derive from SpecbandError so callers (and the CLI, which
maps them to exit code 3) can catch one base class.
"""


class SpecbandError(Exception):
    """Base class for all specband errors."""


class EmptyCoefficients(SpecbandError):
    """Operator constructed from zero-length coefficient lists."""


class NonPositiveHopping(SpecbandError):
    """An off-diagonal coefficient a_n <= 0 was supplied."""


class LengthMismatch(SpecbandError):
    """Coefficient lists a and b have different lengths."""


class OutsideBandInterior(SpecbandError):
    """A closed form valid only for |Delta(x)| < 2 was evaluated elsewhere."""


class RootCountMismatch(SpecbandError):
    """Band-edge or critical-point root finding found the wrong count."""


class EigenvalueInBand(SpecbandError):
    """A point-spectrum candidate landed inside a band beyond tolerance."""


class OutsideSpectrum(SpecbandError):
    """A band-local quantity was requested at a point outside every band."""


class DerivativeSingularity(SpecbandError):
    """A phase derivative was requested where no finite limit is implemented."""


class DivergentNormSum(SpecbandError):
    """The squared-polynomial norm sum did not converge at the given point."""


class QuadratureBudgetExceeded(SpecbandError):
    """The oscillatory quadrature would need more nodes than the budget."""


class TruncationTooLarge(SpecbandError):
    """The oracle propagator would need a truncation beyond its cap."""


class RangeTooSmall(SpecbandError):
    """Stored amplitudes do not cover the wavefront at the requested time."""


class InsufficientPoints(SpecbandError):
    """A decay fit was attempted with fewer than the minimum grid points."""


class NonPositiveNorm(SpecbandError):
    """A decay fit was attempted on a norm sequence with a nonpositive entry."""
