"""Exception types shared across the package.

Two families: subclasses of :class:`ValidationError` mean the inputs were bad
and were rejected at construction or call time; subclasses of
:class:`NumericalError` mean a computation ran but could not meet its accuracy
contract.
"""


class RetropertError(Exception):
    """Base class for every error this package raises on purpose."""


class ValidationError(RetropertError, ValueError):
    """Invalid input caught during construction or validation."""


class DimensionMismatch(ValidationError):
    """Vector or matrix dimensions are inconsistent with each other."""


class NonHermitianPerturbation(ValidationError):
    """A matrix that must be Hermitian is not.

    ``max_deviation`` holds the largest entry of ``|M - M^dagger|`` when known.
    """

    def __init__(self, message, max_deviation=None):
        super().__init__(message)
        self.max_deviation = max_deviation


class NonFiniteEntry(ValidationError):
    """An input contains NaN or infinity."""


class IndexOutOfRange(ValidationError, IndexError):
    """A state index does not exist in the system."""


class WrongPerturbationKind(ValidationError):
    """The operation requires a different perturbation kind (e.g. a closed
    form that only exists for a constant perturbation)."""


class InvalidBand(ValidationError):
    """A quasi-continuum band specification violates its invariants."""


class ResonanceOutsideBand(ValidationError):
    """The resonant final energy for the requested branch falls outside the
    band, so a density of states there is meaningless."""


class SchemaError(ValidationError):
    """A scenario file does not match the documented schema."""


class OrthogonalSelection(RetropertError):
    """Pre- and post-selection are mutually unreachable: every intermediate
    outcome has zero overlap, so conditional probabilities are undefined."""


class NumericalError(RetropertError):
    """A numerical routine could not meet its contract."""


class NonFiniteIntegrand(NumericalError):
    """The integrand returned NaN or infinity inside the window."""


class ToleranceNotReached(NumericalError):
    """Quadrature stopped at its subdivision budget above tolerance.

    The integrators report this condition as a ``converged=False`` flag and
    return their best estimate; this exception exists for callers (the CLI's
    strict mode) that want to escalate the flag into a hard failure.
    """


class UnitarityLost(NumericalError):
    """State norm drifted beyond tolerance during propagation, usually a sign
    the step size is too coarse for the Hamiltonian's frequencies."""
