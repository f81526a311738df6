"""Exception types shared across the package."""


class PdsError(Exception):
    """Base class for all package-specific errors."""


class EmptyShapeError(PdsError):
    """An operation needed a nonempty vertex set."""


class NotConnectedError(PdsError):
    """An operation needed a connected shape."""


class NotAFourCycleError(PdsError):
    """The shape is not a unit 4-cycle (axis-plane unit square)."""


class InfiniteQuotientError(PdsError):
    """The generator matrix is singular, so the quotient group is infinite."""


class CoverCriterionError(PdsError):
    """The bijectivity test for a lattice-like construction failed."""


class OverlapError(PdsError):
    """A base shape meets one of its own lattice translates."""


class IncompatibleTorusError(PdsError):
    """A torus period vector is not in the kernel of the quotient map."""


class DifferentTorusError(PdsError):
    """Two solutions live on different tori and cannot be compared."""


class InconsistentSeedError(PdsError):
    """A seed configuration violates its own structural invariants."""


class UnknownCaseError(PdsError):
    """An unknown case id was requested from the proof catalog."""


class CertificateFormatError(PdsError):
    """A certificate is structurally malformed; the message names the bad step."""
