"""Exception hierarchy for spectra-kit."""


class SpectraKitError(Exception):
    """Base class for all library errors."""


# --- interval geometry ------------------------------------------------------

class EmptyInput(SpectraKitError):
    """No intervals were supplied."""


class EmptyInterval(SpectraKitError):
    """An interval has nonpositive length."""


class OverlappingIntervals(SpectraKitError):
    """Intervals overlap and cannot be ordered into a disjoint union."""


class NonpositivePeriod(SpectraKitError):
    """A period or modulus must be strictly positive."""


class BoundaryPoint(SpectraKitError):
    """A sample point landed on (or too close to) an interval endpoint."""


class UnnormalizedMeasure(SpectraKitError):
    """Operation requires the union to have total length one."""


class CongruenceViolated(SpectraKitError):
    """Required endpoint congruences modulo 1/p do not hold."""


class CycleOverlap(SpectraKitError):
    """Translated interval cycles could not be placed disjointly."""


class NoUniquePartner(SpectraKitError):
    """Zero or several intervals are congruent to the given right endpoint."""


# --- boundary matrices ------------------------------------------------------

class NonUnitaryInput(SpectraKitError):
    """A matrix that must be unitary failed the unitarity test."""


class SingularFactor(SpectraKitError):
    """A matrix factor is numerically singular (condition number guard)."""


class SingularMalpha(SpectraKitError):
    """The left-endpoint exponential matrix is numerically singular."""


# --- spectrum solving -------------------------------------------------------

class WindingMismatch(SpectraKitError):
    """Eigenphase tracking lost a crossing; retry with a finer grid."""


class NotAnEigenvalue(SpectraKitError):
    """The requested point is not in the computed spectrum."""


class NotASpectrum(SpectraKitError):
    """The candidate frequency set is not a spectrum for the union."""


# --- spectral pairs ---------------------------------------------------------

class SizeMismatch(SpectraKitError):
    """Finite sets must have equal cardinality."""


class ZeroFunction(SpectraKitError):
    """The test function has zero norm."""


class NotLatticeAligned(SpectraKitError):
    """All endpoints must lie on the lattice (1/p)Z."""


# --- translation groups -----------------------------------------------------

class NotPTile(SpectraKitError):
    """The union does not cover the line exactly p times under (1/p)Z shifts."""


class GridMismatch(SpectraKitError):
    """Sampled functions live on incompatible grids."""


# --- two-interval classifier ------------------------------------------------

class OutOfRange(SpectraKitError):
    """Two-interval parameters outside the admissible range."""


class WrongCase(SpectraKitError):
    """Closed-form operation invoked on the wrong classification case."""


class InconsistencyDetected(SpectraKitError):
    """Closed forms and the generic pipeline disagree (internal bug)."""


# --- reproducing kernels ----------------------------------------------------

class PointOutsideClosure(SpectraKitError):
    """Kernel base point lies outside the closure of the union."""
