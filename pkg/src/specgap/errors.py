"""Exception types shared across the package.

Every rejection an operation can produce has a named class so callers can
branch on failure modes instead of parsing messages.
"""


class SpecGapError(Exception):
    """Base class for all package errors."""


# ---- exact symplectic layer ----

class NotSquareError(SpecGapError):
    pass


class OddDimensionError(SpecGapError):
    pass


class NotSymplecticError(SpecGapError):
    pass


class ToleranceConflictError(SpecGapError):
    """Numeric eigenvalue grouping contradicts the exact unit-circle certificate."""


# ---- mapping torus layer ----

class NotUnitModulusError(SpecGapError):
    pass


class DegreeOutOfRangeError(SpecGapError):
    pass


# ---- norm profiles ----

class NotPositiveDefiniteError(SpecGapError):
    pass


class OutOfRangeError(SpecGapError):
    pass


class DimensionMismatchError(SpecGapError):
    pass


class DegenerateWindowError(SpecGapError):
    pass


# ---- derivative operator ----

class IndeterminateError(SpecGapError):
    """Partial integrals neither clearly converge nor clearly diverge.

    Carries the ambiguous tail/head ratios so the caller can enlarge the
    horizon instead of trusting a silent guess.
    """

    def __init__(self, message, ratios=None):
        super().__init__(message)
        self.ratios = ratios


class SplitHypothesisUnverifiedError(SpecGapError):
    pass


class TailNotIntegrableError(SpecGapError):
    pass


class WeightEnvelopeViolatedError(SpecGapError):
    pass


class GridTooCoarseError(SpecGapError):
    pass


class EmptyEndListError(SpecGapError):
    pass


# ---- interval exchanges / Lyapunov ----

class BoundaryHitError(SpecGapError):
    """The orbit landed exactly on (or numerically too close to) a discontinuity."""


class NoReturnWithinBudgetError(SpecGapError):
    def __init__(self, message, budget=None):
        super().__init__(message)
        self.budget = budget


class AllZeroEvaluationsError(SpecGapError):
    pass


class UnresolvedStrataError(SpecGapError):
    pass


class GenericityFailureError(SpecGapError):
    pass


# ---- Lagrangian homology ----

class PreconditionNotAttestedError(SpecGapError):
    pass


# ---- tube quasimodes ----

class ZeroWavenumberError(SpecGapError):
    pass


class SupportTouchesOriginError(SpecGapError):
    pass


# ---- CLI ----

class SchemaError(SpecGapError):
    pass


class IoError(SpecGapError):
    pass
