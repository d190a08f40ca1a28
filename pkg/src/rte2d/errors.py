"""Exception hierarchy for the workbench.

Every error raised by the library derives from ``Rte2dError`` so callers can
catch workbench failures without masking programming errors.
"""


class Rte2dError(Exception):
    """Base class for all workbench errors."""


# ---------------------------------------------------------------- geometry

class PointOutsideDomain(Rte2dError):
    """A phase point lies strictly outside the closed domain."""


class TangentialRay(Rte2dError):
    """A ray meets the boundary too tangentially for a reliable exit point."""


class ParallelRays(Rte2dError):
    """Two probe rays are parallel and have no crossing point."""


class IntersectionOutsideDomain(Rte2dError):
    """The crossing point of two probe rays falls outside the domain."""


# ------------------------------------------------------------------ fields

class InvalidPhantomParams(Rte2dError):
    """Phantom parameters violate the declared coefficient bounds."""


class InvalidCoefficients(Rte2dError):
    """A coefficient pair violates 0 <= sigma_0 <= sigma_s <= sigma_a."""


# ----------------------------------------------------------------- solvers

class NotConverged(Rte2dError):
    """An iterative solve hit its iteration cap before reaching tolerance."""

    def __init__(self, iterations, residual, message=""):
        self.iterations = iterations
        self.residual = residual
        text = message or "no convergence after %d iterations (residual %.3e)" % (
            iterations, residual)
        super().__init__(text)


class LinearSolveFailed(Rte2dError):
    """A sparse linear solve stagnated or produced non-finite values."""


class MonotonicityViolated(Rte2dError):
    """A monotone temperature iterate decreased; lambda too small or the
    discrete maximum principle broke."""


class ForwardSolveFailed(Rte2dError):
    """A forward transport solve required by a probe failed."""


# ------------------------------------------------------------------ probes

class SupportEscapesPatch(Rte2dError):
    """A probe support overlaps a near-tangential boundary region."""


class ScheduleInfeasible(Rte2dError):
    """Probe width schedule parameters are out of their admissible range."""


class GeometryInfeasible(Rte2dError):
    """No admissible crossing geometry exists through the requested point."""


class ContaminationTooLarge(Rte2dError):
    """Multiple-scattering contamination exceeds the declared bound."""


class NonPositiveTransmission(Rte2dError):
    """A corrected transmission came out non-positive; the measurement is
    dominated by quadrature noise at the current widths."""


# --------------------------------------------------------------- inversion

class UnderdeterminedCoverage(Rte2dError):
    """Chord coverage of the reconstruction grid is too sparse."""


class SolverStagnation(Rte2dError):
    """The regularized least-squares solve did not reach its tolerance."""


# ----------------------------------------------------------------- harness

class ConfigInvalid(Rte2dError):
    """The experiment configuration failed validation."""


class StageFailed(Rte2dError):
    """A pipeline stage failed; the run manifest records which one."""


class OracleBudgetExceeded(Rte2dError):
    """A reference oracle was asked for more work than its budget allows."""
