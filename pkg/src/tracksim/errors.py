"""Exception types shared across the package."""


class TracksimError(Exception):
    """Base class for all package-specific errors."""


class ScenarioError(TracksimError):
    """Scenario file is malformed, has unknown fields, or violates an invariant."""


class FormatError(TracksimError):
    """LLM output could not be parsed into the expected structure.

    Carries the first offending line (when line-oriented) so it can be fed
    back into the next prompt as a repair note.
    """

    def __init__(self, reason: str, offending: str | None = None):
        self.reason = reason
        self.offending = offending
        msg = reason if offending is None else f"{reason}: {offending!r}"
        super().__init__(msg)


class DimensionMismatchError(TracksimError):
    """Assignment matrix dimensions do not match the robot/target rosters."""


class NumericalDegeneracyError(TracksimError):
    """A linear-algebra step failed (ill-conditioned covariance or noise)."""


class SolverNumericsError(TracksimError):
    """The control solver hit a non-finite objective value."""
