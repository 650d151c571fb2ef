"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class SchedError(Exception):
    exit_code = 1


class ValidationError(SchedError):
    """Structural problem with a graph or schedule document."""

    exit_code = 2


class DomainError(ValidationError):
    """An id refers to an op of the wrong kind or one that does not exist."""


class CoverageError(SchedError):
    """A time oracle or trace set does not cover every op."""

    exit_code = 3

    def __init__(self, missing, what="time entry"):
        self.missing = sorted(missing)
        shown = ", ".join(self.missing[:10])
        if len(self.missing) > 10:
            shown += f", ... ({len(self.missing)} total)"
        super().__init__(f"missing {what} for: {shown}")


class ParameterError(SchedError):
    exit_code = 4


class DegenerateBoundsError(ParameterError):
    pass
