"""Exception hierarchy for polishforge."""

from typing import Any


class PolishForgeError(Exception):
    """Base class for all polishforge errors."""


class ConfigError(PolishForgeError):
    """Invalid settings or experiment configuration."""


class StreamFormatError(PolishForgeError):
    """Malformed stream, tree or witness file."""

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class StreamInvariantError(PolishForgeError):
    """A presentation stream invariant is violated at a stage."""

    def __init__(self, message: str, stage: int) -> None:
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


class CertificateError(PolishForgeError):
    """A point is not covered by the stage net."""

    def __init__(self, point_id: int, stage: int) -> None:
        super().__init__(f"point {point_id} is not within 2^-{stage} of the stage-{stage} net")
        self.point_id = point_id
        self.stage = stage


class RefinementError(PolishForgeError):
    """A cover ball has no formal parent in the previous cover."""

    def __init__(self, stage: int, point_id: int) -> None:
        super().__init__(f"stage {stage}: ball at point {point_id} has no formal parent")
        self.stage = stage
        self.point_id = point_id


class UncertifiedStreamError(PolishForgeError):
    """A certificate-requiring analyzer received a polish stream."""


class TreeError(PolishForgeError):
    """Parent resolution failed while extending a component tree."""

    def __init__(self, message: str, stage: int) -> None:
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


class DimensionObstruction(PolishForgeError):
    """Zero-dimensional extraction is impossible at a stage."""

    def __init__(self, message: str, stage: int) -> None:
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


class UnsupportedTermError(PolishForgeError):
    """A space term cannot be handled by the requested operation."""


class TermSyntaxError(PolishForgeError):
    """Malformed s-expression term."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"position {position}: {message}")
        self.position = position


class GatePatternError(PolishForgeError):
    """Malformed gate pattern or witness table arity."""


class BudgetExceeded(PolishForgeError):
    """The requested budget exceeds the available input; carries a partial report."""

    def __init__(self, message: str, partial: dict[str, Any]) -> None:
        super().__init__(message)
        self.partial = partial
