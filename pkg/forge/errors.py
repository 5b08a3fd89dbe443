"""Exception hierarchy for the compiler pipeline.

Every error carries a ``stage`` tag so the CLI and the HTTP layer can report
where a run failed without inspecting the class name.
"""

from typing import Optional


class ForgeError(Exception):
    stage = "forge"


# ---------- Circuit IR / parser ----------
class CircuitError(ForgeError, ValueError):
    """Structural problem with a circuit, optionally located in its source text."""

    stage = "parse"

    def __init__(
        self,
        message: str,
        *,
        line: Optional[int] = None,
        column: Optional[int] = None,
        op_index: Optional[int] = None,
    ):
        self.message = message
        self.line = line
        self.column = column
        self.op_index = op_index
        super().__init__(self._render())

    def _render(self) -> str:
        if self.line is not None:
            return f"{self.line}:{self.column or 1}: {self.message}"
        if self.op_index is not None:
            return f"op {self.op_index}: {self.message}"
        return self.message

    def located(self, line: int, column: int) -> "CircuitError":
        """Return a copy of this error pinned to a source position."""
        return type(self)(self.message, line=line, column=column, op_index=self.op_index)


class CircuitSyntaxError(CircuitError):
    pass


class UnknownQubit(CircuitError):
    pass


class DuplicateQubit(CircuitError):
    pass


class UseAfterMeasure(CircuitError):
    pass


class ControllerNotMeasured(CircuitError):
    pass


class InvalidOperation(CircuitError):
    pass


# ---------- ICM lowering ----------
class UnsupportedAngle(ForgeError, ValueError):
    stage = "icm"


class QubitNotLive(ForgeError):
    stage = "icm"


class GadgetError(ForgeError):
    stage = "icm"


class FrameError(ForgeError):
    stage = "icm"


class NotIcm(ForgeError):
    stage = "schedule"


# ---------- State oracle ----------
class OracleError(ForgeError):
    stage = "oracle"


class CapacityExceeded(OracleError):
    pass


class ZeroProbabilityOnly(OracleError):
    pass


class DimensionMismatch(OracleError):
    pass


class NotUnitary(OracleError):
    pass


# ---------- Scheduling ----------
class OverlapViolation(ForgeError):
    stage = "schedule"


# ---------- Geometry ----------
class GeometryError(ForgeError):
    stage = "assembly"


class RailNotLive(GeometryError):
    pass


class MissingBoxOutput(GeometryError):
    pass


class EmptyAssembly(GeometryError):
    pass


# ---------- Distillation ----------
class DistillationError(ForgeError):
    stage = "plan"


class TargetUnreachable(DistillationError):
    pass


class InsufficientSuccesses(DistillationError):
    def __init__(self, message: str, deficit: Optional[dict] = None):
        self.deficit = dict(deficit or {})
        super().__init__(message)
