"""
Pauli frame tracking.

Corrections that are Pauli operators are never executed as gates. They are
recorded per wire as a pair of bits (x_flip, z_flip), pushed through CNOTs by
the conjugation rules, and folded into measurement outcomes when a wire is
read out.
"""

from __future__ import annotations

import logging
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, Dict, Iterable, Mapping, Optional

from .circuit import (
    Cnot,
    Init,
    Measure,
    MeasurementBasis,
    Operation,
    QubitId,
    Rotation,
    SelectiveMeasure,
)
from .errors import FrameError

if TYPE_CHECKING:
    from .gadgets import CorrectionRule

logger = logging.getLogger(__name__)


class Pauli(Enum):
    I = "I"
    X = "X"
    Z = "Z"
    XZ = "XZ"

    @property
    def x(self) -> int:
        return int(self in (Pauli.X, Pauli.XZ))

    @property
    def z(self) -> int:
        return int(self in (Pauli.Z, Pauli.XZ))

    @property
    def bits(self) -> tuple[int, int]:
        return (self.x, self.z)

    @classmethod
    def from_bits(cls, x: int, z: int) -> "Pauli":
        return _FROM_BITS[(int(x) & 1, int(z) & 1)]

    def __mul__(self, other: "Pauli") -> "Pauli":
        """Product up to phase."""
        return Pauli.from_bits(self.x ^ other.x, self.z ^ other.z)


_FROM_BITS = {(0, 0): Pauli.I, (1, 0): Pauli.X, (0, 1): Pauli.Z, (1, 1): Pauli.XZ}


class PauliFrame:
    """Immutable map from live wire to its pending Pauli correction."""

    __slots__ = ("_flips",)

    def __init__(self, flips: Optional[Mapping[QubitId, Pauli]] = None):
        self._flips: Dict[QubitId, Pauli] = dict(flips or {})

    @classmethod
    def from_bits(cls, bits: Mapping[QubitId, tuple[int, int]]) -> "PauliFrame":
        return cls({q: Pauli.from_bits(*xz) for q, xz in bits.items()})

    # ----------------------------------------------------------
    def __contains__(self, q: QubitId) -> bool:
        return q in self._flips

    def __eq__(self, other) -> bool:
        return isinstance(other, PauliFrame) and self._flips == other._flips

    def __repr__(self) -> str:
        body = ", ".join(f"{q}:{p.value}" for q, p in sorted(self._flips.items()))
        return f"PauliFrame({body})"

    @property
    def wires(self) -> list[QubitId]:
        return sorted(self._flips)

    def get(self, q: QubitId) -> Pauli:
        return self._flips.get(q, Pauli.I)

    def bits(self, q: QubitId) -> tuple[int, int]:
        return self.get(q).bits

    def items(self):
        return self._flips.items()

    def is_identity(self) -> bool:
        return all(p is Pauli.I for p in self._flips.values())

    # ----------------------------------------------------------
    def with_pauli(self, q: QubitId, pauli: Pauli) -> "PauliFrame":
        flips = dict(self._flips)
        flips[q] = pauli
        return PauliFrame(flips)

    def toggled(self, q: QubitId, pauli: Pauli) -> "PauliFrame":
        return self.with_pauli(q, self.get(q) * pauli)

    def retired(self, q: QubitId) -> "PauliFrame":
        flips = dict(self._flips)
        flips.pop(q, None)
        return PauliFrame(flips)


def _is_pauli_rotation(op: Operation) -> bool:
    return isinstance(op, Rotation) and op.angle % 2 in (0, Fraction(1))


def propagate_frame(frame: PauliFrame, op: Operation) -> PauliFrame:
    """Push ``frame`` through one ICM operation.

    CNOT copies the control's x_flip onto the target and the target's
    z_flip onto the control. Measurements retire the measured wire and Init
    starts a fresh identity frame. Pauli rotations (angle 0 or pi) commute
    with every Pauli up to phase and leave the frame untouched.
    """
    if isinstance(op, Init):
        return frame.with_pauli(op.qubit, Pauli.I)
    if isinstance(op, Cnot):
        cx, cz = frame.bits(op.control)
        tx, tz = frame.bits(op.target)
        return frame.with_pauli(op.control, Pauli.from_bits(cx, cz ^ tz)).with_pauli(
            op.target, Pauli.from_bits(tx ^ cx, tz)
        )
    if isinstance(op, (Measure, SelectiveMeasure)):
        return frame.retired(op.qubit)
    if _is_pauli_rotation(op):
        return frame
    raise FrameError(f"cannot track a Pauli frame through {op!r}")


def correct_outcome(
    frame: PauliFrame, qubit: QubitId, basis: MeasurementBasis, bit: int
) -> int:
    """Fold the pending correction of ``qubit`` into a raw outcome bit."""
    x, z = frame.bits(qubit)
    return int(bit) ^ (x if basis is MeasurementBasis.Z else z)


# --------------------------------------------------------------
class FrameTracker:
    """
    Replays an ICM circuit's measurement outcomes against a Pauli frame.

    The tracker is the classical side of a compiled circuit: it corrects raw
    outcome bits, decides the basis of every selective measurement from the
    corrected controller bit, and applies each gadget's correction rule once
    the gadget's last operation has executed. It doubles as the outcome
    ledger of ``oracle.measure_all_branches``.

    Parameters
    ----------
    rules : Iterable[CorrectionRule]
        Correction rules keyed by the ICM op index they follow (``anchor``).
    inputs : Iterable[QubitId]
        Wires that are live before the first operation.
    """

    def __init__(self, rules: Iterable["CorrectionRule"] = (), inputs: Iterable[QubitId] = ()):
        self.frame = PauliFrame({q: Pauli.I for q in inputs})
        self.corrected: Dict[QubitId, int] = {}
        self.raw: Dict[QubitId, int] = {}
        self.applied: list[tuple[str, Pauli]] = []
        self._rules: Dict[int, list["CorrectionRule"]] = {}
        for rule in rules:
            self._rules.setdefault(rule.anchor, []).append(rule)
        self._apply_rules(-1)

    def fork(self) -> "FrameTracker":
        twin = FrameTracker.__new__(FrameTracker)
        twin.frame = self.frame
        twin.corrected = dict(self.corrected)
        twin.raw = dict(self.raw)
        twin.applied = list(self.applied)
        twin._rules = self._rules
        return twin

    # ----------------------------------------------------------
    def selective_basis(self, op: SelectiveMeasure) -> MeasurementBasis:
        if op.controller not in self.corrected:
            raise FrameError(f"controller {op.controller!r} has no recorded outcome")
        return op.basis_for(self.corrected[op.controller])

    def step(
        self,
        index: int,
        op: Operation,
        basis: Optional[MeasurementBasis] = None,
        bit: Optional[int] = None,
    ) -> Optional[int]:
        """Advance past op ``index``; returns the corrected bit for measurements."""
        corrected = None
        if isinstance(op, (Measure, SelectiveMeasure)):
            if basis is None or bit is None:
                raise FrameError(f"op {index}: measurement needs a basis and an outcome")
            corrected = correct_outcome(self.frame, op.qubit, basis, bit)
            self.raw[op.qubit] = int(bit)
            self.corrected[op.qubit] = corrected
        self.frame = propagate_frame(self.frame, op)
        self._apply_rules(index)
        return corrected

    def _apply_rules(self, index: int) -> None:
        for rule in self._rules.get(index, ()):
            try:
                key = tuple(self.corrected[q] for q in rule.measured)
            except KeyError as exc:
                raise FrameError(
                    f"rule {rule.gadget_id}: wire {exc.args[0]!r} not measured by op {index}"
                ) from None
            if key not in rule.table:
                raise FrameError(f"rule {rule.gadget_id}: no correction for outcomes {key}")
            if rule.output_wire not in self.frame:
                raise FrameError(
                    f"rule {rule.gadget_id}: output wire {rule.output_wire!r} is not live"
                )
            pauli = rule.table[key]
            self.frame = self.frame.toggled(rule.output_wire, pauli)
            self.applied.append((rule.gadget_id, pauli))
            logger.debug("rule %s outcomes %s -> %s on %s", rule.gadget_id, key, pauli.value, rule.output_wire)
