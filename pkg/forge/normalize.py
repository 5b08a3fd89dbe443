"""Rewrite named Clifford+T gates as Z/X rotations."""

from __future__ import annotations

from dataclasses import replace

from .circuit import Axis, Circuit, Gate, GateKind, Operation, Rotation, reduce_angle
from .constants import HALF, QUARTER, SUPPORTED_ROTATIONS
from .errors import UnsupportedAngle

_GATE_ROTATIONS = {
    GateKind.H: ((Axis.Z, HALF), (Axis.X, HALF), (Axis.Z, HALF)),
    GateKind.V: ((Axis.X, HALF),),
    GateKind.S: ((Axis.Z, HALF),),
    GateKind.T: ((Axis.Z, QUARTER),),
}


def check_angle(op: Rotation, index: int | None = None) -> None:
    """Reject rotations that no ICM gadget lowers (X-axis quarter turns included)."""
    reduced = reduce_angle(op.angle)
    if reduced != 0 and (op.axis.value, reduced) not in SUPPORTED_ROTATIONS:
        where = f"op {index}: " if index is not None else ""
        raise UnsupportedAngle(
            f"{where}r{op.axis.value}({op.angle}pi) on {op.qubit!r} has no ICM gadget"
        )


def normalize_gates(c: Circuit) -> Circuit:
    """Replace every Gate op by its rotation sequence; other ops pass through."""
    ops: list[Operation] = []
    for i, op in enumerate(c.ops):
        if isinstance(op, Gate):
            ops.extend(Rotation(axis, angle, op.qubit) for axis, angle in _GATE_ROTATIONS[op.kind])
        else:
            if isinstance(op, Rotation):
                check_angle(op, i)
            ops.append(op)
    return replace(c, ops=tuple(ops))


def t_count(c: Circuit) -> int:
    """Number of quarter-turn Z rotations (T and T-dagger), counting T gates too."""
    count = 0
    for op in c.ops:
        if isinstance(op, Gate) and op.kind is GateKind.T:
            count += 1
        elif (
            isinstance(op, Rotation)
            and op.axis is Axis.Z
            and abs(reduce_angle(op.angle)) == QUARTER
        ):
            count += 1
    return count
