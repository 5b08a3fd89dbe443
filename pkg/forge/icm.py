"""
Lowering of a normalised Clifford+T circuit to ICM form.

Each rotation is replaced by its teleportation gadget; the logical qubit
then lives on the gadget's output wire, so later operations are renamed
onto whichever wire currently carries it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

from .circuit import (
    Circuit,
    Cnot,
    Init,
    Measure,
    Operation,
    QubitId,
    Rotation,
    SelectiveMeasure,
    reduce_angle,
)
from .errors import InvalidOperation
from .gadgets import AncillaAllocator, CorrectionRule, GadgetKind, expand_kind
from .normalize import normalize_gates

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IcmResult:
    """
    Attributes
    ----------
    circuit : Circuit
        The ICM circuit.
    rules : tuple[CorrectionRule, ...]
        One rule per gadget (frame-only rules included), in emission order.
    wire_of : dict
        Logical qubit live at the end -> ICM wire carrying it.
    measured_on : dict
        Logical qubit measured by the source circuit -> ICM wire measured.
    """

    circuit: Circuit
    rules: tuple[CorrectionRule, ...] = ()
    wire_of: Dict[QubitId, QubitId] = field(default_factory=dict)
    measured_on: Dict[QubitId, QubitId] = field(default_factory=dict)

    def __iter__(self):
        # allows ``icm, rules = expand_all(c)``
        return iter((self.circuit, self.rules))

    def gadget_counts(self) -> Dict[str, int]:
        counts = {kind.value: 0 for kind in GadgetKind}
        for rule in self.rules:
            counts[rule.kind.value] += 1
        return counts


def expand_all(c: Circuit, allocator: Optional[AncillaAllocator] = None) -> IcmResult:
    """Expand every rotation of ``c`` into its gadget and rename the rest."""
    c = normalize_gates(c)
    allocator = allocator or AncillaAllocator(c.qubits)

    current: Dict[QubitId, QubitId] = {q: q for q in c.qubits}
    live = set(c.inputs)
    qubits = list(c.qubits)
    ops: list[Operation] = []
    rules: list[CorrectionRule] = []
    measured_on: Dict[QubitId, QubitId] = {}

    for i, op in enumerate(c.ops):
        if isinstance(op, Rotation):
            angle = reduce_angle(op.angle)
            if angle == 0:
                continue
            kind = GadgetKind.for_rotation(op.axis, angle)
            expansion = expand_kind(kind, current[op.qubit], allocator, live)
            ops.extend(expansion.new_ops)
            qubits.extend(expansion.ancillas)
            live |= set(expansion.ancillas)
            live -= set(expansion.measured)
            current[op.qubit] = expansion.output_wire
            rules.append(expansion.rule(f"g{len(rules)}", len(ops) - 1))
        elif isinstance(op, Init):
            ops.append(Init(current[op.qubit], op.state))
            live.add(current[op.qubit])
        elif isinstance(op, Cnot):
            ops.append(Cnot(current[op.control], current[op.target]))
        elif isinstance(op, Measure):
            wire = current[op.qubit]
            ops.append(Measure(wire, op.basis))
            measured_on[op.qubit] = wire
            live.discard(wire)
        elif isinstance(op, SelectiveMeasure):
            wire = current[op.qubit]
            ops.append(
                SelectiveMeasure(
                    wire, measured_on[op.controller], op.basis_if_zero, op.basis_if_one
                )
            )
            measured_on[op.qubit] = wire
            live.discard(wire)
        else:
            raise InvalidOperation(f"cannot lower {op!r}", op_index=i)

    icm = Circuit(
        tuple(qubits),
        tuple(ops),
        c.inputs,
        frozenset(current[q] for q in c.outputs),
    )
    wire_of = {q: current[q] for q in c.live_at_end()}
    logger.info(
        "icm: %d op(s) -> %d op(s), %d gadget(s), %d ancilla(s)",
        len(c.ops), len(ops), len(rules), len(allocator.issued),
    )
    return IcmResult(icm, tuple(rules), wire_of, measured_on)
