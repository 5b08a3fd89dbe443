"""
Teleportation gadgets that lower single-qubit rotations to ICM form.

Every gadget consumes fresh ancillas, entangles them with the data wire by
CNOTs and measures everything but one output wire. Which Pauli is left on
the output wire depends on the outcomes; those tables are not written down
here but derived from the state-vector oracle the first time they are
needed.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Collection, Iterable, Mapping, Optional

import numpy as np

from .circuit import (
    Axis,
    Circuit,
    Cnot,
    Init,
    InitState,
    Measure,
    MeasurementBasis,
    Operation,
    QubitId,
    Rotation,
    SelectiveMeasure,
)
from .constants import FULL, HALF, QUARTER
from .errors import GadgetError, QubitNotLive, UnsupportedAngle
from .frame import Pauli
from .oracle import apply, apply_pauli, equal_up_to_phase, measure_all_branches, random_state

logger = logging.getLogger(__name__)

Z, X = MeasurementBasis.Z, MeasurementBasis.X
TABLE_SEED = 20150817
TABLE_TRIALS = 3


class GadgetKind(Enum):
    S = "S"
    S_DAG = "S_DAG"
    V = "V"
    V_DAG = "V_DAG"
    T = "T"
    T_DAG = "T_DAG"
    PAULI_Z = "PAULI_Z"
    PAULI_X = "PAULI_X"

    @property
    def rotation(self) -> tuple[Axis, Fraction]:
        return _ROTATION_OF[self]

    @property
    def is_frame_only(self) -> bool:
        return self in (GadgetKind.PAULI_Z, GadgetKind.PAULI_X)

    @classmethod
    def for_rotation(cls, axis: Axis, angle: Fraction) -> "GadgetKind":
        try:
            return _KIND_OF[(axis, Fraction(angle))]
        except KeyError:
            raise UnsupportedAngle(
                f"r{axis.value}({angle}pi) has no ICM gadget (supported: +-1/4, +-1/2, 1)"
            ) from None


_ROTATION_OF = {
    GadgetKind.S: (Axis.Z, HALF),
    GadgetKind.S_DAG: (Axis.Z, -HALF),
    GadgetKind.V: (Axis.X, HALF),
    GadgetKind.V_DAG: (Axis.X, -HALF),
    GadgetKind.T: (Axis.Z, QUARTER),
    GadgetKind.T_DAG: (Axis.Z, -QUARTER),
    GadgetKind.PAULI_Z: (Axis.Z, FULL),
    GadgetKind.PAULI_X: (Axis.X, FULL),
}
_KIND_OF = {rotation: kind for kind, rotation in _ROTATION_OF.items()}


# --------------------------------------------------------------
class AncillaAllocator:
    """Hands out ``anc<n>`` names from one monotonic counter.

    Reservation is atomic, so expansions computed on several threads never
    receive the same name. Names already used by the circuit are skipped.
    """

    def __init__(self, taken: Iterable[QubitId] = (), prefix: str = "anc"):
        self._taken = set(taken)
        self._prefix = prefix
        self._next = 0
        self._lock = threading.Lock()
        self.issued: list[QubitId] = []

    def reserve(self, count: int) -> list[QubitId]:
        names = []
        with self._lock:
            while len(names) < count:
                name = f"{self._prefix}{self._next}"
                self._next += 1
                if name in self._taken:
                    continue
                self._taken.add(name)
                names.append(name)
            self.issued.extend(names)
        return names


@dataclass(frozen=True)
class CorrectionRule:
    """
    Pauli correction owed to ``output_wire`` once a gadget has run.

    ``table`` maps the frame-corrected outcome bits of ``measured`` (in
    measurement order) to the Pauli toggled into the output wire's frame.
    ``anchor`` is the ICM op index after which the rule fires, -1 meaning
    before the first op.
    """

    gadget_id: str
    kind: GadgetKind
    output_wire: QubitId
    measured: tuple[QubitId, ...]
    table: Mapping[tuple[int, ...], Pauli]
    anchor: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "output_wire": self.output_wire,
            "measured": list(self.measured),
            "anchor": self.anchor,
            "table": {_key_str(k): p.value for k, p in sorted(self.table.items())},
        }

    @classmethod
    def from_dict(cls, gadget_id: str, data: Mapping) -> "CorrectionRule":
        """Rebuild a rule; the table is re-derived from the gadget kind."""
        kind = GadgetKind(data["kind"])
        measured = tuple(data.get("measured", ()))
        table = derive_correction_table(kind)
        if len(next(iter(table))) != len(measured):
            raise GadgetError(
                f"{gadget_id}: {kind.value} gadget measures "
                f"{len(next(iter(table)))} wire(s), record lists {len(measured)}"
            )
        return cls(gadget_id, kind, data["output_wire"], measured, table, int(data["anchor"]))


@dataclass(frozen=True)
class GadgetExpansion:
    kind: GadgetKind
    data: QubitId
    new_ops: tuple[Operation, ...]
    output_wire: QubitId
    measured: tuple[QubitId, ...]
    ancillas: tuple[QubitId, ...]

    @property
    def correction_rule(self) -> Mapping[tuple[int, ...], Pauli]:
        return derive_correction_table(self.kind)

    def rule(self, gadget_id: str, anchor: int) -> CorrectionRule:
        return CorrectionRule(
            gadget_id, self.kind, self.output_wire, self.measured, self.correction_rule, anchor
        )


def _key_str(key: tuple[int, ...]) -> str:
    return "".join(str(bit) for bit in key)


# --------------------------------------------------------------
# Gadget structures
def _phase_gadget(data: QubitId, anc: QubitId) -> tuple[Operation, ...]:
    # Rz(+-pi/2): data controls a |Y> ancilla that is read out in Z
    return (Init(anc, InitState.Y), Cnot(data, anc), Measure(anc, Z))


def _x_phase_gadget(data: QubitId, anc: QubitId) -> tuple[Operation, ...]:
    # Rx(+-pi/2): the |Y> ancilla controls the data wire and is read out in X
    return (Init(anc, InitState.Y), Cnot(anc, data), Measure(anc, X))


def _t_gadget(data: QubitId, ancillas: list[QubitId], dagger: bool) -> tuple[Operation, ...]:
    a1, a2, a3, a4, a5 = ancillas
    # bases of rows a1..a4 when the data outcome is 0 (plain teleport) or 1 (with S fix-up)
    teleport, fixup = (X, Z, Z, X), (Z, X, X, Z)
    if dagger:
        teleport, fixup = fixup, teleport
    return (
        Init(a1, InitState.A),
        Init(a2, InitState.ZERO),
        Init(a3, InitState.Y),
        Init(a4, InitState.PLUS),
        Init(a5, InitState.ZERO),
        Cnot(a1, data),
        Cnot(a1, a2),
        Cnot(a3, a1),
        Cnot(a4, a2),
        Cnot(a3, a5),
        Cnot(a4, a5),
        Measure(data, Z),
        *(
            SelectiveMeasure(row, data, zero, one)
            for row, zero, one in zip((a1, a2, a3, a4), teleport, fixup)
        ),
    )


def _check_live(data: QubitId, live: Optional[Collection[QubitId]]) -> None:
    if live is not None and data not in live:
        raise QubitNotLive(f"qubit {data!r} is not live")


def expand_kind(
    kind: GadgetKind,
    data: QubitId,
    allocator: Optional[AncillaAllocator],
    live: Optional[Collection[QubitId]],
) -> GadgetExpansion:
    _check_live(data, live)
    allocator = allocator or AncillaAllocator({data} | set(live or ()))
    if kind in (GadgetKind.S, GadgetKind.S_DAG, GadgetKind.V, GadgetKind.V_DAG):
        (anc,) = allocator.reserve(1)
        build = _phase_gadget if kind in (GadgetKind.S, GadgetKind.S_DAG) else _x_phase_gadget
        return GadgetExpansion(kind, data, build(data, anc), data, (anc,), (anc,))
    if kind in (GadgetKind.T, GadgetKind.T_DAG):
        ancillas = allocator.reserve(5)
        ops = _t_gadget(data, ancillas, dagger=kind is GadgetKind.T_DAG)
        return GadgetExpansion(
            kind, data, ops, ancillas[4], (data, *ancillas[:4]), tuple(ancillas)
        )
    return GadgetExpansion(kind, data, (), data, (), ())


def expand_s(
    data: QubitId,
    allocator: Optional[AncillaAllocator] = None,
    *,
    dagger: bool = False,
    live: Optional[Collection[QubitId]] = None,
) -> GadgetExpansion:
    return expand_kind(GadgetKind.S_DAG if dagger else GadgetKind.S, data, allocator, live)


def expand_v(
    data: QubitId,
    allocator: Optional[AncillaAllocator] = None,
    *,
    dagger: bool = False,
    live: Optional[Collection[QubitId]] = None,
) -> GadgetExpansion:
    return expand_kind(GadgetKind.V_DAG if dagger else GadgetKind.V, data, allocator, live)


def expand_t(
    data: QubitId,
    allocator: Optional[AncillaAllocator] = None,
    *,
    dagger: bool = False,
    live: Optional[Collection[QubitId]] = None,
) -> GadgetExpansion:
    """Six-wire T gadget; the result leaves on the last ancilla."""
    return expand_kind(GadgetKind.T_DAG if dagger else GadgetKind.T, data, allocator, live)


def expand_pauli(
    data: QubitId,
    axis: Axis,
    *,
    live: Optional[Collection[QubitId]] = None,
) -> GadgetExpansion:
    """Pi rotations are pure frame updates and emit no operations."""
    kind = GadgetKind.PAULI_Z if axis is Axis.Z else GadgetKind.PAULI_X
    return expand_kind(kind, data, None, live)


def expand_rotation(
    op: Rotation,
    allocator: Optional[AncillaAllocator] = None,
    *,
    live: Optional[Collection[QubitId]] = None,
) -> GadgetExpansion:
    kind = GadgetKind.for_rotation(op.axis, op.angle)
    return expand_kind(kind, op.qubit, allocator, live)


def gadget_circuit(kind: GadgetKind, data: QubitId = "q") -> tuple[Circuit, GadgetExpansion]:
    """The gadget alone, as a circuit with ``data`` as its only input."""
    expansion = expand_kind(kind, data, AncillaAllocator({data}), None)
    return (
        Circuit(
            (data, *expansion.ancillas),
            expansion.new_ops,
            frozenset({data}),
            frozenset({expansion.output_wire}),
        ),
        expansion,
    )


# --------------------------------------------------------------
_PAULI_TABLES = {
    GadgetKind.PAULI_Z: {(): Pauli.Z},
    GadgetKind.PAULI_X: {(): Pauli.X},
}


@lru_cache(maxsize=None)
def derive_correction_table(kind: GadgetKind) -> Mapping[tuple[int, ...], Pauli]:
    """
    Solve, branch by branch, for the Pauli that turns the gadget's output
    into the target rotation of its input.

    Several random inputs are pushed through the oracle; a table entry is
    accepted only when the same Pauli works for all of them.
    """
    if kind.is_frame_only:
        return MappingProxyType(dict(_PAULI_TABLES[kind]))

    circuit, expansion = gadget_circuit(kind)
    axis, angle = kind.rotation
    out = expansion.output_wire
    rng = np.random.default_rng(TABLE_SEED)
    table: dict[tuple[int, ...], Pauli] = {}
    for _ in range(TABLE_TRIALS):
        psi = random_state(rng, expansion.data)
        target = apply(Rotation(axis, angle, expansion.data), psi).renamed({expansion.data: out})
        for branch in measure_all_branches(circuit, {expansion.data: psi}):
            key = tuple(branch.outcomes[q] for q in expansion.measured)
            fits = [
                p for p in Pauli if equal_up_to_phase(apply_pauli(branch.state, out, p), target)
            ]
            if len(fits) != 1 or table.setdefault(key, fits[0]) is not fits[0]:
                raise GadgetError(
                    f"{kind.value} gadget: outcomes {_key_str(key)} admit no single Pauli correction"
                )
    expected = 1 << len(expansion.measured)
    if len(table) != expected:
        raise GadgetError(f"{kind.value} gadget: {len(table)} of {expected} branches observed")
    logger.debug("derived %s correction table (%d entries)", kind.value, len(table))
    return MappingProxyType(dict(sorted(table.items())))


def gadget_tables_json() -> dict:
    """Every derived table, keyed by kind then outcome bit-string."""
    return {
        "version": 1,
        "tables": {
            kind.value: {_key_str(k): p.value for k, p in derive_correction_table(kind).items()}
            for kind in GadgetKind
        },
    }
