"""
Circuit intermediate representation.

One IR serves both sides of the lowering: the Clifford+T input (gates and
rotations) and the ICM output (initialisations, CNOTs and measurements).
All values are frozen; a ``Circuit`` validates itself on construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Union

import numpy as np

from .constants import SUPPORTED_ROTATIONS
from .errors import (
    ControllerNotMeasured,
    DuplicateQubit,
    InvalidOperation,
    UnknownQubit,
    UseAfterMeasure,
)

QubitId = str


class InitState(Enum):
    ZERO = "0"
    PLUS = "+"
    A = "A"
    Y = "Y"

    @property
    def ket(self) -> str:
        return f"|{self.value}>"

    @property
    def is_magic(self) -> bool:
        return self in (InitState.A, InitState.Y)


class MeasurementBasis(Enum):
    Z = "Z"
    X = "X"


class GateKind(Enum):
    H = "h"
    S = "s"
    V = "v"
    T = "t"


class Axis(Enum):
    X = "x"
    Z = "z"


# --------------------------------------------------------------
# Operations
@dataclass(frozen=True)
class Init:
    qubit: QubitId
    state: InitState

    @property
    def qubits(self) -> tuple[QubitId, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubit: QubitId

    @property
    def qubits(self) -> tuple[QubitId, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class Rotation:
    """Rotation about ``axis`` by ``angle``·π (angle kept as an exact fraction)."""

    axis: Axis
    angle: Fraction
    qubit: QubitId

    @property
    def qubits(self) -> tuple[QubitId, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class Cnot:
    control: QubitId
    target: QubitId

    @property
    def qubits(self) -> tuple[QubitId, ...]:
        return (self.control, self.target)


@dataclass(frozen=True)
class Measure:
    qubit: QubitId
    basis: MeasurementBasis

    @property
    def qubits(self) -> tuple[QubitId, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class SelectiveMeasure:
    """Measurement whose basis is picked by an earlier outcome bit of ``controller``."""

    qubit: QubitId
    controller: QubitId
    basis_if_zero: MeasurementBasis
    basis_if_one: MeasurementBasis

    @property
    def qubits(self) -> tuple[QubitId, ...]:
        return (self.qubit,)

    def basis_for(self, bit: int) -> MeasurementBasis:
        return self.basis_if_one if bit else self.basis_if_zero


Operation = Union[Init, Gate, Rotation, Cnot, Measure, SelectiveMeasure]
ICM_OPS = (Init, Cnot, Measure, SelectiveMeasure)
MEASUREMENTS = (Measure, SelectiveMeasure)


def reduce_angle(angle: Fraction) -> Fraction:
    """Map an angle (in units of π) into (-1, 1]."""
    reduced = Fraction(angle) % 2
    return reduced - 2 if reduced > 1 else reduced


# --------------------------------------------------------------
# Circuit
@dataclass(frozen=True)
class Circuit:
    qubits: tuple[QubitId, ...] = ()
    ops: tuple[Operation, ...] = ()
    inputs: frozenset[QubitId] = field(default_factory=frozenset)
    outputs: frozenset[QubitId] = field(default_factory=frozenset)
    episodic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        object.__setattr__(self, "outputs", frozenset(self.outputs))
        _validate(self)

    # ----------------------------------------------------------
    @property
    def ordered_inputs(self) -> list[QubitId]:
        return [q for q in self.qubits if q in self.inputs]

    @property
    def ordered_outputs(self) -> list[QubitId]:
        return [q for q in self.qubits if q in self.outputs]

    def count(self, *kinds: type) -> int:
        return sum(1 for op in self.ops if isinstance(op, kinds))

    def init_counts(self) -> dict[str, int]:
        counts = {state.name: 0 for state in InitState}
        for op in self.ops:
            if isinstance(op, Init):
                counts[op.state.name] += 1
        return counts

    def live_at_end(self) -> list[QubitId]:
        """Qubits that hold a state after the last op, in declaration order."""
        live = set(self.inputs)
        for op in self.ops:
            if isinstance(op, Init):
                live.add(op.qubit)
            elif isinstance(op, MEASUREMENTS):
                live.discard(op.qubit)
        return [q for q in self.qubits if q in live]


def is_icm(c: Circuit) -> bool:
    """True iff the circuit only initialises, entangles with CNOTs and measures."""
    return all(isinstance(op, ICM_OPS) for op in c.ops)


# --------------------------------------------------------------
# Validation
_FRESH, _LIVE, _MEASURED = "fresh", "live", "measured"


def _validate(c: Circuit) -> None:
    seen: set[QubitId] = set()
    for q in c.qubits:
        if not q:
            raise InvalidOperation("empty qubit name")
        if q in seen:
            raise DuplicateQubit(f"qubit {q!r} declared twice")
        seen.add(q)

    for group, label in ((c.inputs, "input"), (c.outputs, "output")):
        for q in sorted(group - seen):
            raise UnknownQubit(f"{label} {q!r} is not a declared qubit")

    state = {q: (_LIVE if q in c.inputs else _FRESH) for q in c.qubits}
    last_plain_measure: dict[QubitId, bool] = {}

    def require_live(q: QubitId, i: int) -> None:
        if q not in state:
            raise UnknownQubit(f"unknown qubit {q!r}", op_index=i)
        if state[q] == _MEASURED:
            raise UseAfterMeasure(f"qubit {q!r} used after measurement", op_index=i)
        if state[q] == _FRESH:
            raise InvalidOperation(f"qubit {q!r} used before initialisation", op_index=i)

    for i, op in enumerate(c.ops):
        if isinstance(op, Init):
            if op.qubit not in state:
                raise UnknownQubit(f"unknown qubit {op.qubit!r}", op_index=i)
            current = state[op.qubit]
            if current == _LIVE:
                raise InvalidOperation(f"qubit {op.qubit!r} initialised twice", op_index=i)
            if current == _MEASURED and not c.episodic:
                raise UseAfterMeasure(
                    f"qubit {op.qubit!r} re-initialised after measurement", op_index=i
                )
            state[op.qubit] = _LIVE
        elif isinstance(op, Cnot):
            require_live(op.control, i)
            require_live(op.target, i)
            if op.control == op.target:
                raise InvalidOperation("cnot control equals target", op_index=i)
        elif isinstance(op, (Gate, Rotation)):
            require_live(op.qubit, i)
        elif isinstance(op, Measure):
            require_live(op.qubit, i)
            state[op.qubit] = _MEASURED
            last_plain_measure[op.qubit] = True
        elif isinstance(op, SelectiveMeasure):
            require_live(op.qubit, i)
            if op.controller not in state:
                raise UnknownQubit(f"unknown controller {op.controller!r}", op_index=i)
            if not last_plain_measure.get(op.controller) or state[op.controller] == _LIVE:
                raise ControllerNotMeasured(
                    f"controller {op.controller!r} has no earlier plain measurement",
                    op_index=i,
                )
            state[op.qubit] = _MEASURED
            last_plain_measure[op.qubit] = False
        else:
            raise InvalidOperation(f"unknown operation {op!r}", op_index=i)

    for q in sorted(c.outputs):
        if state[q] != _LIVE:
            raise InvalidOperation(f"output {q!r} is not live at the end of the circuit")


# --------------------------------------------------------------
# Fuzzing helpers shared by the test-suite and the verifier
def random_state_circuit(
    rng: np.random.Generator,
    n_qubits: int,
    n_ops: int,
    *,
    measure_fraction: float = 0.3,
) -> Circuit:
    """Random Clifford+T circuit over inputs/inits with gates, rotations and CNOTs."""
    qubits = [f"q{i}" for i in range(n_qubits)]
    inputs = {q for q in qubits if rng.random() < 0.5}
    states = list(InitState)
    kinds = list(GateKind)
    ops: list[Operation] = []
    for q in qubits:
        if q not in inputs:
            ops.append(Init(q, states[rng.integers(len(states))]))
    rotations = sorted(SUPPORTED_ROTATIONS)
    for _ in range(n_ops):
        roll = rng.random()
        if n_qubits > 1 and roll < 0.35:
            a, b = rng.choice(n_qubits, size=2, replace=False)
            ops.append(Cnot(qubits[a], qubits[b]))
        elif roll < 0.7:
            ops.append(Gate(kinds[rng.integers(len(kinds))], qubits[rng.integers(n_qubits)]))
        else:
            axis, angle = rotations[rng.integers(len(rotations))]
            ops.append(Rotation(Axis(axis), angle, qubits[rng.integers(n_qubits)]))
    measured = [q for q in qubits if rng.random() < measure_fraction]
    for q in measured:
        ops.append(Measure(q, MeasurementBasis.Z if rng.random() < 0.5 else MeasurementBasis.X))
    outputs = [q for q in qubits if q not in measured]
    return Circuit(tuple(qubits), tuple(ops), frozenset(inputs), frozenset(outputs))


def random_icm_circuit(
    rng: np.random.Generator,
    n_qubits: int,
    n_steps: int,
    *,
    selective: bool = True,
    inputs: Optional[Iterable[QubitId]] = None,
) -> Circuit:
    """Random ICM circuit whose qubits are born and measured at staggered times."""
    qubits = [f"q{i}" for i in range(n_qubits)]
    input_set = set(inputs) if inputs is not None else ({qubits[0]} if n_qubits else set())
    fresh = [q for q in qubits if q not in input_set]
    live = [q for q in qubits if q in input_set]
    plain_measured: list[QubitId] = []
    ops: list[Operation] = []
    states = list(InitState)
    bases = list(MeasurementBasis)

    for _ in range(n_steps):
        roll = rng.random()
        if fresh and (roll < 0.3 or not live):
            q = fresh.pop(0)
            ops.append(Init(q, states[rng.integers(len(states))]))
            live.append(q)
        elif len(live) >= 2 and roll < 0.75:
            a, b = rng.choice(len(live), size=2, replace=False)
            ops.append(Cnot(live[a], live[b]))
        elif len(live) >= 2:
            q = live.pop(int(rng.integers(len(live))))
            if selective and plain_measured and rng.random() < 0.4:
                ctrl = plain_measured[int(rng.integers(len(plain_measured)))]
                ops.append(
                    SelectiveMeasure(
                        q, ctrl, bases[rng.integers(2)], bases[rng.integers(2)]
                    )
                )
            else:
                ops.append(Measure(q, bases[rng.integers(2)]))
                plain_measured.append(q)
    declared = [q for q in qubits if q in input_set or any(q in op.qubits for op in ops)]
    return Circuit(
        tuple(declared),
        tuple(ops),
        frozenset(input_set),
        frozenset(live),
    )
