"""
Dense state-vector oracle.

The ground truth every other stage is checked against. Amplitudes are stored
little-endian: ``qubit_order[k]`` is bit ``k`` of the amplitude index, which
puts it on tensor axis ``n - 1 - k`` once the vector is reshaped to
``(2,) * n``. Measured qubits are projected out, so a state only ever holds
live qubits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import pi, sqrt
from typing import Dict, Iterable, List, Mapping, Optional, Protocol, Sequence

import numpy as np

from .circuit import (
    Axis,
    Circuit,
    Cnot,
    Gate,
    GateKind,
    Init,
    InitState,
    Measure,
    MeasurementBasis,
    Operation,
    QubitId,
    Rotation,
    SelectiveMeasure,
)
from .constants import (
    ALGEBRA_TOL,
    DEFAULT_MAX_BRANCHES,
    FIDELITY_TOL,
    MAX_ORACLE_QUBITS,
    NORM_TOL,
    ZERO_PROBABILITY,
)
from .errors import (
    CapacityExceeded,
    DimensionMismatch,
    NotUnitary,
    OracleError,
    UnknownQubit,
    ZeroProbabilityOnly,
)
from .frame import Pauli, PauliFrame

logger = logging.getLogger(__name__)

_SQRT2_INV = 1 / sqrt(2)
_KETS = {
    InitState.ZERO: np.array([1, 0], dtype=complex),
    InitState.PLUS: np.array([1, 1], dtype=complex) * _SQRT2_INV,
    InitState.Y: np.array([1, 1j], dtype=complex) * _SQRT2_INV,
    InitState.A: np.array([1, np.exp(1j * pi / 4)], dtype=complex) * _SQRT2_INV,
}
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV
_PAULI_MATRICES = {
    Pauli.I: np.eye(2, dtype=complex),
    Pauli.X: np.array([[0, 1], [1, 0]], dtype=complex),
    Pauli.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    Pauli.XZ: np.array([[0, -1], [1, 0]], dtype=complex),
}


def rz_matrix(angle: Fraction) -> np.ndarray:
    """diag(1, e^{i angle pi})."""
    return np.array([[1, 0], [0, np.exp(1j * pi * float(angle))]], dtype=complex)


def rx_matrix(angle: Fraction) -> np.ndarray:
    half = pi * float(angle) / 2
    c, s = np.cos(half), np.sin(half)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


_GATE_MATRICES = {
    GateKind.H: _HADAMARD,
    GateKind.S: rz_matrix(Fraction(1, 2)),
    GateKind.V: rx_matrix(Fraction(1, 2)),
    GateKind.T: rz_matrix(Fraction(1, 4)),
}


def gate_matrix(op: Operation) -> np.ndarray:
    """2x2 unitary of a single-qubit Gate or Rotation."""
    if isinstance(op, Gate):
        return _GATE_MATRICES[op.kind]
    if isinstance(op, Rotation):
        return rz_matrix(op.angle) if op.axis is Axis.Z else rx_matrix(op.angle)
    raise NotUnitary(f"{op!r} is not a single-qubit unitary")


# --------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class StateVector:
    """
    Immutable normalised pure state.

    Attributes
    ----------
    amplitudes : np.ndarray
        Complex vector of length ``2 ** len(qubit_order)`` (read-only).
    qubit_order : tuple[QubitId, ...]
        ``qubit_order[k]`` is bit ``k`` of the amplitude index.
    """

    amplitudes: np.ndarray
    qubit_order: tuple[QubitId, ...] = ()

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        order = tuple(self.qubit_order)
        if len(set(order)) != len(order):
            raise OracleError(f"duplicate qubit in order {order}")
        if amps.size != 1 << len(order):
            raise DimensionMismatch(
                f"{amps.size} amplitudes do not fit {len(order)} qubit(s)"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1) > NORM_TOL:
            raise OracleError(f"state is not normalised (norm^2 = {norm:.15f})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "qubit_order", order)

    @property
    def n_qubits(self) -> int:
        return len(self.qubit_order)

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def axis(self, q: QubitId) -> int:
        try:
            k = self.qubit_order.index(q)
        except ValueError:
            raise UnknownQubit(f"qubit {q!r} is not in the state") from None
        return self.n_qubits - 1 - k

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def renamed(self, mapping: Mapping[QubitId, QubitId]) -> "StateVector":
        return StateVector(self.amplitudes, tuple(mapping.get(q, q) for q in self.qubit_order))

    def reordered(self, order: Sequence[QubitId]) -> "StateVector":
        order = tuple(order)
        if sorted(order) != sorted(self.qubit_order):
            raise DimensionMismatch(f"cannot reorder {self.qubit_order} into {order}")
        n = len(order)
        if n == 0 or order == self.qubit_order:
            return self
        perm = [self.axis(order[n - 1 - j]) for j in range(n)]
        return StateVector(np.transpose(self.tensor(), perm).reshape(-1), order)

    def with_qubit(self, q: QubitId, ket: "StateVector") -> "StateVector":
        """Tensor a fresh single-qubit state in as the new highest bit."""
        if q in self.qubit_order:
            raise OracleError(f"qubit {q!r} is already live")
        if ket.n_qubits != 1:
            raise DimensionMismatch("a qubit is initialised from a 1-qubit state")
        if self.n_qubits + 1 > MAX_ORACLE_QUBITS:
            raise CapacityExceeded(
                f"oracle is limited to {MAX_ORACLE_QUBITS} live qubits"
            )
        return StateVector(np.kron(ket.amplitudes, self.amplitudes), self.qubit_order + (q,))


EMPTY_STATE = StateVector(np.array([1], dtype=complex), ())


def init_state(kind: InitState, qubit: QubitId = "q") -> StateVector:
    return StateVector(_KETS[kind], (qubit,))


def random_state(rng: np.random.Generator, qubit: QubitId = "q") -> StateVector:
    """Haar-random single-qubit state."""
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return StateVector(v / np.linalg.norm(v), (qubit,))


def product_state(states: Mapping[QubitId, StateVector]) -> StateVector:
    out = EMPTY_STATE
    for q, ket in states.items():
        out = out.with_qubit(q, ket)
    return out


# --------------------------------------------------------------
# Unitaries
def apply_matrix(s: StateVector, matrix: np.ndarray, qubit: QubitId) -> StateVector:
    axis = s.axis(qubit)
    t = np.tensordot(matrix, s.tensor(), axes=([1], [axis]))
    return StateVector(np.moveaxis(t, 0, axis).reshape(-1), s.qubit_order)


def apply_cnot(s: StateVector, control: QubitId, target: QubitId) -> StateVector:
    if control == target:
        raise OracleError("cnot control equals target")
    ac, at = s.axis(control), s.axis(target)
    t = s.tensor().copy()
    idx = [slice(None)] * s.n_qubits
    idx[ac] = 1
    sub_axis = at - 1 if at > ac else at
    t[tuple(idx)] = np.flip(t[tuple(idx)], axis=sub_axis)
    return StateVector(t.reshape(-1), s.qubit_order)


def apply_pauli(s: StateVector, qubit: QubitId, pauli: Pauli) -> StateVector:
    if pauli is Pauli.I:
        return s
    return apply_matrix(s, _PAULI_MATRICES[pauli], qubit)


def apply_frame(s: StateVector, frame: PauliFrame) -> StateVector:
    """Execute every pending correction of ``frame`` on the live qubits of ``s``."""
    for q, pauli in frame.items():
        if q in s.qubit_order:
            s = apply_pauli(s, q, pauli)
    return s


def apply(c_op: Operation, s: StateVector) -> StateVector:
    """Apply a unitary operation (Gate, Rotation or Cnot)."""
    if isinstance(c_op, Cnot):
        return apply_cnot(s, c_op.control, c_op.target)
    if isinstance(c_op, (Gate, Rotation)):
        return apply_matrix(s, gate_matrix(c_op), c_op.qubit)
    raise NotUnitary(f"{c_op!r} is not unitary")


# --------------------------------------------------------------
# Measurement
def project(
    s: StateVector, qubit: QubitId, basis: MeasurementBasis, bit: int
) -> tuple[float, Optional[StateVector]]:
    """Probability of ``bit`` and the renormalised state with ``qubit`` removed.

    Bit 0 is the +1 eigenstate (|0> for Z, |+> for X).
    """
    if basis is MeasurementBasis.X:
        s = apply_matrix(s, _HADAMARD, qubit)
    axis = s.axis(qubit)
    sub = np.take(s.tensor(), bit, axis=axis)
    probability = float(np.vdot(sub, sub).real)
    if probability < ZERO_PROBABILITY:
        return probability, None
    order = tuple(q for q in s.qubit_order if q != qubit)
    return probability, StateVector(sub.reshape(-1) / sqrt(probability), order)


class OutcomeLedger(Protocol):
    """Classical side-channel consulted while branches are enumerated."""

    def fork(self) -> "OutcomeLedger": ...

    def selective_basis(self, op: SelectiveMeasure) -> MeasurementBasis: ...

    def step(
        self,
        index: int,
        op: Operation,
        basis: Optional[MeasurementBasis] = None,
        bit: Optional[int] = None,
    ) -> Optional[int]: ...


@dataclass(frozen=True)
class Branch:
    """
    One measurement history of a circuit.

    ``outcomes`` holds the latest bit per measured qubit (raw, or corrected
    when a ledger is attached); ``trace`` records every measurement as
    ``(op_index, qubit, basis, raw_bit)``.
    """

    outcomes: Dict[QubitId, int]
    probability: float
    state: StateVector
    trace: tuple[tuple[int, QubitId, MeasurementBasis, int], ...] = ()
    ledger: Optional[OutcomeLedger] = field(default=None, compare=False)

    @property
    def key(self) -> str:
        return "".join(str(bit) for _, _, _, bit in self.trace)


@dataclass
class _Pending:
    index: int
    state: StateVector
    probability: float
    outcomes: Dict[QubitId, int]
    trace: List[tuple[int, QubitId, MeasurementBasis, int]]
    ledger: Optional[OutcomeLedger]


def measure_all_branches(
    c: Circuit,
    inputs: Optional[Mapping[QubitId, StateVector]] = None,
    *,
    ledger: Optional[OutcomeLedger] = None,
    max_branches: int = DEFAULT_MAX_BRANCHES,
) -> list[Branch]:
    """
    Depth-first enumeration of every measurement history with nonzero weight.

    Parameters
    ----------
    c : Circuit
        Any valid circuit; selective bases are resolved per branch.
    inputs : Mapping[QubitId, StateVector], optional
        One single-qubit state per declared circuit input.
    ledger : OutcomeLedger, optional
        When given (a ``FrameTracker``), every op is reported to it, selective
        bases come from it and ``Branch.outcomes`` holds its corrected bits.
    max_branches : int
        Enumeration aborts with ``CapacityExceeded`` beyond this many
        branches.
    """
    inputs = dict(inputs or {})
    missing = [q for q in c.ordered_inputs if q not in inputs]
    if missing:
        raise OracleError(f"no input state for {', '.join(missing)}")
    start = product_state({q: inputs[q] for q in c.ordered_inputs})

    stack = [_Pending(0, start, 1.0, {}, [], ledger.fork() if ledger else None)]
    finished: list[Branch] = []
    while stack:
        item = stack.pop()
        while item is not None and item.index < len(c.ops):
            i, op = item.index, c.ops[item.index]
            if isinstance(op, (Measure, SelectiveMeasure)):
                if isinstance(op, Measure):
                    basis = op.basis
                elif item.ledger is not None:
                    basis = item.ledger.selective_basis(op)
                else:
                    basis = op.basis_for(item.outcomes[op.controller])
                children = []
                for bit in (0, 1):
                    p, post = project(item.state, op.qubit, basis, bit)
                    if post is None:
                        continue
                    child_ledger = item.ledger.fork() if item.ledger is not None else None
                    seen = bit
                    if child_ledger is not None:
                        seen = child_ledger.step(i, op, basis, bit)
                    children.append(
                        _Pending(
                            i + 1,
                            post,
                            item.probability * p,
                            {**item.outcomes, op.qubit: seen},
                            item.trace + [(i, op.qubit, basis, bit)],
                            child_ledger,
                        )
                    )
                if not children:
                    item = None
                    break
                stack.extend(reversed(children[1:]))
                item = children[0]
                if len(stack) + len(finished) > max_branches:
                    raise CapacityExceeded(
                        f"more than {max_branches} measurement branches"
                    )
                continue
            if isinstance(op, Init):
                item.state = item.state.with_qubit(op.qubit, init_state(op.state, op.qubit))
            else:
                item.state = apply(op, item.state)
            if item.ledger is not None:
                item.ledger.step(i, op)
            item.index += 1
        if item is None or item.probability < ZERO_PROBABILITY:
            continue
        finished.append(
            Branch(item.outcomes, item.probability, item.state, tuple(item.trace), item.ledger)
        )

    if not finished:
        raise ZeroProbabilityOnly("every measurement branch has zero probability")
    total = sum(b.probability for b in finished)
    if abs(total - 1) > FIDELITY_TOL:
        logger.warning("branch probabilities sum to %.12f", total)
    logger.debug("enumerated %d branch(es) over %d op(s)", len(finished), len(c.ops))
    return finished


def run_unitary(c: Circuit, inputs: Optional[Mapping[QubitId, StateVector]] = None) -> StateVector:
    """Final state of a measurement-free circuit."""
    branches = measure_all_branches(c, inputs)
    if len(branches) != 1 or branches[0].trace:
        raise OracleError("run_unitary needs a circuit without measurements")
    return branches[0].state


# --------------------------------------------------------------
def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>| after aligning ``b`` to ``a``'s qubit order."""
    if a.n_qubits != b.n_qubits:
        raise DimensionMismatch(f"{a.n_qubits} vs {b.n_qubits} qubit(s)")
    b = b.reordered(a.qubit_order)
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))


def equal_up_to_phase(a: StateVector, b: StateVector, tol: float = FIDELITY_TOL) -> bool:
    return fidelity(a, b) >= 1 - tol


def is_unitary(matrix: np.ndarray, tol: float = ALGEBRA_TOL) -> bool:
    m = np.asarray(matrix)
    return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=tol))


def branch_table_json(branches: Iterable[Branch]) -> list[dict]:
    """Serialisable view of an enumeration, one entry per branch."""
    table = []
    for b in branches:
        table.append(
            {
                "key": b.key,
                "outcomes": {q: b.outcomes[q] for q in sorted(b.outcomes)},
                "probability": round(b.probability, 12),
                "trace": [
                    {"op": i, "qubit": q, "basis": basis.value, "bit": bit}
                    for i, q, basis, bit in b.trace
                ],
                "qubits": list(b.state.qubit_order),
                "amplitudes": [
                    [round(float(z.real), 12), round(float(z.imag), 12)]
                    for z in b.state.amplitudes
                ],
            }
        )
    return table
