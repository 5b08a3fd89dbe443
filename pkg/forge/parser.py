"""
Line-based ``.qc`` text format.

One statement per line, tokens separated by whitespace, ``#`` starts a
comment. See ``docs/grammar.md`` for the full grammar.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable

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
from .errors import CircuitError, CircuitSyntaxError, DuplicateQubit, UnknownQubit

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_ANGLE = re.compile(r"^(-?\d+)(?:/(\d+))?pi$")
_KETS = {state.ket: state for state in InitState}
_GATES = {kind.value: kind for kind in GateKind}
_ROTATIONS = {"rz": Axis.Z, "rx": Axis.X}
_BASES = {basis.value: basis for basis in MeasurementBasis}


class _Line:
    """Tokens of one source line, each with its 1-based column."""

    def __init__(self, number: int, text: str):
        self.number = number
        self.tokens: list[tuple[str, int]] = [
            (m.group(0), m.start() + 1) for m in re.finditer(r"\S+", text)
        ]

    def fail(self, message: str, position: int = 0, error=CircuitSyntaxError) -> CircuitError:
        column = self.tokens[position][1] if position < len(self.tokens) else 1
        return error(message, line=self.number, column=column)

    def arity(self, expected: int) -> None:
        if len(self.tokens) != expected:
            raise self.fail(
                f"'{self.tokens[0][0]}' takes {expected - 1} argument(s), got {len(self.tokens) - 1}"
            )

    def token(self, position: int) -> str:
        return self.tokens[position][0]


def _parse_angle(line: _Line, position: int) -> Fraction:
    m = _ANGLE.match(line.token(position))
    if not m:
        raise line.fail(f"bad angle {line.token(position)!r}, expected <num>/<den>pi", position)
    den = int(m.group(2) or 1)
    if den == 0:
        raise line.fail("angle denominator is zero", position)
    return Fraction(int(m.group(1)), den)


def _parse_keyed(line: _Line, position: int, key: str) -> str:
    token = line.token(position)
    prefix = f"{key}="
    if not token.startswith(prefix) or len(token) == len(prefix):
        raise line.fail(f"expected {prefix}<value>, got {token!r}", position)
    return token[len(prefix):]


def _parse_basis(line: _Line, position: int, text: str) -> MeasurementBasis:
    if text not in _BASES:
        raise line.fail(f"unknown measurement basis {text!r}", position)
    return _BASES[text]


def parse_circuit(text: str) -> Circuit:
    """Parse and validate ``.qc`` source text."""
    qubits: list[QubitId] = []
    declared: set[QubitId] = set()
    inputs: set[QubitId] = set()
    outputs: set[QubitId] = set()
    ops: list[Operation] = []
    op_lines: list[_Line] = []
    episodic = False

    def declare(line: _Line, as_input: bool) -> None:
        line.arity(2)
        name = line.token(1)
        if not _IDENT.match(name):
            raise line.fail(f"invalid qubit name {name!r}", 1)
        if name in declared:
            raise line.fail(f"qubit {name!r} declared twice", 1, DuplicateQubit)
        declared.add(name)
        qubits.append(name)
        if as_input:
            inputs.add(name)

    def qubit_ref(line: _Line, position: int, text: str | None = None) -> QubitId:
        name = line.token(position) if text is None else text
        if name not in declared:
            raise line.fail(f"unknown qubit {name!r}", position, UnknownQubit)
        return name

    def parse_op(line: _Line) -> Operation:
        keyword = line.token(0)
        if keyword == "init":
            line.arity(3)
            ket = line.token(2)
            if ket not in _KETS:
                raise line.fail(f"unknown initial state {ket!r}", 2)
            return Init(qubit_ref(line, 1), _KETS[ket])
        if keyword in _GATES:
            line.arity(2)
            return Gate(_GATES[keyword], qubit_ref(line, 1))
        if keyword in _ROTATIONS:
            line.arity(3)
            return Rotation(_ROTATIONS[keyword], _parse_angle(line, 2), qubit_ref(line, 1))
        if keyword == "cnot":
            line.arity(3)
            return Cnot(qubit_ref(line, 1), qubit_ref(line, 2))
        if keyword == "measure":
            line.arity(3)
            return Measure(qubit_ref(line, 1), _parse_basis(line, 2, line.token(2)))
        if keyword == "smeasure":
            line.arity(5)
            return SelectiveMeasure(
                qubit_ref(line, 1),
                qubit_ref(line, 2, _parse_keyed(line, 2, "ctrl")),
                _parse_basis(line, 3, _parse_keyed(line, 3, "zero")),
                _parse_basis(line, 4, _parse_keyed(line, 4, "one")),
            )
        raise line.fail(f"unknown statement {keyword!r}")

    handlers: dict[str, Callable[[_Line], None]] = {
        "qubit": lambda line: declare(line, as_input=False),
        "input": lambda line: declare(line, as_input=True),
    }

    for number, raw in enumerate(text.splitlines(), start=1):
        line = _Line(number, raw.split("#", 1)[0])
        if not line.tokens:
            continue
        keyword = line.token(0)
        if keyword in handlers:
            handlers[keyword](line)
        elif keyword == "output":
            line.arity(2)
            outputs.add(qubit_ref(line, 1))
        elif keyword == "episodic":
            line.arity(1)
            episodic = True
        else:
            ops.append(parse_op(line))
            op_lines.append(line)

    try:
        return Circuit(tuple(qubits), tuple(ops), frozenset(inputs), frozenset(outputs), episodic)
    except CircuitError as exc:
        if exc.op_index is not None:
            line = op_lines[exc.op_index]
            raise exc.located(line.number, line.tokens[0][1]) from None
        raise


# --------------------------------------------------------------
def _format_angle(angle: Fraction) -> str:
    if angle.denominator == 1:
        return f"{angle.numerator}pi"
    return f"{angle.numerator}/{angle.denominator}pi"


def format_op(op: Operation) -> str:
    if isinstance(op, Init):
        return f"init {op.qubit} {op.state.ket}"
    if isinstance(op, Gate):
        return f"{op.kind.value} {op.qubit}"
    if isinstance(op, Rotation):
        return f"r{op.axis.value} {op.qubit} {_format_angle(op.angle)}"
    if isinstance(op, Cnot):
        return f"cnot {op.control} {op.target}"
    if isinstance(op, Measure):
        return f"measure {op.qubit} {op.basis.value}"
    if isinstance(op, SelectiveMeasure):
        return (
            f"smeasure {op.qubit} ctrl={op.controller} "
            f"zero={op.basis_if_zero.value} one={op.basis_if_one.value}"
        )
    raise TypeError(f"cannot format {op!r}")


def print_circuit(c: Circuit) -> str:
    """Deterministic text form: declarations, ops in index order, outputs."""
    lines = [
        "# defect-forge circuit",
        f"# qubits: {len(c.qubits)}, ops: {len(c.ops)}",
    ]
    if c.episodic:
        lines.append("episodic")
    for q in c.qubits:
        lines.append(f"{'input' if q in c.inputs else 'qubit'} {q}")
    lines.extend(format_op(op) for op in c.ops)
    lines.extend(f"output {q}" for q in c.ordered_outputs)
    return "\n".join(lines) + "\n"
