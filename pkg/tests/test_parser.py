from fractions import Fraction

import pytest

from forge.circuit import Axis, GateKind, InitState, MeasurementBasis, Rotation, SelectiveMeasure
from forge.errors import CircuitSyntaxError, DuplicateQubit, UnknownQubit, UseAfterMeasure
from forge.parser import format_op, parse_circuit, print_circuit


class TestParse:
    def test_t_gadget_fixture(self, db_dir):
        c = parse_circuit((db_dir / "t_gadget.qc").read_text())
        assert c.qubits == ("q", "a1", "a2", "a3", "a4", "a5")
        assert c.inputs == {"q"}
        assert c.outputs == {"a5"}
        first = c.ops[12]
        assert isinstance(first, SelectiveMeasure)
        assert (first.controller, first.basis_if_zero, first.basis_if_one) == (
            "q",
            MeasurementBasis.X,
            MeasurementBasis.Z,
        )

    def test_comments_and_blank_lines(self):
        c = parse_circuit("# header\n\ninput q   # data\nt q\n\noutput q\n")
        assert len(c.ops) == 1
        assert c.ops[0].kind is GateKind.T

    @pytest.mark.parametrize(
        "token, angle",
        [("1/4pi", Fraction(1, 4)), ("-1/2pi", Fraction(-1, 2)), ("1pi", Fraction(1)), ("3/4pi", Fraction(3, 4))],
    )
    def test_angles(self, token, angle):
        c = parse_circuit(f"input q\nrz q {token}\noutput q\n")
        assert c.ops[0] == Rotation(Axis.Z, angle, "q")

    def test_init_states(self):
        c = parse_circuit("qubit a\nqubit b\ninit a |A>\ninit b |+>\noutput a\noutput b\n")
        assert [op.state for op in c.ops] == [InitState.A, InitState.PLUS]

    def test_empty_text(self):
        c = parse_circuit("")
        assert c.qubits == () and c.ops == ()


class TestErrors:
    def test_unknown_statement_is_located(self):
        with pytest.raises(CircuitSyntaxError) as exc:
            parse_circuit("input q\n  frobnicate q\n")
        assert (exc.value.line, exc.value.column) == (2, 3)
        assert str(exc.value).startswith("2:3:")

    def test_unknown_qubit(self):
        with pytest.raises(UnknownQubit) as exc:
            parse_circuit("input q\ncnot q r\n")
        assert exc.value.line == 2
        assert exc.value.column == 8

    def test_duplicate(self):
        with pytest.raises(DuplicateQubit):
            parse_circuit("input q\nqubit q\n")

    def test_bad_angle(self):
        with pytest.raises(CircuitSyntaxError):
            parse_circuit("input q\nrz q pi/4\n")

    def test_wrong_arity(self):
        with pytest.raises(CircuitSyntaxError):
            parse_circuit("input q\nmeasure q\n")

    def test_smeasure_keywords(self):
        with pytest.raises(CircuitSyntaxError):
            parse_circuit("input q\nqubit a\ninit a |0>\nmeasure q Z\nsmeasure a q X Z\n")

    def test_validation_error_gets_source_position(self):
        with pytest.raises(UseAfterMeasure) as exc:
            parse_circuit("input q\nmeasure q Z\nh q\n")
        assert exc.value.line == 3
        assert exc.value.op_index == 1


class TestPrint:
    def test_print_parse_is_stable(self, db_dir):
        for name in ("t_gadget.qc", "bell_measure.qc", "clifford_only.qc", "shared_wire.qc"):
            c = parse_circuit((db_dir / name).read_text())
            text = print_circuit(c)
            again = parse_circuit(text)
            assert again == c
            assert print_circuit(again) == text

    def test_episodic_flag_survives(self):
        src = "episodic\nqubit a\ninit a |0>\nmeasure a Z\ninit a |+>\noutput a\n"
        c = parse_circuit(src)
        assert c.episodic
        assert "episodic" in print_circuit(c).splitlines()

    def test_format_op(self):
        assert format_op(Rotation(Axis.X, Fraction(-1, 2), "q")) == "rx q -1/2pi"
        assert format_op(SelectiveMeasure("a", "q", MeasurementBasis.Z, MeasurementBasis.X)) == (
            "smeasure a ctrl=q zero=Z one=X"
        )
