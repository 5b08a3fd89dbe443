from fractions import Fraction

import numpy as np
import pytest

from forge.circuit import (
    Axis,
    Circuit,
    Cnot,
    Gate,
    GateKind,
    Init,
    InitState,
    Measure,
    MeasurementBasis,
    Rotation,
    random_state_circuit,
)
from forge.constants import ALGEBRA_TOL, FIDELITY_TOL, MAX_ORACLE_QUBITS, NORM_TOL
from forge.errors import CapacityExceeded, DimensionMismatch, NotUnitary, OracleError
from forge.frame import Pauli
from forge.oracle import (
    StateVector,
    apply,
    apply_pauli,
    branch_table_json,
    equal_up_to_phase,
    init_state,
    is_unitary,
    measure_all_branches,
    product_state,
    random_state,
    rx_matrix,
    rz_matrix,
)

ONE = StateVector(np.array([0, 1], dtype=complex), ("q",))


def plus(q="q"):
    return init_state(InitState.PLUS, q)


class TestStates:
    def test_basis_definitions(self):
        s = 1 / np.sqrt(2)
        assert np.allclose(init_state(InitState.ZERO).amplitudes, [1, 0])
        assert np.allclose(init_state(InitState.PLUS).amplitudes, [s, s])
        assert np.allclose(init_state(InitState.Y).amplitudes, [s, 1j * s])
        assert np.allclose(init_state(InitState.A).amplitudes, [s, s * np.exp(1j * np.pi / 4)])

    def test_magic_states_are_z_rotations_of_plus(self):
        a = apply(Rotation(Axis.Z, Fraction(1, 4), "q"), plus())
        y = apply(Rotation(Axis.Z, Fraction(1, 2), "q"), plus())
        assert equal_up_to_phase(init_state(InitState.A), a)
        assert equal_up_to_phase(init_state(InitState.Y), y)

    def test_little_endian_order(self):
        s = product_state({"a": ONE.renamed({"q": "a"}), "b": init_state(InitState.ZERO, "b")})
        assert s.qubit_order == ("a", "b")
        assert abs(s.amplitudes[1]) == pytest.approx(1)

    def test_rejects_unnormalised(self):
        with pytest.raises(OracleError):
            StateVector(np.array([1, 1], dtype=complex), ("q",))

    def test_norm_drift_below_tolerance_is_accepted(self):
        amps = np.array([np.sqrt(1 + NORM_TOL / 10), 0], dtype=complex)
        assert StateVector(amps, ("q",)).norm() == pytest.approx(1, abs=NORM_TOL)

    def test_norm_drift_above_tolerance_is_rejected(self):
        amps = np.array([np.sqrt(1 + NORM_TOL * 10), 0], dtype=complex)
        with pytest.raises(OracleError, match="not normalised"):
            StateVector(amps, ("q",))

    def test_capacity(self):
        amps = np.zeros(1 << MAX_ORACLE_QUBITS, dtype=complex)
        amps[0] = 1
        big = StateVector(amps, tuple(f"q{i}" for i in range(MAX_ORACLE_QUBITS)))
        with pytest.raises(CapacityExceeded):
            big.with_qubit("extra", init_state(InitState.ZERO, "extra"))


class TestUnitaries:
    def test_rx_pi_flips(self):
        out = apply(Rotation(Axis.X, Fraction(1), "q"), init_state(InitState.ZERO))
        assert equal_up_to_phase(out, ONE)

    def test_cnot_truth_table(self):
        s = product_state({"c": ONE.renamed({"q": "c"}), "t": init_state(InitState.ZERO, "t")})
        out = apply(Cnot("c", "t"), s)
        assert abs(out.amplitudes[3]) == pytest.approx(1)

    def test_t_twice_is_s(self):
        t = Rotation(Axis.Z, Fraction(1, 4), "q")
        assert equal_up_to_phase(apply(t, apply(t, plus())), init_state(InitState.Y))

    def test_matrices_are_unitary(self):
        for angle in (Fraction(1, 4), Fraction(-1, 2), Fraction(1), Fraction(3, 8)):
            assert is_unitary(rz_matrix(angle))
            assert is_unitary(rx_matrix(angle))

    def test_measure_is_not_unitary(self):
        with pytest.raises(NotUnitary):
            apply(Measure("q", MeasurementBasis.Z), plus())

    @pytest.mark.parametrize(
        "kind, repeats, pauli",
        [
            (GateKind.H, 2, Pauli.I),
            (GateKind.S, 2, Pauli.Z),
            (GateKind.T, 4, Pauli.Z),
            (GateKind.V, 2, Pauli.X),
        ],
    )
    def test_gate_identities(self, kind, repeats, pauli, rng):
        for _ in range(10):
            psi = random_state(rng)
            out = psi
            for _ in range(repeats):
                out = apply(Gate(kind, "q"), out)
            assert equal_up_to_phase(out, apply_pauli(psi, "q", pauli))

    def test_norm_preserved_and_cnot_involution(self, rng):
        s = product_state({f"q{i}": random_state(rng, f"q{i}") for i in range(4)})
        out = apply(Cnot("q0", "q2"), s)
        assert abs(out.norm() - 1) < ALGEBRA_TOL
        back = apply(Cnot("q0", "q2"), out)
        assert np.max(np.abs(back.amplitudes - s.amplitudes)) < ALGEBRA_TOL


class TestBranches:
    def test_z_on_zero(self):
        c = Circuit(("q",), (Measure("q", MeasurementBasis.Z),), {"q"})
        branches = measure_all_branches(c, {"q": init_state(InitState.ZERO)})
        assert len(branches) == 1
        assert branches[0].outcomes == {"q": 0}
        assert branches[0].probability == pytest.approx(1)

    def test_x_on_zero(self):
        c = Circuit(("q",), (Measure("q", MeasurementBasis.X),), {"q"})
        branches = measure_all_branches(c, {"q": init_state(InitState.ZERO)})
        assert sorted(b.outcomes["q"] for b in branches) == [0, 1]
        assert all(b.probability == pytest.approx(0.5) for b in branches)

    def test_t_gadget_on_plus(self, load_circuit):
        c = load_circuit("t_gadget.qc")
        branches = measure_all_branches(c, {"q": plus()})
        assert len(branches) == 32
        assert sum(b.probability for b in branches) == pytest.approx(1, abs=FIDELITY_TOL)
        target = init_state(InitState.A, "a5")
        for b in branches:
            assert b.state.qubit_order == ("a5",)
            assert any(equal_up_to_phase(apply_pauli(b.state, "a5", p), target) for p in Pauli)

    def test_fuzzed_probabilities_sum_to_one(self):
        rng = np.random.default_rng(99)
        for _ in range(25):
            n = int(rng.integers(1, 9))
            c = random_state_circuit(rng, n, 10, measure_fraction=0.5)
            inputs = {q: random_state(rng, q) for q in c.ordered_inputs}
            total = sum(b.probability for b in measure_all_branches(c, inputs))
            assert abs(total - 1) < FIDELITY_TOL

    def test_branch_cap(self):
        qubits = tuple(f"q{i}" for i in range(4))
        ops = tuple(Init(q, InitState.ZERO) for q in qubits) + tuple(
            Measure(q, MeasurementBasis.X) for q in qubits
        )
        with pytest.raises(CapacityExceeded):
            measure_all_branches(Circuit(qubits, ops), max_branches=3)

    def test_branch_table_json(self):
        c = Circuit(("q",), (Measure("q", MeasurementBasis.X),), {"q"})
        table = branch_table_json(measure_all_branches(c, {"q": init_state(InitState.ZERO)}))
        assert sorted(row["key"] for row in table) == ["0", "1"]
        assert table[0]["trace"][0]["basis"] == "X"
        assert table[0]["amplitudes"] == [[1.0, 0.0]]


class TestEquality:
    def test_global_phase(self):
        a = init_state(InitState.ZERO)
        b = StateVector(a.amplitudes * np.exp(1j * np.pi / 3), ("q",))
        assert equal_up_to_phase(a, b, 1e-10)

    def test_orthogonal(self):
        assert not equal_up_to_phase(init_state(InitState.ZERO), ONE, 1e-10)

    def test_dimension_mismatch(self):
        two = product_state({"a": plus("a"), "b": plus("b")})
        with pytest.raises(DimensionMismatch):
            equal_up_to_phase(plus(), two)
