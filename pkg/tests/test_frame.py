from fractions import Fraction

import numpy as np
import pytest

from forge.circuit import (
    Axis,
    Circuit,
    Cnot,
    Init,
    InitState,
    Measure,
    MeasurementBasis,
    Rotation,
    random_icm_circuit,
)
from forge.constants import FIDELITY_TOL
from forge.errors import FrameError
from forge.frame import FrameTracker, Pauli, PauliFrame, correct_outcome, propagate_frame
from forge.gadgets import CorrectionRule, GadgetKind, derive_correction_table
from forge.oracle import (
    apply_frame,
    apply_pauli,
    equal_up_to_phase,
    measure_all_branches,
    random_state,
)

Z, X = MeasurementBasis.Z, MeasurementBasis.X


class TestPauli:
    def test_product_up_to_phase(self):
        assert Pauli.X * Pauli.Z is Pauli.XZ
        assert Pauli.XZ * Pauli.X is Pauli.Z
        assert Pauli.Z * Pauli.Z is Pauli.I

    def test_bits(self):
        assert Pauli.from_bits(1, 1) is Pauli.XZ
        assert Pauli.Z.bits == (0, 1)


class TestPropagation:
    def test_cnot_copies_x_forward_and_z_backward(self):
        frame = PauliFrame({"c": Pauli.X, "t": Pauli.Z})
        out = propagate_frame(frame, Cnot("c", "t"))
        assert out.get("c") is Pauli.XZ
        assert out.get("t") is Pauli.XZ

    def test_cnot_leaves_clean_wires(self):
        frame = PauliFrame({"c": Pauli.Z, "t": Pauli.X})
        out = propagate_frame(frame, Cnot("c", "t"))
        assert out == frame

    def test_measure_retires_and_init_resets(self):
        frame = PauliFrame({"q": Pauli.X})
        assert "q" not in propagate_frame(frame, Measure("q", Z))
        assert propagate_frame(PauliFrame(), Init("a", InitState.A)).get("a") is Pauli.I
        assert "a" in propagate_frame(PauliFrame(), Init("a", InitState.A))

    def test_pauli_rotation_is_transparent(self):
        frame = PauliFrame({"q": Pauli.X})
        assert propagate_frame(frame, Rotation(Axis.Z, Fraction(1), "q")) == frame

    def test_non_clifford_is_rejected(self):
        with pytest.raises(FrameError):
            propagate_frame(PauliFrame({"q": Pauli.X}), Rotation(Axis.Z, Fraction(1, 4), "q"))

    @pytest.mark.parametrize(
        "pauli, basis, raw, expected",
        [
            (Pauli.X, Z, 0, 1),
            (Pauli.X, X, 0, 0),
            (Pauli.Z, X, 1, 0),
            (Pauli.Z, Z, 1, 1),
            (Pauli.XZ, Z, 1, 0),
        ],
    )
    def test_correct_outcome(self, pauli, basis, raw, expected):
        assert correct_outcome(PauliFrame({"q": pauli}), "q", basis, raw) == expected


class TestTracker:
    def s_rule(self, anchor=2):
        table = derive_correction_table(GadgetKind.S)
        return CorrectionRule("g0", GadgetKind.S, "q", ("anc0",), table, anchor)

    def test_rule_fires_at_anchor(self):
        tracker = FrameTracker([self.s_rule()], inputs={"q"})
        tracker.step(0, Init("anc0", InitState.Y))
        tracker.step(1, Cnot("q", "anc0"))
        assert tracker.applied == []
        tracker.step(2, Measure("anc0", Z), Z, 1)
        assert tracker.applied == [("g0", Pauli.Z)]
        assert tracker.frame.get("q") is Pauli.Z

    def test_outcome_is_corrected_before_rule(self):
        tracker = FrameTracker([self.s_rule()], inputs={"q"})
        tracker.step(0, Init("anc0", InitState.Y))
        tracker.frame = tracker.frame.with_pauli("q", Pauli.X)
        tracker.step(1, Cnot("q", "anc0"))
        # the X on q was copied onto the ancilla and flips its Z outcome
        assert tracker.step(2, Measure("anc0", Z), Z, 0) == 1
        assert tracker.raw == {"anc0": 0}

    def test_missing_outcome(self):
        tracker = FrameTracker([self.s_rule(anchor=0)], inputs={"q"})
        with pytest.raises(FrameError):
            tracker.step(0, Init("anc0", InitState.Y))

    def test_measurement_needs_outcome(self):
        tracker = FrameTracker(inputs={"q"})
        with pytest.raises(FrameError):
            tracker.step(0, Measure("q", Z))

    def test_fork_is_independent(self):
        tracker = FrameTracker(inputs={"q"})
        twin = tracker.fork()
        twin.step(0, Measure("q", Z), Z, 1)
        assert tracker.corrected == {}
        assert "q" in tracker.frame


def _key(outcomes):
    return tuple(sorted(outcomes.items()))


def test_deferred_frame_matches_inline_correction():
    rng = np.random.default_rng(2024)
    paulis = list(Pauli)
    for trial in range(200):
        n = int(rng.integers(2, 7))
        inputs = [f"q{i}" for i in range(int(rng.integers(1, 3)))]
        c = random_icm_circuit(rng, n, int(rng.integers(3, 14)), inputs=inputs)
        states = {q: random_state(rng, q) for q in c.ordered_inputs}
        pending = {q: paulis[rng.integers(4)] for q in c.ordered_inputs}

        inline_inputs = {q: apply_pauli(s, q, pending[q]) for q, s in states.items()}
        inline = {_key(b.outcomes): b for b in measure_all_branches(c, inline_inputs)}

        tracker = FrameTracker(inputs=c.inputs)
        for q, p in pending.items():
            tracker.frame = tracker.frame.with_pauli(q, p)
        deferred = measure_all_branches(c, states, ledger=tracker)

        totals = {}
        for b in deferred:
            key = _key(b.outcomes)
            totals[key] = totals.get(key, 0.0) + b.probability
            twin = inline[key]
            assert equal_up_to_phase(apply_frame(b.state, b.ledger.frame), twin.state), trial
        for key, b in inline.items():
            assert abs(totals.get(key, 0.0) - b.probability) < FIDELITY_TOL, trial
