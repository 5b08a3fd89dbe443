import json
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np
import pytest

from forge.circuit import Axis, Cnot, Init, InitState, Measure, MeasurementBasis, Rotation, SelectiveMeasure
from forge.constants import FIDELITY_TOL, SUPPORTED_ROTATIONS
from forge.errors import GadgetError, QubitNotLive, UnsupportedAngle
from forge.frame import Pauli
from forge.gadgets import (
    AncillaAllocator,
    CorrectionRule,
    GadgetKind,
    derive_correction_table,
    expand_pauli,
    expand_rotation,
    expand_s,
    expand_t,
    expand_v,
    gadget_circuit,
    gadget_tables_json,
)
from forge.oracle import apply, apply_pauli, fidelity, measure_all_branches, random_state

Z, X = MeasurementBasis.Z, MeasurementBasis.X


def check_gadget(kind, trials, seed):
    """Every branch, after its tabled correction, equals the target rotation."""
    circuit, expansion = gadget_circuit(kind)
    table = derive_correction_table(kind)
    axis, angle = kind.rotation
    out = expansion.output_wire
    rng = np.random.default_rng(seed)
    seen = set()
    for _ in range(trials):
        psi = random_state(rng, "q")
        target = apply(Rotation(axis, angle, "q"), psi).renamed({"q": out})
        branches = measure_all_branches(circuit, {"q": psi})
        assert sum(b.probability for b in branches) == pytest.approx(1, abs=FIDELITY_TOL)
        for b in branches:
            key = tuple(b.outcomes[q] for q in expansion.measured)
            seen.add(key)
            corrected = apply_pauli(b.state, out, table[key])
            assert fidelity(corrected, target) >= 1 - FIDELITY_TOL
    return seen


class TestGadgetCorrectness:
    def test_s_gadget_hundred_inputs(self):
        assert check_gadget(GadgetKind.S, 100, seed=1) == {(0,), (1,)}

    @pytest.mark.parametrize("kind", [GadgetKind.S_DAG, GadgetKind.V, GadgetKind.V_DAG])
    def test_quarter_turn_gadgets(self, kind):
        assert len(check_gadget(kind, 30, seed=2)) == 2

    @pytest.mark.parametrize("kind", [GadgetKind.T, GadgetKind.T_DAG])
    def test_t_gadgets_all_32_branches(self, kind):
        assert len(check_gadget(kind, 20, seed=3)) == 32

    def test_t_correction_ignores_data_outcome_for_rotation(self):
        table = derive_correction_table(GadgetKind.T)
        assert {key[0] for key in table} == {0, 1}
        assert table[(0, 0, 0, 0, 0)] is Pauli.I
        assert table[(1, 0, 0, 0, 0)] is Pauli.XZ


class TestStructure:
    def test_s_layout(self):
        e = expand_s("q", AncillaAllocator({"q"}))
        assert e.new_ops == (Init("anc0", InitState.Y), Cnot("q", "anc0"), Measure("anc0", Z))
        assert e.output_wire == "q"
        assert dict(e.correction_rule) == {(0,): Pauli.I, (1,): Pauli.Z}

    def test_v_layout(self):
        e = expand_v("q", AncillaAllocator({"q"}))
        assert e.new_ops == (Init("anc0", InitState.Y), Cnot("anc0", "q"), Measure("anc0", X))
        assert dict(e.correction_rule) == {(0,): Pauli.X, (1,): Pauli.I}

    def test_t_layout(self):
        e = expand_t("q", AncillaAllocator({"q"}))
        inits = [op.state for op in e.new_ops if isinstance(op, Init)]
        assert inits == [InitState.A, InitState.ZERO, InitState.Y, InitState.PLUS, InitState.ZERO]
        assert sum(isinstance(op, Cnot) for op in e.new_ops) == 6
        assert e.measured == ("q", "anc0", "anc1", "anc2", "anc3")
        assert e.output_wire == "anc4"
        selective = [op for op in e.new_ops if isinstance(op, SelectiveMeasure)]
        assert [(op.basis_if_zero, op.basis_if_one) for op in selective] == [(X, Z), (Z, X), (Z, X), (X, Z)]

    def test_t_dagger_swaps_columns(self):
        e = expand_t("q", AncillaAllocator({"q"}), dagger=True)
        selective = [op for op in e.new_ops if isinstance(op, SelectiveMeasure)]
        assert [(op.basis_if_zero, op.basis_if_one) for op in selective] == [(Z, X), (X, Z), (X, Z), (Z, X)]

    def test_pauli_is_frame_only(self):
        e = expand_pauli("q", Axis.Z)
        assert e.new_ops == ()
        assert dict(e.correction_rule) == {(): Pauli.Z}

    def test_dead_qubit(self):
        with pytest.raises(QubitNotLive):
            expand_s("q", live={"r"})

    def test_unsupported_angle(self):
        with pytest.raises(UnsupportedAngle):
            expand_rotation(Rotation(Axis.Z, Fraction(1, 8), "q"))
        with pytest.raises(UnsupportedAngle):
            GadgetKind.for_rotation(Axis.X, Fraction(1, 4))

    def test_gadget_rotations_are_the_supported_set(self):
        assert {(k.rotation[0].value, k.rotation[1]) for k in GadgetKind} == SUPPORTED_ROTATIONS


class TestAllocator:
    def test_skips_taken_names(self):
        assert AncillaAllocator({"anc0", "anc2"}).reserve(3) == ["anc1", "anc3", "anc4"]

    def test_threads_get_distinct_names(self):
        allocator = AncillaAllocator()
        with ThreadPoolExecutor(max_workers=8) as pool:
            batches = list(pool.map(lambda _: allocator.reserve(5), range(16)))
        names = [n for batch in batches for n in batch]
        assert len(set(names)) == 80
        assert sorted(allocator.issued) == sorted(names)


class TestRules:
    def test_dict_round_trip_rederives_table(self):
        e = expand_t("q", AncillaAllocator({"q"}))
        rule = e.rule("g3", 15)
        data = json.loads(json.dumps(rule.to_dict()))
        assert data["table"]["00000"] == "I"
        again = CorrectionRule.from_dict("g3", data)
        assert again == rule

    def test_measured_arity_checked(self):
        data = expand_s("q", AncillaAllocator({"q"})).rule("g0", 2).to_dict()
        data["measured"] = ["anc0", "anc1"]
        with pytest.raises(GadgetError):
            CorrectionRule.from_dict("g0", data)

    def test_tables_match_fixture(self, db_dir):
        with open(db_dir / "gadget_tables.json") as fh:
            fixture = json.load(fh)
        assert gadget_tables_json() == fixture
