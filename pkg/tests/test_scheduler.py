import numpy as np
import pytest

from forge.circuit import Circuit, Cnot, Init, InitState, Measure, MeasurementBasis, random_icm_circuit
from forge import scheduler
from forge.errors import NotIcm, OverlapViolation
from forge.icm import expand_all
from forge.scheduler import (
    Lifetime,
    WireAssignment,
    assign_wires,
    check_assignment,
    compute_lifetimes,
    max_live,
    rewrite_on_wires,
    wire_report,
)
from forge.verify import verify_wire_rewrite


def brute_force_live(lifetimes):
    if not lifetimes:
        return 0
    end = max(lt.death for lt in lifetimes)
    return max(sum(lt.birth <= i < lt.death for lt in lifetimes) for i in range(end + 1))


def random_lifetimes(rng, n):
    # distinct event indices, as produced by distinct ops
    points = rng.permutation(4 * n)[: 2 * n]
    out = []
    for i in range(n):
        a, b = sorted(points[2 * i : 2 * i + 2])
        out.append(Lifetime(int(a), int(b), f"q{i}"))
    return out


class TestLifetimes:
    def test_shared_wire_fixture(self, load_circuit):
        lifetimes = {lt.qubit: lt for lt in compute_lifetimes(load_circuit("shared_wire.qc"))}
        assert lifetimes["q"] == Lifetime(0, 6, "q")
        assert lifetimes["a"] == Lifetime(0, 2, "a")
        assert lifetimes["b"] == Lifetime(3, 5, "b")

    def test_controller_lives_until_selective_read(self, load_circuit):
        icm = expand_all(load_circuit("t_gate.qc")).circuit
        lifetimes = {lt.qubit: lt for lt in compute_lifetimes(icm)}
        last = len(icm.ops) - 1
        assert lifetimes["q"].death == last
        assert lifetimes["anc4"].death == len(icm.ops)

    def test_input_measured_first_holds_one_slot(self):
        c = Circuit(("q",), (Measure("q", MeasurementBasis.Z),), frozenset({"q"}))
        assert compute_lifetimes(c) == [Lifetime(0, 1, "q")]

    def test_empty_lifetime_rejected(self):
        with pytest.raises(ValueError):
            Lifetime(3, 3, "q")

    def test_needs_icm(self, load_circuit):
        with pytest.raises(NotIcm):
            compute_lifetimes(load_circuit("h_gate.qc"))

    def test_rejects_episodic(self):
        c = Circuit(
            ("w0",),
            (
                Init("w0", InitState.ZERO),
                Measure("w0", MeasurementBasis.Z),
                Init("w0", InitState.PLUS),
            ),
            outputs=frozenset({"w0"}),
            episodic=True,
        )
        with pytest.raises(NotIcm):
            compute_lifetimes(c)


class TestAssignment:
    def test_sequential_qubits_share(self):
        w = assign_wires([Lifetime(0, 2, "a"), Lifetime(3, 5, "b")])
        assert w.wire_count == 1

    def test_touching_qubits_do_not_share(self):
        w = assign_wires([Lifetime(0, 2, "a"), Lifetime(2, 5, "b")])
        assert w.wire_count == 2

    def test_shared_wire_fixture(self, load_circuit):
        c = load_circuit("shared_wire.qc")
        lifetimes = compute_lifetimes(c)
        w = assign_wires(lifetimes)
        assert w.wire_count == 2
        assert w.wire_of["a"] == w.wire_of["b"]
        report = wire_report(c, lifetimes, w)
        assert report["wire_count"] == report["max_live"] == 2
        assert report["wires"]["q"] == "w1"

    def test_deterministic_ties(self):
        lifetimes = [Lifetime(0, 4, "b"), Lifetime(0, 4, "a")]
        assert assign_wires(lifetimes).wire_of == {"a": 0, "b": 1}

    def test_overlap_detected(self):
        lifetimes = [Lifetime(0, 4, "a"), Lifetime(2, 6, "b")]
        with pytest.raises(OverlapViolation):
            check_assignment(lifetimes, WireAssignment({"a": 0, "b": 0}, 1))

    def test_unassigned_qubit_detected(self):
        with pytest.raises(OverlapViolation):
            check_assignment([Lifetime(0, 4, "a")], WireAssignment({}, 0))

    def test_wire_count_above_peak_liveness_raises(self, monkeypatch):
        monkeypatch.setattr(scheduler, "max_live", lambda lifetimes: 1)
        lifetimes = [Lifetime(0, 4, "a"), Lifetime(2, 6, "b")]
        with pytest.raises(OverlapViolation, match="peak liveness is 1"):
            assign_wires(lifetimes)


def test_first_fit_is_optimal():
    rng = np.random.default_rng(2015)
    for _ in range(200):
        lifetimes = random_lifetimes(rng, int(rng.integers(1, 51)))
        w = assign_wires(lifetimes)
        check_assignment(lifetimes, w)
        assert w.wire_count == max_live(lifetimes) == brute_force_live(lifetimes)


class TestRewrite:
    def test_shared_wire_is_episodic(self, load_circuit):
        c = load_circuit("shared_wire.qc")
        rewritten = rewrite_on_wires(c, assign_wires(compute_lifetimes(c)))
        assert rewritten.qubits == ("w0", "w1")
        assert rewritten.episodic
        assert rewritten.count(Cnot) == 2
        assert rewritten.init_counts() == c.init_counts()

    def test_no_sharing_keeps_plain_circuit(self, load_circuit):
        icm = expand_all(load_circuit("s_gate.qc")).circuit
        rewritten = rewrite_on_wires(icm, assign_wires(compute_lifetimes(icm)))
        assert not rewritten.episodic

    def test_rewrite_preserves_behaviour(self):
        rng = np.random.default_rng(5)
        for trial in range(40):
            n = int(rng.integers(2, 9))
            c = random_icm_circuit(rng, n, int(rng.integers(1, 16)))
            w = assign_wires(compute_lifetimes(c))
            rewritten = rewrite_on_wires(c, w)
            assert verify_wire_rewrite(c, rewritten, w, seed=trial)
