"""
Wire reuse for ICM circuits.

A qubit occupies its wire from its initialisation to its measurement.
Qubits whose lifetimes do not overlap can share a wire; the allocation is the
classic first-fit interval colouring, which is optimal for interval graphs.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Sequence

from .circuit import (
    Circuit,
    Cnot,
    Init,
    Measure,
    Operation,
    QubitId,
    SelectiveMeasure,
    is_icm,
)
from .errors import NotIcm, OverlapViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Lifetime:
    """Half-open interval [birth, death) in op-index time."""

    birth: int
    death: int
    qubit: QubitId

    def __post_init__(self):
        if self.birth >= self.death:
            raise ValueError(f"lifetime of {self.qubit!r} is empty: [{self.birth}, {self.death})")

    def can_precede(self, other: "Lifetime") -> bool:
        """True when ``other`` may reuse this lifetime's wire."""
        return self.death < other.birth


@dataclass(frozen=True)
class WireAssignment:
    wire_of: Dict[QubitId, int]
    wire_count: int

    def wire_name(self, q: QubitId) -> str:
        return wire_name(self.wire_of[q])

    def qubits_on(self, wire: int) -> list[QubitId]:
        return [q for q, w in self.wire_of.items() if w == wire]


def wire_name(index: int) -> str:
    return f"w{index}"


# --------------------------------------------------------------
def compute_lifetimes(c: Circuit) -> list[Lifetime]:
    """
    One lifetime per qubit that ever holds a state, in declaration order.

    Birth is the Init index (0 for inputs); death is the measurement index
    (``len(c.ops)`` if never measured). A measured qubit whose outcome steers
    a later selective measurement keeps its wire until that measurement.
    """
    if not is_icm(c):
        raise NotIcm("wire scheduling needs an ICM circuit")
    if c.episodic:
        raise NotIcm("circuit is already laid out on shared wires")

    birth: Dict[QubitId, int] = {q: 0 for q in c.inputs}
    death: Dict[QubitId, int] = {}
    for i, op in enumerate(c.ops):
        if isinstance(op, Init):
            birth[op.qubit] = i
        elif isinstance(op, (Measure, SelectiveMeasure)):
            death[op.qubit] = i
            if isinstance(op, SelectiveMeasure):
                death[op.controller] = max(death[op.controller], i)

    end = len(c.ops)
    lifetimes = []
    for q in c.qubits:
        if q not in birth:
            continue
        b = birth[q]
        # an input read out by the very first op still holds its wire for one slot
        d = max(death.get(q, end), b + 1)
        lifetimes.append(Lifetime(b, d, q))
    return lifetimes


def max_live(lifetimes: Iterable[Lifetime]) -> int:
    """Largest number of lifetimes that cannot share a wire at some op index."""
    events = []
    for lt in lifetimes:
        events.append((lt.birth, 0, 1))
        events.append((lt.death, 1, -1))
    best = live = 0
    # a wire freed at index i is reusable only after i, so births sort first
    for _, _, delta in sorted(events):
        live += delta
        best = max(best, live)
    return best


def assign_wires(lifetimes: Sequence[Lifetime]) -> WireAssignment:
    """First-fit greedy over lifetimes sorted by (birth, death, name)."""
    wire_of: Dict[QubitId, int] = {}
    free: list[int] = []
    busy: list[tuple[int, int]] = []  # (death of occupant, wire)
    wire_count = 0
    for lt in sorted(lifetimes):
        while busy and busy[0][0] < lt.birth:
            heapq.heappush(free, heapq.heappop(busy)[1])
        if free:
            wire = heapq.heappop(free)
        else:
            wire = wire_count
            wire_count += 1
        wire_of[lt.qubit] = wire
        heapq.heappush(busy, (lt.death, wire))

    expected = max_live(lifetimes)
    if wire_count != expected:
        raise OverlapViolation(f"first-fit used {wire_count} wire(s), peak liveness is {expected}")
    logger.info("schedule: %d qubit(s) on %d wire(s)", len(wire_of), wire_count)
    return WireAssignment(wire_of, wire_count)


def check_assignment(lifetimes: Sequence[Lifetime], w: WireAssignment) -> None:
    """Raise ``OverlapViolation`` if two lifetimes on one wire are not strictly ordered."""
    by_wire: Dict[int, list[Lifetime]] = {}
    for lt in lifetimes:
        if lt.qubit not in w.wire_of:
            raise OverlapViolation(f"qubit {lt.qubit!r} has no wire")
        by_wire.setdefault(w.wire_of[lt.qubit], []).append(lt)
    for wire, group in by_wire.items():
        group.sort()
        for first, second in zip(group, group[1:]):
            if not first.can_precede(second):
                raise OverlapViolation(
                    f"{first.qubit!r} [{first.birth}, {first.death}) and "
                    f"{second.qubit!r} [{second.birth}, {second.death}) overlap on {wire_name(wire)}"
                )


def _rename(op: Operation, names: Dict[QubitId, str]) -> Operation:
    if isinstance(op, Init):
        return Init(names[op.qubit], op.state)
    if isinstance(op, Cnot):
        return Cnot(names[op.control], names[op.target])
    if isinstance(op, Measure):
        return Measure(names[op.qubit], op.basis)
    if isinstance(op, SelectiveMeasure):
        return SelectiveMeasure(
            names[op.qubit], names[op.controller], op.basis_if_zero, op.basis_if_one
        )
    raise NotIcm(f"cannot place {op!r} on a wire")


def rewrite_on_wires(c: Circuit, w: WireAssignment) -> Circuit:
    """Rename every qubit to its wire; each wire becomes a run of episodes."""
    lifetimes = compute_lifetimes(c)
    check_assignment(lifetimes, w)
    names = {q: w.wire_name(q) for q in w.wire_of}
    shared = w.wire_count < len(w.wire_of)
    return Circuit(
        tuple(wire_name(i) for i in range(w.wire_count)),
        tuple(_rename(op, names) for op in c.ops),
        frozenset(names[q] for q in c.inputs),
        frozenset(names[q] for q in c.outputs),
        episodic=shared,
    )


def wire_report(c: Circuit, lifetimes: Sequence[Lifetime], w: WireAssignment) -> dict:
    return {
        "wires": {q: w.wire_name(q) for q in c.qubits if q in w.wire_of},
        "wire_count": w.wire_count,
        "max_live": max_live(lifetimes),
        "lifetimes": [
            {"qubit": lt.qubit, "birth": lt.birth, "death": lt.death, "wire": w.wire_name(lt.qubit)}
            for lt in lifetimes
        ],
    }
