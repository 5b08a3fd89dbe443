"""
Braided-defect assembly geometry.

Lattice conventions
-------------------
x is time: op slot ``s`` owns the columns ``SLOT_PITCH * s .. SLOT_PITCH * s + 3``.
Wire ``i`` is a pair of primal rails at ``y = 4i`` and ``y = 4i + 2`` in the
plane ``z = 0``. Primal polylines only ever turn at all-even points and dual
polylines at all-odd points, so every cell a primal segment covers has at
least two even coordinates and every dual cell at least two odd ones: the two
kinds can never collide.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Dict, Iterable, Iterator, Optional, Sequence, Tuple

from .circuit import Circuit, Cnot, Init, InitState, Measure, MeasurementBasis, QubitId, SelectiveMeasure
from .constants import RAIL_GAP, RAIL_PITCH, SLOT_PITCH
from .errors import EmptyAssembly, GeometryError, MissingBoxOutput, RailNotLive

if TYPE_CHECKING:
    from .distillation import BoxPlacement, Connection
    from .scheduler import WireAssignment

logger = logging.getLogger(__name__)

Point3 = Tuple[int, int, int]
BBox = Tuple[Point3, Point3]
BRAID_CROSSINGS = 3


class DefectKind(Enum):
    PRIMAL = "primal"
    DUAL = "dual"


def simplify_path(points: Iterable[Point3]) -> tuple[Point3, ...]:
    """Drop repeated points and the interior points of straight runs."""
    out: list[Point3] = []
    for p in points:
        p = tuple(int(v) for v in p)
        if out and out[-1] == p:
            continue
        if len(out) >= 2 and _axis(out[-2], out[-1]) == _axis(out[-1], p):
            a, b = out[-2], out[-1]
            axis = _axis(a, b)
            if (b[axis] - a[axis]) * (p[axis] - b[axis]) > 0:
                out[-1] = p
                continue
        out.append(p)
    return tuple(out)


def _axis(a: Point3, b: Point3) -> int:
    diff = [i for i in range(3) if a[i] != b[i]]
    return diff[0] if len(diff) == 1 else -1


@dataclass(frozen=True)
class Defect:
    kind: DefectKind
    path: tuple[Point3, ...]
    closed: bool = False

    def __post_init__(self):
        path = tuple(tuple(int(v) for v in p) for p in self.path)
        object.__setattr__(self, "path", path)
        if not path:
            raise GeometryError("a defect needs at least one point")
        parity = 0 if self.kind is DefectKind.PRIMAL else 1
        for p in path:
            if any(v % 2 != parity for v in p):
                raise GeometryError(f"{self.kind.value} defect point {p} breaks the parity rule")
        for a, b in self.segments():
            if _axis(a, b) < 0:
                raise GeometryError(f"segment {a} -> {b} is not axis-aligned")

    def segments(self) -> Iterator[tuple[Point3, Point3]]:
        yield from zip(self.path, self.path[1:])
        if self.closed and len(self.path) > 1:
            yield self.path[-1], self.path[0]

    def cells(self) -> set[Point3]:
        cells = {self.path[0]}
        for a, b in self.segments():
            axis = _axis(a, b)
            step = 1 if b[axis] > a[axis] else -1
            for v in range(a[axis], b[axis] + step, step):
                p = list(a)
                p[axis] = v
                cells.add(tuple(p))
        return cells


@dataclass(frozen=True)
class Braid:
    cnot_id: int
    defect_id: int
    crossings: int


@dataclass(frozen=True)
class RailPair:
    """One init..measure episode of a wire, realised as two primal rails."""

    wire: QubitId
    wire_index: int
    birth: int
    death: int
    init: Optional[InitState] = None
    meas: Optional[MeasurementBasis] = None
    selective: bool = False

    @property
    def y_a(self) -> int:
        return RAIL_PITCH * self.wire_index

    @property
    def y_b(self) -> int:
        return self.y_a + RAIL_GAP

    @property
    def x_start(self) -> int:
        return SLOT_PITCH * self.birth

    @property
    def x_end(self) -> int:
        return SLOT_PITCH * self.death

    @property
    def start_boundary(self) -> str:
        if self.init is None:
            return "input"
        return "Z" if self.init is InitState.ZERO else ("X" if self.init is InitState.PLUS else "box")

    @property
    def end_boundary(self) -> str:
        if self.selective:
            return "selective"
        if self.meas is None:
            return "output"
        return self.meas.value

    def live_at(self, slot: int) -> bool:
        return self.birth <= slot < self.death

    def rails(self) -> tuple[Defect, Defect]:
        return (
            Defect(DefectKind.PRIMAL, ((self.x_start, self.y_a, 0), (self.x_end, self.y_a, 0))),
            Defect(DefectKind.PRIMAL, ((self.x_start, self.y_b, 0), (self.x_end, self.y_b, 0))),
        )


@dataclass(frozen=True)
class Assembly:
    defects: tuple[Defect, ...] = ()
    braids: tuple[Braid, ...] = ()
    boxes: tuple["BoxPlacement", ...] = ()
    bbox: Optional[BBox] = None


@dataclass(frozen=True)
class Metrics:
    bbox_volume: int
    occupied_cells: int
    occupancy: float

    def as_dict(self) -> dict:
        return {
            "bbox_volume": self.bbox_volume,
            "occupied_cells": self.occupied_cells,
            "occupancy": round(self.occupancy, 3),
        }


# --------------------------------------------------------------
# Rails and caps
def rail_pairs(c: Circuit) -> list[RailPair]:
    """Episodes of a wire-scheduled ICM circuit, ordered by wire then time."""
    index = {q: i for i, q in enumerate(c.qubits)}
    open_: Dict[QubitId, tuple[int, Optional[InitState]]] = {q: (0, None) for q in c.inputs}
    pairs: list[RailPair] = []
    for i, op in enumerate(c.ops):
        if isinstance(op, Init):
            open_[op.qubit] = (i, op.state)
        elif isinstance(op, (Measure, SelectiveMeasure)):
            birth, init = open_.pop(op.qubit)
            selective = isinstance(op, SelectiveMeasure)
            pairs.append(
                RailPair(
                    op.qubit, index[op.qubit], birth, max(i, birth + 1), init,
                    None if selective else op.basis, selective,
                )
            )
    for q, (birth, init) in open_.items():
        pairs.append(RailPair(q, index[q], birth, max(len(c.ops), birth + 1), init))
    pairs.sort(key=lambda p: (p.wire_index, p.birth))
    return pairs


def lay_qubit_rails(w: Optional["WireAssignment"], c: Circuit) -> list[Defect]:
    """Two straight primal rails per episode of every wire."""
    if w is not None and w.wire_count != len(c.qubits):
        raise GeometryError(f"{len(c.qubits)} wire(s) in the circuit, {w.wire_count} assigned")
    return [rail for pair in rail_pairs(c) for rail in pair.rails()]


def cap_endpoints(
    pair: RailPair,
    init: Optional[InitState] = None,
    meas: Optional[MeasurementBasis] = None,
    connection: Optional["Connection"] = None,
) -> list[Defect]:
    """
    Close Z-type boundaries and attach box outputs.

    An |0> start or Z-basis end joins the two rails by a transversal segment;
    |+> and X-basis boundaries leave them open. |A> and |Y> starts continue
    each rail back to a distillation box pin.
    """
    x0, x1, ya, yb = pair.x_start, pair.x_end, pair.y_a, pair.y_b
    if init is not None and init.is_magic:
        if connection is None:
            raise MissingBoxOutput(
                f"{init.ket} on {pair.wire} at slot {pair.birth} has no box output"
            )
        head_a, head_b = list(connection.path_a), list(connection.path_b)
    else:
        head_a, head_b = [(x0, ya, 0)], [(x0, yb, 0)]
    rail_a = head_a + [(x1, ya, 0)]
    rail_b = head_b + [(x1, yb, 0)]
    start_z = init is InitState.ZERO
    end_z = meas is MeasurementBasis.Z

    if start_z and end_z:
        loop = ((x0, ya, 0), (x1, ya, 0), (x1, yb, 0), (x0, yb, 0))
        return [Defect(DefectKind.PRIMAL, loop, closed=True)]
    if start_z:
        return [Defect(DefectKind.PRIMAL, simplify_path(rail_b[::-1] + rail_a))]
    if end_z:
        return [Defect(DefectKind.PRIMAL, simplify_path(rail_a + rail_b[::-1]))]
    return [
        Defect(DefectKind.PRIMAL, simplify_path(rail_a)),
        Defect(DefectKind.PRIMAL, simplify_path(rail_b)),
    ]


# --------------------------------------------------------------
# Braids
def _live_pair(pairs: Sequence[RailPair], wire: QubitId, slot: int) -> RailPair:
    for pair in pairs:
        if pair.wire == wire and pair.live_at(slot):
            return pair
    raise RailNotLive(f"wire {wire!r} has no live rails at slot {slot}")


def lay_cnot(cnot: Cnot, slot: int, pairs: Sequence[RailPair]) -> Defect:
    """
    Closed dual loop braided three times: it dives through the control pair
    twice and through the target pair once, then returns outside the target
    pair.
    """
    control = _live_pair(pairs, cnot.control, slot)
    target = _live_pair(pairs, cnot.target, slot)
    x1, x2 = SLOT_PITCH * slot + 1, SLOT_PITCH * slot + 3
    yc, yt = control.y_a + 1, target.y_a + 1
    yg = yt + RAIL_GAP if target.wire_index > control.wire_index else yt - RAIL_GAP
    path = (
        (x1, yc, -1),
        (x1, yc, 1),
        (x2, yc, 1),
        (x2, yc, -1),
        (x2, yt, -1),
        (x2, yt, 1),
        (x1, yt, 1),
        (x1, yg, 1),
        (x1, yg, -1),
    )
    return Defect(DefectKind.DUAL, path, closed=True)


def count_crossings(defect: Defect, pairs: Sequence[RailPair]) -> Dict[QubitId, int]:
    """Dual segments passing through the z = 0 plane between two live rails."""
    counts: Dict[QubitId, int] = {}
    for a, b in defect.segments():
        if _axis(a, b) != 2 or not min(a[2], b[2]) < 0 < max(a[2], b[2]):
            continue
        x, y = a[0], a[1]
        for pair in pairs:
            if pair.x_start <= x <= pair.x_end and pair.y_a < y < pair.y_b:
                counts[pair.wire] = counts.get(pair.wire, 0) + 1
    return counts


# --------------------------------------------------------------
def bounding_box(defects: Iterable[Defect], boxes: Iterable["BoxPlacement"] = ()) -> Optional[BBox]:
    corners: list[Point3] = []
    for d in defects:
        corners.extend(d.path)
    for box in boxes:
        corners.append(box.origin)
        corners.append(box.max_corner)
    if not corners:
        return None
    lo = tuple(min(p[i] for p in corners) for i in range(3))
    hi = tuple(max(p[i] for p in corners) for i in range(3))
    return lo, hi


def build_assembly(
    c: Circuit,
    w: Optional["WireAssignment"] = None,
    boxes: Sequence["BoxPlacement"] = (),
    connections: Sequence["Connection"] = (),
) -> tuple[Assembly, list[RailPair]]:
    """Rails, caps, box connections and braids of a wire-scheduled circuit."""
    pairs = rail_pairs(c)
    if w is not None and w.wire_count != len(c.qubits):
        raise GeometryError(f"{len(c.qubits)} wire(s) in the circuit, {w.wire_count} assigned")
    by_site = {(conn.site.wire, conn.site.slot): conn for conn in connections}

    defects: list[Defect] = []
    for pair in pairs:
        conn = by_site.get((pair.wire, pair.birth))
        defects.extend(cap_endpoints(pair, pair.init, pair.meas, conn))

    braids: list[Braid] = []
    for slot, op in enumerate(c.ops):
        if not isinstance(op, Cnot):
            continue
        loop = lay_cnot(op, slot, pairs)
        crossings = count_crossings(loop, pairs)
        if (
            sum(crossings.values()) != BRAID_CROSSINGS
            or crossings.get(op.control) != 2
            or crossings.get(op.target) != 1
        ):
            raise GeometryError(f"cnot at slot {slot} braids {crossings}")
        braids.append(Braid(slot, len(defects), sum(crossings.values())))
        defects.append(loop)

    assembly = Assembly(tuple(defects), tuple(braids), tuple(boxes), bounding_box(defects, boxes))
    logger.info(
        "assembly: %d defect(s), %d braid(s), %d box(es)", len(defects), len(braids), len(boxes)
    )
    return assembly, pairs


def occupied_cells(a: Assembly) -> set[Point3]:
    cells: set[Point3] = set()
    for d in a.defects:
        cells |= d.cells()
    for box in a.boxes:
        cells.update(box.cells())
    return cells


def compute_metrics(a: Assembly) -> Metrics:
    if not a.defects and not a.boxes:
        raise EmptyAssembly("assembly holds no geometry")
    lo, hi = a.bbox or bounding_box(a.defects, a.boxes)
    volume = 1
    for i in range(3):
        volume *= hi[i] - lo[i] + 1
    occupied = len(occupied_cells(a))
    return Metrics(volume, occupied, occupied / volume)


def check_assembly(a: Assembly) -> None:
    """Raise ``GeometryError`` unless defects and boxes are pairwise disjoint."""
    owner: Dict[Point3, int] = {}
    for i, d in enumerate(a.defects):
        for cell in d.cells():
            if owner.setdefault(cell, i) != i:
                raise GeometryError(f"defects {owner[cell]} and {i} share cell {cell}")
    box_base = len(a.defects)
    for j, box in enumerate(a.boxes):
        for cell in box.cells():
            if owner.setdefault(cell, box_base + j) != box_base + j:
                raise GeometryError(f"box {j} overlaps item {owner[cell]} at {cell}")
    for braid in a.braids:
        if braid.crossings != BRAID_CROSSINGS:
            raise GeometryError(f"cnot {braid.cnot_id} has {braid.crossings} crossing(s)")
