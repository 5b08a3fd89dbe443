"""
Distillation planning.

Boxes are opaque, heralded producers of |A> or |Y>. The planner sizes how
many to run so that, with the requested reliability, enough of them
succeed; places them on shelves in front of the circuit; and wires each
successful output to an initialisation site that consumes it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy.stats import binom

from .circuit import Circuit, Init, InitState, QubitId, is_icm
from .constants import (
    BOX_GAP,
    CHANNEL_Y,
    DEFAULT_BOX_DIMS,
    DEFAULT_SUCCESS_PROB,
    MAX_BOXES,
    MAX_REPLAN_ROUNDS,
    RAIL_GAP,
    RAIL_PITCH,
    RELIABILITY_EPS,
    SHELF_TOP_Y,
    SLOT_PITCH,
)
from .errors import InsufficientSuccesses, NotIcm, TargetUnreachable
from .geometry import Point3, simplify_path

logger = logging.getLogger(__name__)


class StateKind(Enum):
    A = "A"
    Y = "Y"

    @property
    def init_state(self) -> InitState:
        return InitState.A if self is StateKind.A else InitState.Y


@dataclass(frozen=True)
class DistillationSpec:
    state_kind: StateKind
    success_prob: float
    box_dims: tuple[int, int, int]

    def __post_init__(self):
        if not 0 < self.success_prob <= 1:
            raise ValueError(f"success probability {self.success_prob} is outside (0, 1]")
        dims = tuple(int(d) for d in self.box_dims)
        if len(dims) != 3 or min(dims) <= 0:
            raise ValueError(f"box dims must be three positive integers, got {self.box_dims}")
        object.__setattr__(self, "box_dims", dims)


def default_specs() -> Dict[StateKind, DistillationSpec]:
    return {
        kind: DistillationSpec(kind, DEFAULT_SUCCESS_PROB[kind.value], DEFAULT_BOX_DIMS[kind.value])
        for kind in StateKind
    }


@dataclass(frozen=True)
class DistillationPlan:
    required: Dict[str, int]
    boxes: Dict[str, int]
    reliability_target: float
    achieved: Dict[str, float]
    seed: Optional[int] = None
    replan_rounds: int = 0

    def __post_init__(self):
        for kind, value in self.achieved.items():
            if value < self.reliability_target - RELIABILITY_EPS:
                raise ValueError(f"{kind} boxes reach {value:.6f} < target {self.reliability_target}")


@dataclass(frozen=True)
class BoxPlacement:
    """
    An axis-aligned box occupying ``origin <= cell < origin + dims``.

    The output pin sits on the circuit-facing face (``y = origin.y + dy``);
    the second defect of the output pair leaves two cells further along x.
    """

    state_kind: StateKind
    origin: Point3
    dims: tuple[int, int, int]
    succeeded: bool
    output_pin: Point3

    @property
    def pins(self) -> tuple[Point3, Point3]:
        x, y, z = self.output_pin
        return self.output_pin, (x + RAIL_GAP, y, z)

    @property
    def max_corner(self) -> Point3:
        return tuple(o + d - 1 for o, d in zip(self.origin, self.dims))

    def cells(self):
        (x0, y0, z0), (dx, dy, dz) = self.origin, self.dims
        for x in range(x0, x0 + dx):
            for y in range(y0, y0 + dy):
                for z in range(z0, z0 + dz):
                    yield (x, y, z)


@dataclass(frozen=True)
class InitSite:
    """An |A> or |Y> initialisation on a scheduled wire."""

    wire: QubitId
    wire_index: int
    slot: int
    state_kind: StateKind

    def rail_start(self, rail: int) -> Point3:
        return (SLOT_PITCH * self.slot, RAIL_PITCH * self.wire_index + rail * RAIL_GAP, 0)


@dataclass(frozen=True)
class Connection:
    site: InitSite
    box_index: int
    path_a: tuple[Point3, ...]
    path_b: tuple[Point3, ...]
    layers: tuple[int, int] = field(default=(0, 0))


# --------------------------------------------------------------
def count_required(c: Circuit) -> Dict[str, int]:
    if not is_icm(c):
        raise NotIcm("distillation counts need an ICM circuit")
    counts = c.init_counts()
    return {kind.value: counts[kind.init_state.name] for kind in StateKind}


def success_tail(required: int, n, p: float):
    """P[Binomial(n, p) >= required]."""
    if required <= 0:
        return np.ones_like(np.asarray(n, dtype=float))
    return binom.sf(required - 1, n, p)


def boxes_needed(required: int, spec: DistillationSpec, target: float) -> int:
    """Smallest n with P[at least ``required`` of n boxes succeed] >= target."""
    if not 0 < target < 1:
        raise ValueError(f"reliability target {target} is outside (0, 1)")
    if required < 0:
        raise ValueError("required count is negative")
    if required == 0:
        return 0
    if required > MAX_BOXES:
        raise TargetUnreachable(f"{required} boxes exceed the cap of {MAX_BOXES}")
    ns = np.arange(required, MAX_BOXES + 1)
    ok = np.nonzero(success_tail(required, ns, spec.success_prob) >= target - RELIABILITY_EPS)[0]
    if ok.size == 0:
        raise TargetUnreachable(
            f"{spec.state_kind.value}: p={spec.success_prob} needs more than {MAX_BOXES} boxes "
            f"for {required} success(es) at {target}"
        )
    return int(ns[ok[0]])


def draw_successes(
    counts: Mapping[str, int],
    specs: Mapping[StateKind, DistillationSpec],
    rng: np.random.Generator,
) -> Dict[str, List[bool]]:
    """Herald every box with one seeded draw, A boxes before Y boxes."""
    masks: Dict[str, List[bool]] = {}
    for kind in StateKind:
        n = int(counts.get(kind.value, 0))
        masks[kind.value] = [bool(v) for v in rng.random(n) < specs[kind].success_prob]
    return masks


def plan_distillation(
    required: Mapping[str, int],
    specs: Mapping[StateKind, DistillationSpec],
    target: float,
    rng: np.random.Generator,
    *,
    seed: Optional[int] = None,
) -> tuple[DistillationPlan, Dict[str, List[bool]]]:
    """
    Size the boxes, herald them, and add boxes while a kind falls short.

    Returns the plan and the per-kind success masks (plan order).
    """
    boxes = {k.value: boxes_needed(required.get(k.value, 0), specs[k], target) for k in StateKind}
    masks = draw_successes(boxes, specs, rng)
    rounds = 0
    while True:
        deficit = {
            k: required.get(k, 0) - sum(masks[k])
            for k in masks
            if required.get(k, 0) > sum(masks[k])
        }
        if not deficit:
            break
        if rounds == MAX_REPLAN_ROUNDS:
            raise InsufficientSuccesses(
                f"still short of {deficit} after {rounds} replanning round(s)", deficit
            )
        rounds += 1
        logger.warning("replan %d: adding boxes %s", rounds, deficit)
        extra = draw_successes(deficit, specs, rng)
        for k, n in deficit.items():
            boxes[k] += n
            masks[k].extend(extra[k])

    achieved = {
        k.value: float(success_tail(required.get(k.value, 0), boxes[k.value], specs[k].success_prob))
        for k in StateKind
    }
    plan = DistillationPlan(
        {k.value: int(required.get(k.value, 0)) for k in StateKind},
        boxes,
        target,
        achieved,
        seed,
        rounds,
    )
    logger.info("plan: required %s, boxes %s", plan.required, plan.boxes)
    return plan, masks


# --------------------------------------------------------------
def _even_up(v: int) -> int:
    return v + (v % 2)


def _even_down(v: int) -> int:
    return v - (v % 2)


def place_boxes(
    counts: Mapping[str, int],
    specs: Mapping[StateKind, DistillationSpec],
    circuit_bbox: Optional[tuple[Point3, Point3]] = None,
    success: Optional[Mapping[str, Sequence[bool]]] = None,
) -> list[BoxPlacement]:
    """
    Shelf packing in front of the circuit (y < 0).

    A boxes fill the first row along x, Y boxes the row behind it. Origins
    and pins are kept on even coordinates so outputs join primal defects.
    """
    x0 = _even_up(circuit_bbox[0][0]) if circuit_bbox else 0
    placements: list[BoxPlacement] = []
    y_top = SHELF_TOP_Y
    for kind in StateKind:
        n = int(counts.get(kind.value, 0))
        if n == 0:
            continue
        dx, dy, dz = specs[kind].box_dims
        oy = y_top - dy
        x = x0
        flags = list(success.get(kind.value, ())) if success else []
        for i in range(n):
            placements.append(
                BoxPlacement(
                    kind,
                    (x, oy, 0),
                    (dx, dy, dz),
                    bool(flags[i]) if i < len(flags) else False,
                    (x, y_top, 0),
                )
            )
            x = _even_up(x + dx + BOX_GAP)
        y_top = _even_down(oy - BOX_GAP)
    return placements


def init_sites(c: Circuit) -> list[InitSite]:
    """Every |A>/|Y> initialisation of a wire-scheduled circuit, in op order."""
    index = {q: i for i, q in enumerate(c.qubits)}
    sites = []
    for slot, op in enumerate(c.ops):
        if isinstance(op, Init) and op.state.is_magic:
            kind = StateKind.A if op.state is InitState.A else StateKind.Y
            sites.append(InitSite(op.qubit, index[op.qubit], slot, kind))
    return sites


def connection_base(placements: Sequence[BoxPlacement]) -> int:
    """Lowest routing layer: clear of every box and of the braid layer."""
    top = max((b.origin[2] + b.dims[2] for b in placements), default=0)
    return _even_up(top + 2)


def _manhattan(a: Point3, b: Point3) -> int:
    return sum(abs(u - v) for u, v in zip(a, b))


def route(pin: Point3, layer: int, rail_start: Point3) -> tuple[Point3, ...]:
    """Pin -> up to ``layer`` -> channel row -> over the rail -> down onto it."""
    px, py, _ = pin
    rx, ry, _ = rail_start
    return simplify_path(
        [
            (px, py, 0),
            (px, py, layer),
            (px, CHANNEL_Y, layer),
            (rx, CHANNEL_Y, layer),
            (rx, ry, layer),
            (rx, ry, 0),
        ]
    )


def wire_outputs(
    placements: Sequence[BoxPlacement],
    sites: Sequence[InitSite],
    success_mask: Optional[Sequence[bool]] = None,
) -> list[Connection]:
    """
    Greedy nearest-pin matching of init sites to distinct successful boxes.

    Each match yields a pair of primal paths, one per rail, each routed in a
    private z-layer so no two connections share a cell.
    """
    mask = list(success_mask) if success_mask is not None else [b.succeeded for b in placements]
    if len(mask) != len(placements):
        raise ValueError("success mask does not match the placements")
    used: set[int] = set()
    matches: list[tuple[InitSite, int]] = []
    deficit: Dict[str, int] = {}
    for site in sites:
        target = site.rail_start(0)
        candidates = [
            (_manhattan(b.output_pin, target), i)
            for i, b in enumerate(placements)
            if mask[i] and i not in used and b.state_kind is site.state_kind
        ]
        if not candidates:
            deficit[site.state_kind.value] = deficit.get(site.state_kind.value, 0) + 1
            continue
        _, best = min(candidates)
        used.add(best)
        matches.append((site, best))
    if deficit:
        raise InsufficientSuccesses(f"not enough successful boxes: short {deficit}", deficit)

    order = {kind: n for n, kind in enumerate(StateKind)}
    matches.sort(key=lambda m: (order[m[0].state_kind], m[0].slot))
    base = connection_base(placements)
    connections = []
    for k, (site, i) in enumerate(matches):
        za, zb = base + 4 * k, base + 4 * k + 2
        pin_a, pin_b = placements[i].pins
        connections.append(
            Connection(
                site,
                i,
                route(pin_a, za, site.rail_start(0)),
                route(pin_b, zb, site.rail_start(1)),
                (za, zb),
            )
        )
    logger.debug("wired %d box output(s)", len(connections))
    return connections


def plan_report(
    plan: DistillationPlan,
    placements: Sequence[BoxPlacement],
    connections: Sequence[Connection] = (),
) -> dict:
    return {
        "required": plan.required,
        "boxes": plan.boxes,
        "reliability_target": plan.reliability_target,
        "achieved": {k: round(v, 12) for k, v in plan.achieved.items()},
        "seed": plan.seed,
        "replan_rounds": plan.replan_rounds,
        "placements": [
            {
                "state_kind": b.state_kind.value,
                "origin": list(b.origin),
                "dims": list(b.dims),
                "succeeded": b.succeeded,
                "output_pin": list(b.output_pin),
            }
            for b in placements
        ],
        "connections": [
            {"wire": c.site.wire, "slot": c.site.slot, "box": c.box_index} for c in connections
        ],
    }
