from fractions import Fraction
from typing import Dict, FrozenSet, Tuple


# ---------- Oracle tolerances ----------
ALGEBRA_TOL = 1e-12  # involutions, unitarity
NORM_TOL = 1e-12  # state vectors must have unit norm
FIDELITY_TOL = 1e-10  # branch probabilities, |<a|b>| checks
ZERO_PROBABILITY = 1e-14  # branches below this weight are pruned

MAX_ORACLE_QUBITS = 20
DEFAULT_MAX_BRANCHES = 1 << 16

# ---------- Supported rotation angles (multiples of pi) ----------
QUARTER = Fraction(1, 4)
HALF = Fraction(1, 2)
FULL = Fraction(1)
SUPPORTED_ANGLES = frozenset({QUARTER, -QUARTER, HALF, -HALF, FULL})
# (axis, reduced angle) pairs with an ICM gadget; X-axis quarter turns have none
SUPPORTED_ROTATIONS: FrozenSet[Tuple[str, Fraction]] = frozenset(
    {("z", a) for a in SUPPORTED_ANGLES} | {("x", HALF), ("x", -HALF), ("x", FULL)}
)

# ---------- Geometry ----------
SLOT_PITCH = 4  # lattice cells per op slot along x
RAIL_PITCH = 4  # lattice cells between wires along y
RAIL_GAP = 2  # the two rails of a wire sit at y and y + RAIL_GAP
CHANNEL_Y = -2  # connection channel row between circuit and boxes
SHELF_TOP_Y = -4  # circuit-facing face of the first box shelf
BOX_GAP = 2

# ---------- Distillation defaults ----------
DEFAULT_SUCCESS_PROB: Dict[str, float] = {"A": 0.9, "Y": 0.9}
DEFAULT_BOX_DIMS: Dict[str, Tuple[int, int, int]] = {"A": (8, 6, 6), "Y": (4, 4, 4)}
DEFAULT_RELIABILITY_TARGET = 0.999
RELIABILITY_EPS = 1e-12
MAX_BOXES = 4096
MAX_REPLAN_ROUNDS = 8

ASSEMBLY_SCHEMA_VERSION = 1
FRAME_REPORT_VERSION = 1
