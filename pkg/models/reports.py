from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, Field, field_validator

from forge.constants import (
    DEFAULT_BOX_DIMS,
    DEFAULT_MAX_BRANCHES,
    DEFAULT_RELIABILITY_TARGET,
    DEFAULT_SUCCESS_PROB,
    MAX_ORACLE_QUBITS,
)
from forge.distillation import DistillationSpec, StateKind

BoxDims = Tuple[int, int, int]


class Stage(str, Enum):
    """Last stage a compile run executes."""

    PARSE = "parse"
    ICM = "icm"
    SCHEDULE = "schedule"
    ASSEMBLY = "assembly"


STAGE_ORDER = [Stage.PARSE, Stage.ICM, Stage.SCHEDULE, Stage.ASSEMBLY]


class DistillSettings(BaseModel):
    p_a: float = Field(DEFAULT_SUCCESS_PROB["A"], gt=0, le=1)
    p_y: float = Field(DEFAULT_SUCCESS_PROB["Y"], gt=0, le=1)
    box_dims_a: BoxDims = DEFAULT_BOX_DIMS["A"]
    box_dims_y: BoxDims = DEFAULT_BOX_DIMS["Y"]

    @field_validator("box_dims_a", "box_dims_y")
    @classmethod
    def dims_fit_two_pins(cls, dims: BoxDims) -> BoxDims:
        # the two output pins sit two cells apart on the box's x extent
        if min(dims) <= 0 or dims[0] < 3:
            raise ValueError(f"box dims {dims} must be positive with x extent >= 3")
        return dims

    def specs(self) -> Dict[StateKind, DistillationSpec]:
        return {
            StateKind.A: DistillationSpec(StateKind.A, self.p_a, self.box_dims_a),
            StateKind.Y: DistillationSpec(StateKind.Y, self.p_y, self.box_dims_y),
        }


class PipelineConfig(BaseModel):
    input_path: Optional[Path] = None
    output_dir: Path = Path(".")
    reliability_target: float = Field(DEFAULT_RELIABILITY_TARGET, gt=0, lt=1)
    distill: DistillSettings = Field(default_factory=DistillSettings)
    seed: int = 0
    stop_after: Stage = Stage.ASSEMBLY
    max_qubits: int = Field(MAX_ORACLE_QUBITS, ge=1, le=MAX_ORACLE_QUBITS)
    max_branches: int = Field(DEFAULT_MAX_BRANCHES, ge=1)
    write_obj: bool = False
    record_timings: bool = False

    def runs(self, stage: Stage) -> bool:
        return STAGE_ORDER.index(stage) <= STAGE_ORDER.index(self.stop_after)


class RunReport(BaseModel):
    """Summary written to ``<name>.report.json``; field order is the file's key order."""

    name: str
    stop_after: Stage
    qubit_count: int = 0
    op_count: int = 0
    cnot_count: int = 0
    t_count: int = 0
    gadgets: Dict[str, int] = Field(default_factory=dict)
    wire_count: int = 0
    max_live: int = 0
    required: Dict[str, int] = Field(default_factory=dict)
    box_counts: Dict[str, int] = Field(default_factory=dict)
    replan_rounds: int = 0
    bbox_volume: int = 0
    occupancy: float = 0.0
    seed: int = 0
    timings: Optional[Dict[str, float]] = None


class StatsReport(BaseModel):
    t_count: int
    qubit_count: int
    op_count: int
    required: Dict[str, int]
    boxes: Dict[str, int]
    reliability_target: float
