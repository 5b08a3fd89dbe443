from datetime import datetime
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from forge.constants import DEFAULT_MAX_BRANCHES, DEFAULT_RELIABILITY_TARGET, MAX_ORACLE_QUBITS

from .reports import DistillSettings, RunReport, Stage


class CircuitRequest(BaseModel):
    source: str  # circuit in .qc text format
    name: str = Field("circuit", pattern=r"^[A-Za-z0-9_.-]+$")
    reliability_target: float = Field(DEFAULT_RELIABILITY_TARGET, gt=0, lt=1)
    distill: DistillSettings = Field(default_factory=DistillSettings)
    seed: int = 0


class CompileRequest(CircuitRequest):
    stop_after: Stage = Stage.ASSEMBLY
    obj: bool = False


class CompileResponse(BaseModel):
    run_id: int
    report: RunReport
    artifacts: Dict[str, str]  # filename -> content


class VerifyRequest(CircuitRequest):
    against: Optional[str] = None  # ICM circuit text
    frame: Optional[dict] = None  # its frame report
    trials: int = Field(1, ge=1, le=100)
    max_branches: int = Field(DEFAULT_MAX_BRANCHES, ge=1)
    max_qubits: int = Field(MAX_ORACLE_QUBITS, ge=1, le=MAX_ORACLE_QUBITS)


class BranchRow(BaseModel):
    trial: int
    key: str
    logical: str
    probability: float
    fidelity: float
    passed: bool


class VerifyResponse(BaseModel):
    passed: bool
    seed: int
    branches: List[BranchRow]
    distribution_failures: List[dict] = []


class RunSummary(BaseModel):
    id: int
    name: str
    created_at: datetime
    stop_after: str
    seed: int
    t_count: int
    qubit_count: int
    wire_count: int
    bbox_volume: int
    occupancy: float

    model_config = ConfigDict(from_attributes=True)


class RunDetail(RunSummary):
    source: str
    report: dict
    artifacts: Dict[str, str]


class DeleteRunsRequest(BaseModel):
    run_ids: List[int]
