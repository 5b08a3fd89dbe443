import json
import logging

from fastapi import APIRouter, Depends, File, Form, HTTPException, UploadFile
from sqlalchemy.orm import Session

from database import CompileRun, create_tables, get_db
from forge.errors import CircuitError, ForgeError
from forge.pipeline import circuit_stats, compile_circuit, verify_source
from models.api import (
    CircuitRequest,
    CompileRequest,
    CompileResponse,
    VerifyRequest,
    VerifyResponse,
)
from models.reports import PipelineConfig, StatsReport

logger = logging.getLogger(__name__)

router = APIRouter()

# Create tables on startup
create_tables()


def domain_error(exc: ForgeError) -> HTTPException:
    """Circuit problems are the caller's input (400); later stages fail with 422."""
    status = 400 if isinstance(exc, CircuitError) else 422
    return HTTPException(status_code=status, detail=f"error[{exc.stage}]: {exc}")


def config_for(request: CircuitRequest, **extra) -> PipelineConfig:
    return PipelineConfig(
        reliability_target=request.reliability_target,
        distill=request.distill,
        seed=request.seed,
        **extra,
    )


def store_run(db: Session, request: CompileRequest, result) -> CompileRun:
    report = result.report
    run = CompileRun(
        name=result.name,
        stop_after=report.stop_after.value,
        seed=request.seed,
        reliability_target=request.reliability_target,
        t_count=report.t_count,
        qubit_count=report.qubit_count,
        wire_count=report.wire_count,
        bbox_volume=report.bbox_volume,
        occupancy=report.occupancy,
        source=request.source,
        report=result.artifacts[".report.json"],
        artifacts=json.dumps(result.files()),
    )
    db.add(run)
    db.commit()
    db.refresh(run)
    return run


def run_compile_request(request: CompileRequest, db: Session) -> CompileResponse:
    cfg = config_for(request, stop_after=request.stop_after, write_obj=request.obj)
    try:
        result = compile_circuit(request.source, request.name, cfg)
    except ForgeError as exc:
        raise domain_error(exc)
    run = store_run(db, request, result)
    logger.info("stored compile run %d (%s)", run.id, run.name)
    return CompileResponse(run_id=run.id, report=result.report, artifacts=result.files())


# --------------------------------------------------------------
@router.post("/stats", response_model=StatsReport)
def circuit_statistics(request: CircuitRequest):
    """T count, magic-state demand and projected distillation boxes"""
    try:
        return circuit_stats(request.source, config_for(request))
    except ForgeError as exc:
        raise domain_error(exc)


@router.post("/compile", response_model=CompileResponse)
def compile_endpoint(request: CompileRequest, db: Session = Depends(get_db)):
    """Run the pipeline and store the run with its artifacts"""
    return run_compile_request(request, db)


@router.post("/verify", response_model=VerifyResponse)
def verify_endpoint(request: VerifyRequest):
    """Branch-by-branch check of the ICM lowering against the state oracle"""
    if request.against is not None and request.frame is None:
        raise HTTPException(status_code=400, detail="an ICM circuit needs its frame report")
    cfg = config_for(request, max_branches=request.max_branches, max_qubits=request.max_qubits)
    try:
        result = verify_source(
            request.source, cfg, request.against, request.frame, trials=request.trials
        )
    except ForgeError as exc:
        raise domain_error(exc)
    return VerifyResponse(**result.as_dict())


@router.post("/upload", response_model=CompileResponse)
async def upload_circuit(
    file: UploadFile = File(...),
    seed: int = Form(0),
    db: Session = Depends(get_db),
):
    """Compile an uploaded .qc file with default settings"""
    if not file.filename or not file.filename.endswith(".qc"):
        raise HTTPException(status_code=400, detail="expected a .qc circuit file")
    try:
        source = (await file.read()).decode("utf-8")
    except UnicodeDecodeError:
        raise HTTPException(status_code=400, detail="circuit file is not UTF-8 text")
    name = file.filename[: -len(".qc")].replace(" ", "_") or "circuit"
    return run_compile_request(CompileRequest(source=source, name=name, seed=seed), db)
