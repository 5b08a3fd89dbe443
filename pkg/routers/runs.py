import json
from typing import List

from fastapi import APIRouter, Depends, HTTPException
from sqlalchemy.orm import Session

from database import CompileRun, create_tables, get_db
from models.api import DeleteRunsRequest, RunDetail, RunSummary

router = APIRouter()

create_tables()


@router.get("", response_model=List[RunSummary])
def list_runs(limit: int = 50, db: Session = Depends(get_db)):
    """Most recent compile runs first"""
    return db.query(CompileRun).order_by(CompileRun.id.desc()).limit(limit).all()


@router.get("/{run_id}", response_model=RunDetail)
def get_run(run_id: int, db: Session = Depends(get_db)):
    """A stored run with its report and every artifact"""
    run = db.query(CompileRun).filter(CompileRun.id == run_id).first()
    if not run:
        raise HTTPException(status_code=404, detail="Compile run not found")

    summary = RunSummary.model_validate(run)
    return RunDetail(
        **summary.model_dump(),
        source=run.source,
        report=json.loads(run.report),
        artifacts=json.loads(run.artifacts),
    )


@router.post("/delete")
def delete_runs(request: DeleteRunsRequest, db: Session = Depends(get_db)):
    """Delete the given runs; unknown ids are reported back"""
    runs = db.query(CompileRun).filter(CompileRun.id.in_(request.run_ids)).all()
    found = {run.id for run in runs}
    for run in runs:
        db.delete(run)
    db.commit()
    return {
        "deleted": sorted(found),
        "missing": sorted(set(request.run_ids) - found),
    }
