"""
Compile driver: parse -> ICM lowering -> wire scheduling -> distillation plan
-> assembly, producing one text artifact per stage.

``compile_circuit`` is pure (text in, artifacts out) and is shared by the CLI
and the HTTP service; ``run_compile`` adds the file handling.
"""

from __future__ import annotations

import json
import logging
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, Optional

import numpy as np

from models.reports import PipelineConfig, RunReport, Stage, StatsReport

from .circuit import Circuit, Cnot
from .distillation import (
    boxes_needed,
    count_required,
    init_sites,
    place_boxes,
    plan_distillation,
    plan_report,
    wire_outputs,
)
from .errors import FrameError
from .export import (
    assembly_to_obj,
    dumps,
    export_assembly,
    frame_report,
    load_frame_report,
    validate_assembly_json,
)
from .geometry import build_assembly, check_assembly, compute_metrics
from .icm import IcmResult, expand_all
from .normalize import t_count
from .parser import parse_circuit, print_circuit
from .scheduler import assign_wires, compute_lifetimes, max_live, rewrite_on_wires, wire_report
from .verify import VerifyResult, verify_equivalence

logger = logging.getLogger(__name__)

LOG_ENV = "DEFECT_FORGE_LOG"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
ICM_SUFFIX = ".icm.qc"


def configure_logging(level: Optional[str] = None) -> int:
    """Set the root level from ``level`` or ``$DEFECT_FORGE_LOG`` (names or numbers)."""
    raw = (level or os.environ.get(LOG_ENV) or "WARNING").strip()
    value = int(raw) if raw.isdigit() else logging.getLevelName(raw.upper())
    if not isinstance(value, int):
        value = logging.WARNING
    logging.basicConfig(level=value, format=LOG_FORMAT)
    logging.getLogger().setLevel(value)
    return value


def artifact_name(path: Path) -> str:
    name = path.name
    for suffix in (ICM_SUFFIX, ".qc"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return path.stem


def sibling_frame(path: Path) -> Optional[Path]:
    """``X.frame.json`` next to an ``X.icm.qc`` file, if there is one."""
    if not path.name.endswith(ICM_SUFFIX):
        return None
    frame = path.with_name(artifact_name(path) + ".frame.json")
    return frame if frame.exists() else None


@dataclass
class CompileResult:
    name: str
    report: RunReport
    artifacts: Dict[str, str] = field(default_factory=dict)  # suffix -> text, in emission order

    def files(self) -> Dict[str, str]:
        return {f"{self.name}{suffix}": text for suffix, text in self.artifacts.items()}


class _Timer:
    def __init__(self):
        self.timings: Dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        yield
        elapsed = time.perf_counter() - start
        self.timings[name] = round(elapsed, 6)
        logger.info("stage %s finished in %.3fs", name, elapsed)


# --------------------------------------------------------------
def source_stats(c: Circuit) -> dict:
    return {"qubits": len(c.qubits), "ops": len(c.ops), "t_count": t_count(c)}


def lower(c: Circuit, frame_doc: Optional[dict] = None) -> tuple[IcmResult, dict, dict]:
    """
    ICM lowering, or reuse of a previous lowering when ``frame_doc`` is given.

    Returns the result, the frame report and the source stats.
    """
    if frame_doc is None:
        stats = source_stats(c)
        result = expand_all(c)
        return result, frame_report(result.rules, result.wire_of, result.measured_on, stats), stats
    rules, wire_of, measured_on, stats = load_frame_report(frame_doc)
    unknown = [w for w in list(wire_of.values()) + list(measured_on.values()) if w not in c.qubits]
    if unknown:
        raise FrameError(f"frame report names wires missing from the circuit: {unknown}")
    return IcmResult(c, tuple(rules), wire_of, measured_on), frame_doc, stats


def compile_circuit(
    text: str,
    name: str,
    cfg: PipelineConfig,
    frame_doc: Optional[dict] = None,
) -> CompileResult:
    timer = _Timer()
    artifacts: Dict[str, str] = {}
    report = RunReport(name=name, stop_after=cfg.stop_after, seed=cfg.seed)

    with timer.stage("parse"):
        circuit = parse_circuit(text)
    report.qubit_count = len(circuit.qubits)
    report.op_count = len(circuit.ops)
    report.cnot_count = circuit.count(Cnot)
    report.t_count = t_count(circuit)

    if cfg.runs(Stage.ICM):
        with timer.stage("icm"):
            result, frame, stats = lower(circuit, frame_doc)
        icm = result.circuit
        report.qubit_count = len(icm.qubits)
        report.op_count = len(icm.ops)
        report.cnot_count = icm.count(Cnot)
        report.t_count = int(stats.get("t_count", report.t_count))
        report.gadgets = result.gadget_counts()
        artifacts[ICM_SUFFIX] = print_circuit(icm)
        artifacts[".frame.json"] = dumps(frame)

    if cfg.runs(Stage.SCHEDULE):
        with timer.stage("schedule"):
            lifetimes = compute_lifetimes(icm)
            w = assign_wires(lifetimes)
            wired = rewrite_on_wires(icm, w)
        report.wire_count = w.wire_count
        report.max_live = max_live(lifetimes)
        artifacts[".wires.json"] = dumps(wire_report(icm, lifetimes, w))

    if cfg.runs(Stage.ASSEMBLY):
        specs = cfg.distill.specs()
        with timer.stage("plan"):
            rng = np.random.default_rng(cfg.seed)
            required = count_required(icm)
            plan, masks = plan_distillation(required, specs, cfg.reliability_target, rng, seed=cfg.seed)
            placements = place_boxes(plan.boxes, specs, success=masks)
            connections = wire_outputs(placements, init_sites(wired))
        report.required = dict(plan.required)
        report.box_counts = dict(plan.boxes)
        report.replan_rounds = plan.replan_rounds
        artifacts[".plan.json"] = dumps(plan_report(plan, placements, connections))

        with timer.stage("assembly"):
            assembly, _ = build_assembly(wired, w, placements, connections)
            check_assembly(assembly)
            metrics = compute_metrics(assembly) if assembly.defects or assembly.boxes else None
            doc = export_assembly(assembly, metrics)
            validate_assembly_json(doc)
        if metrics is not None:
            report.bbox_volume = metrics.bbox_volume
            report.occupancy = round(metrics.occupancy, 6)
        artifacts[".assembly.json"] = dumps(doc)
        if cfg.write_obj:
            artifacts[".obj"] = assembly_to_obj(assembly)

    if cfg.record_timings:
        report.timings = timer.timings
    artifacts[".report.json"] = dumps(report.model_dump(mode="json", exclude_none=True))
    logger.info("compiled %s through %s: %d artifact(s)", name, cfg.stop_after.value, len(artifacts))
    return CompileResult(name, report, artifacts)


def run_compile(cfg: PipelineConfig) -> CompileResult:
    """Compile ``cfg.input_path`` and write its artifacts into ``cfg.output_dir``."""
    path = Path(cfg.input_path)
    text = path.read_text(encoding="utf-8")
    frame_path = sibling_frame(path)
    frame_doc = None
    if frame_path is not None:
        logger.info("resuming from %s", frame_path)
        frame_doc = json.loads(frame_path.read_text(encoding="utf-8"))
    result = compile_circuit(text, artifact_name(path), cfg, frame_doc)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for filename, content in result.files().items():
        (out / filename).write_text(content, encoding="utf-8")
    return result


# --------------------------------------------------------------
def circuit_stats(text: str, cfg: PipelineConfig) -> StatsReport:
    c = parse_circuit(text)
    icm = expand_all(c).circuit
    required = count_required(icm)
    specs = cfg.distill.specs()
    boxes = {
        kind.value: boxes_needed(required[kind.value], spec, cfg.reliability_target)
        for kind, spec in specs.items()
    }
    return StatsReport(
        t_count=t_count(c),
        qubit_count=len(c.qubits),
        op_count=len(c.ops),
        required=required,
        boxes=boxes,
        reliability_target=cfg.reliability_target,
    )


def verify_source(
    text: str,
    cfg: PipelineConfig,
    against: Optional[str] = None,
    frame_doc: Optional[dict] = None,
    trials: int = 1,
) -> VerifyResult:
    """
    Check a circuit against its lowering; with ``against`` (ICM text plus its
    frame report) the given lowering is checked instead of a fresh one.
    """
    source = parse_circuit(text)
    if against is None:
        result = expand_all(source)
    else:
        if frame_doc is None:
            raise FrameError("an ICM circuit is verified together with its frame report")
        result, _, _ = lower(parse_circuit(against), frame_doc)
    return verify_equivalence(
        source,
        result.circuit,
        result.rules,
        result.wire_of,
        result.measured_on,
        seed=cfg.seed,
        trials=trials,
        max_branches=cfg.max_branches,
        max_qubits=cfg.max_qubits,
    )
