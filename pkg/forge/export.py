"""JSON and OBJ serialisation of assemblies, and the frame report."""

from __future__ import annotations

import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import jsonschema

from .constants import ASSEMBLY_SCHEMA_VERSION, FRAME_REPORT_VERSION
from .distillation import BoxPlacement, StateKind
from .errors import FrameError, GeometryError
from .gadgets import CorrectionRule
from .geometry import Assembly, Braid, Defect, DefectKind, Metrics, compute_metrics

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).resolve().parent.parent / "docs" / "assembly.schema.json"


def dumps(doc: Any) -> str:
    """Canonical text form used for every artifact (stable key order, trailing newline)."""
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


# --------------------------------------------------------------
def export_assembly(a: Assembly, metrics: Optional[Metrics] = None) -> dict:
    if metrics is None and (a.defects or a.boxes):
        metrics = compute_metrics(a)
    return {
        "version": ASSEMBLY_SCHEMA_VERSION,
        "defects": [
            {"kind": d.kind.value, "closed": d.closed, "path": [list(p) for p in d.path]}
            for d in a.defects
        ],
        "braids": [
            {"cnot_id": b.cnot_id, "defect_id": b.defect_id, "crossings": b.crossings}
            for b in a.braids
        ],
        "boxes": [
            {
                "state_kind": box.state_kind.value,
                "origin": list(box.origin),
                "dims": list(box.dims),
                "succeeded": box.succeeded,
                "output_pin": list(box.output_pin),
            }
            for box in a.boxes
        ],
        "bbox": {"min": list(a.bbox[0]), "max": list(a.bbox[1])} if a.bbox else None,
        "metrics": metrics.as_dict() if metrics else None,
    }


def import_assembly(doc: Mapping) -> Assembly:
    if doc.get("version") != ASSEMBLY_SCHEMA_VERSION:
        raise GeometryError(f"unsupported assembly version {doc.get('version')!r}")
    defects = tuple(
        Defect(DefectKind(d["kind"]), tuple(tuple(p) for p in d["path"]), bool(d["closed"]))
        for d in doc["defects"]
    )
    braids = tuple(Braid(b["cnot_id"], b["defect_id"], b["crossings"]) for b in doc["braids"])
    boxes = tuple(
        BoxPlacement(
            StateKind(b["state_kind"]),
            tuple(b["origin"]),
            tuple(b["dims"]),
            bool(b["succeeded"]),
            tuple(b["output_pin"]),
        )
        for b in doc["boxes"]
    )
    bbox = doc.get("bbox")
    return Assembly(
        defects,
        braids,
        boxes,
        (tuple(bbox["min"]), tuple(bbox["max"])) if bbox else None,
    )


@lru_cache(maxsize=1)
def load_schema() -> dict:
    with open(SCHEMA_PATH, encoding="utf-8") as fh:
        return json.load(fh)


def validate_assembly_json(doc: Mapping) -> None:
    """Raise ``jsonschema.ValidationError`` if ``doc`` does not match the published schema."""
    jsonschema.validate(instance=doc, schema=load_schema())


def assembly_to_obj(a: Assembly) -> str:
    """Wavefront OBJ with one polyline (``l`` record) per defect."""
    lines = ["# defect-forge assembly", f"# defects: {len(a.defects)}"]
    vertex = 0
    for i, d in enumerate(a.defects):
        lines.append(f"o defect_{i}")
        lines.append(f"# kind {d.kind.value}{' closed' if d.closed else ''}")
        first = vertex + 1
        for x, y, z in d.path:
            lines.append(f"v {x} {y} {z}")
        vertex += len(d.path)
        indices = list(range(first, vertex + 1))
        if d.closed:
            indices.append(first)
        lines.append("l " + " ".join(str(k) for k in indices))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------
def frame_report(
    rules: Sequence[CorrectionRule],
    wire_of: Mapping[str, str],
    measured_on: Mapping[str, str],
    source: Mapping[str, Any],
) -> dict:
    return {
        "version": FRAME_REPORT_VERSION,
        "source": dict(source),
        "logical": {
            "outputs": dict(wire_of),
            "measurements": dict(measured_on),
        },
        "gadgets": {rule.gadget_id: rule.to_dict() for rule in rules},
    }


def load_frame_report(doc: Mapping) -> tuple[list[CorrectionRule], dict, dict, dict]:
    """Rules, logical wire map, measurement map and source stats of a frame report."""
    if doc.get("version") != FRAME_REPORT_VERSION:
        raise FrameError(f"unsupported frame report version {doc.get('version')!r}")
    rules = [CorrectionRule.from_dict(gid, data) for gid, data in doc.get("gadgets", {}).items()]
    rules.sort(key=lambda r: (r.anchor, int(r.gadget_id.lstrip("g") or 0)))
    logical = doc.get("logical", {})
    return (
        rules,
        dict(logical.get("outputs", {})),
        dict(logical.get("measurements", {})),
        dict(doc.get("source", {})),
    )
