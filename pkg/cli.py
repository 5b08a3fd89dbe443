#!/usr/bin/env python3
"""
Command-line driver for defect-forge.

    python cli.py compile --input circuits/adder.qc --out-dir build/
    python cli.py verify --input db/t_gate.qc
    python cli.py stats --input db/ten_t.qc --json

Exit codes: 0 success, 1 stage failure, 2 verification failure, 3 capacity exceeded.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import jsonschema
from pydantic import ValidationError

from forge.errors import CapacityExceeded, ForgeError
from forge.pipeline import (
    configure_logging,
    circuit_stats,
    run_compile,
    sibling_frame,
    verify_source,
)
from models.reports import DistillSettings, PipelineConfig, Stage

EXIT_OK = 0
EXIT_STAGE = 1
EXIT_VERIFY = 2
EXIT_CAPACITY = 3


def box_dims(text: str) -> tuple[int, int, int]:
    parts = text.replace("x", ",").split(",")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"box dims must look like 8,6,6, got {text!r}") from None
    if len(dims) != 3:
        raise argparse.ArgumentTypeError(f"box dims need three integers, got {text!r}")
    return dims


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="defect-forge",
        description="Lower Clifford+T circuits to ICM form, braided-defect geometry and distillation plans.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, type=Path, help="circuit in .qc text format")
    common.add_argument("--out-dir", type=Path, default=Path("."), help="artifact directory")
    common.add_argument("--target-reliability", type=float, default=None)
    common.add_argument("--distill-p-a", type=float, default=None, help="A box success probability")
    common.add_argument("--distill-p-y", type=float, default=None, help="Y box success probability")
    common.add_argument("--box-dims-a", type=box_dims, default=None, metavar="DX,DY,DZ")
    common.add_argument("--box-dims-y", type=box_dims, default=None, metavar="DX,DY,DZ")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument(
        "--stop-after", choices=[s.value for s in Stage], default=Stage.ASSEMBLY.value
    )
    common.add_argument("--max-qubits", type=int, default=None)

    compile_cmd = sub.add_parser("compile", parents=[common], help="run the pipeline and write artifacts")
    compile_cmd.add_argument("--obj", action="store_true", help="also write <name>.obj")
    compile_cmd.add_argument(
        "--record-timings", action="store_true", help="store per-stage timings in the report"
    )

    verify_cmd = sub.add_parser("verify", parents=[common], help="check ICM lowering against the oracle")
    verify_cmd.add_argument(
        "--against", type=Path, default=None, help="ICM circuit (.icm.qc) to check instead of compiling"
    )
    verify_cmd.add_argument("--max-branches", type=int, default=None)
    verify_cmd.add_argument("--trials", type=int, default=1, help="random input assignments")
    verify_cmd.add_argument("--json", action="store_true", help="print the branch table as JSON")

    stats_cmd = sub.add_parser("stats", parents=[common], help="print T count and distillation needs")
    stats_cmd.add_argument("--json", action="store_true", help="print JSON instead of text")
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    distill = {
        key: value
        for key, value in (
            ("p_a", args.distill_p_a),
            ("p_y", args.distill_p_y),
            ("box_dims_a", args.box_dims_a),
            ("box_dims_y", args.box_dims_y),
        )
        if value is not None
    }
    fields = {
        "input_path": args.input,
        "output_dir": args.out_dir,
        "distill": DistillSettings(**distill),
        "seed": args.seed,
        "stop_after": Stage(args.stop_after),
        "write_obj": getattr(args, "obj", False),
        "record_timings": getattr(args, "record_timings", False),
    }
    if args.target_reliability is not None:
        fields["reliability_target"] = args.target_reliability
    if args.max_qubits is not None:
        fields["max_qubits"] = args.max_qubits
    if getattr(args, "max_branches", None) is not None:
        fields["max_branches"] = args.max_branches
    return PipelineConfig(**fields)


# --------------------------------------------------------------
def cmd_compile(cfg: PipelineConfig) -> int:
    result = run_compile(cfg)
    for filename in result.files():
        print(Path(cfg.output_dir) / filename)
    return EXIT_OK


def cmd_verify(cfg: PipelineConfig, args: argparse.Namespace) -> int:
    text = Path(cfg.input_path).read_text(encoding="utf-8")
    against = frame_doc = None
    if args.against is not None:
        against = args.against.read_text(encoding="utf-8")
        frame_path = sibling_frame(args.against)
        if frame_path is None:
            raise FileNotFoundError(f"no frame report next to {args.against}")
        frame_doc = json.loads(frame_path.read_text(encoding="utf-8"))
    result = verify_source(text, cfg, against, frame_doc, trials=args.trials)
    if args.json:
        print(json.dumps(result.as_dict(), indent=2))
    else:
        print(result.table())
    if not result.passed:
        for failure in result.failures:
            print(f"FAIL branch {failure.key} (trial {failure.trial})", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_stats(cfg: PipelineConfig, args: argparse.Namespace) -> int:
    stats = circuit_stats(Path(cfg.input_path).read_text(encoding="utf-8"), cfg)
    if args.json:
        print(json.dumps(stats.model_dump(mode="json"), indent=2))
        return EXIT_OK
    print(f"t_count: {stats.t_count}")
    print(f"qubits: {stats.qubit_count}, ops: {stats.op_count}")
    for kind in ("A", "Y"):
        print(f"{kind}: required {stats.required[kind]}, boxes {stats.boxes[kind]}")
    print(f"reliability target: {stats.reliability_target}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "compile":
            return cmd_compile(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args)
        return cmd_stats(cfg, args)
    except CapacityExceeded as exc:
        print(f"error[{exc.stage}]: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ForgeError as exc:
        print(f"error[{exc.stage}]: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except ValidationError as exc:
        print(f"error[config]: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except jsonschema.ValidationError as exc:
        print(f"error[assembly]: schema check failed: {exc.message}", file=sys.stderr)
        return EXIT_STAGE
    except OSError as exc:
        print(f"error[input]: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
