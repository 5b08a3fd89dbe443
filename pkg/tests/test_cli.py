import argparse
import json

import pytest

from cli import EXIT_CAPACITY, EXIT_OK, EXIT_STAGE, EXIT_VERIFY, box_dims, main


@pytest.fixture
def circuit_file(tmp_path, db_dir):
    def _copy(name):
        path = tmp_path / name
        path.write_text((db_dir / name).read_text())
        return path

    return _copy


class TestCompileCommand:
    def test_writes_artifacts(self, circuit_file, tmp_path, capsys):
        src = circuit_file("t_gate.qc")
        out = tmp_path / "build"
        assert main(["compile", "--input", str(src), "--out-dir", str(out), "--obj"]) == EXIT_OK
        printed = capsys.readouterr().out.split()
        assert str(out / "t_gate.assembly.json") in printed
        assert (out / "t_gate.obj").exists()
        report = json.loads((out / "t_gate.report.json").read_text())
        assert report["t_count"] == 1

    def test_stop_after(self, circuit_file, tmp_path):
        src = circuit_file("t_gate.qc")
        assert main(["compile", "--input", str(src), "--out-dir", str(tmp_path), "--stop-after", "icm"]) == EXIT_OK
        assert (tmp_path / "t_gate.frame.json").exists()
        assert not (tmp_path / "t_gate.wires.json").exists()

    def test_distillation_options(self, circuit_file, tmp_path):
        src = circuit_file("ten_t.qc")
        args = [
            "compile", "--input", str(src), "--out-dir", str(tmp_path),
            "--distill-p-a", "1", "--box-dims-a", "4x4x4", "--target-reliability", "0.9",
        ]
        assert main(args) == EXIT_OK
        report = json.loads((tmp_path / "ten_t.report.json").read_text())
        assert report["box_counts"]["A"] == 10

    def test_syntax_error(self, tmp_path, capsys):
        src = tmp_path / "bad.qc"
        src.write_text("input q\nwiggle q\n")
        assert main(["compile", "--input", str(src), "--out-dir", str(tmp_path)]) == EXIT_STAGE
        assert capsys.readouterr().err.startswith("error[parse]")

    def test_missing_input(self, tmp_path, capsys):
        assert main(["compile", "--input", str(tmp_path / "nope.qc")]) == EXIT_STAGE
        assert "error[input]" in capsys.readouterr().err

    def test_bad_config(self, circuit_file, tmp_path, capsys):
        src = circuit_file("t_gate.qc")
        code = main(["compile", "--input", str(src), "--out-dir", str(tmp_path), "--target-reliability", "1.5"])
        assert code == EXIT_STAGE
        assert "error[config]" in capsys.readouterr().err


class TestVerifyCommand:
    def test_pass(self, circuit_file, capsys):
        assert main(["verify", "--input", str(circuit_file("t_gate.qc"))]) == EXIT_OK
        assert capsys.readouterr().out.splitlines()[-1] == "PASS"

    def test_json(self, circuit_file, capsys):
        assert main(["verify", "--input", str(circuit_file("s_gate.qc")), "--json", "--trials", "3"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["passed"] and len(doc["branches"]) == 6

    def test_corrupted_lowering(self, circuit_file, capsys):
        circuit_file("corrupted_t_gadget.frame.json")
        icm = circuit_file("corrupted_t_gadget.icm.qc")
        code = main(["verify", "--input", str(circuit_file("t_gate.qc")), "--against", str(icm)])
        assert code == EXIT_VERIFY
        captured = capsys.readouterr()
        assert "FAIL" in captured.out
        assert "FAIL branch" in captured.err

    def test_against_without_frame(self, circuit_file, tmp_path, capsys):
        icm = tmp_path / "lonely.icm.qc"
        icm.write_text("input q\noutput q\n")
        code = main(["verify", "--input", str(circuit_file("t_gate.qc")), "--against", str(icm)])
        assert code == EXIT_STAGE
        assert "error[input]" in capsys.readouterr().err

    def test_capacity(self, circuit_file, capsys):
        code = main(["verify", "--input", str(circuit_file("t_gate.qc")), "--max-qubits", "3"])
        assert code == EXIT_CAPACITY
        assert capsys.readouterr().err.startswith("error[oracle]")


class TestStatsCommand:
    def test_text(self, circuit_file, capsys):
        assert main(["stats", "--input", str(circuit_file("ten_t.qc"))]) == EXIT_OK
        out = capsys.readouterr().out
        assert "t_count: 10" in out
        assert "A: required 10" in out

    def test_json(self, circuit_file, capsys):
        assert main(["stats", "--input", str(circuit_file("ten_t.qc")), "--json"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["required"] == {"A": 10, "Y": 10}


@pytest.mark.parametrize("text", ["8,6,6", "8x6x6"])
def test_box_dims(text):
    assert box_dims(text) == (8, 6, 6)


def test_box_dims_rejects_two_values():
    with pytest.raises(argparse.ArgumentTypeError):
        box_dims("8,6")
