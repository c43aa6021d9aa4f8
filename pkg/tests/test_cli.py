import json
import subprocess
import sys

import pytest

from durnet.cli import main
from durnet.minsky import compile_machine
from durnet.textio import parse_machine, parse_net

from helpers import compiled


@pytest.fixture()
def halting_net(tmp_path):
    path = tmp_path / "halting.net"
    cm = compiled("1: jzdec c0 zero 2 else 2\n2: halt")
    from durnet.textio import render_net

    path.write_text(render_net(cm.net))
    return path


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestEnabled:
    def test_impatient_mismatch_is_empty(self, capsys, halting_net):
        code, out, _ = run_cli(capsys, "enabled", "--sem", "li",
                               "--net", str(halting_net),
                               "--marking", "0@c0a 1@c0b")
        assert code == 0 and out == ""

    def test_lists_instances(self, capsys, halting_net):
        code, out, _ = run_cli(capsys, "enabled", "--sem", "gi",
                               "--net", str(halting_net),
                               "--marking", "0@c0a 0@c0b")
        assert code == 0
        (line,) = out.strip().splitlines()
        record = json.loads(line)
        assert record["rule"] == "TI.0" and record["time"] == 0
        assert record["successor"] == "1@c0a 1@c0b"


class TestCheck:
    def test_halting_machine_verdict(self, capsys, halting_net):
        code, out, _ = run_cli(capsys, "check", "--sem", "gi", "--depth", "12",
                               "--net", str(halting_net),
                               "--left", "0@p1", "--right", "0@q1")
        assert code == 0
        assert json.loads(out) == {"verdict": "spoiler", "rounds": 3}

    def test_machine_flag_compiles_on_the_fly(self, capsys, tmp_path):
        mm = tmp_path / "m.mm"
        mm.write_text("1: inc c0 goto 1\n2: halt\n")
        code, out, _ = run_cli(capsys, "check", "--sem", "gi", "--depth", "6",
                               "--machine", str(mm),
                               "--left", "0@p1", "--right", "0@q1")
        assert code == 0
        assert json.loads(out) == {"verdict": "unknown", "depth": 6}

    def test_resource_exit_code(self, capsys, tmp_path):
        mm = tmp_path / "m.mm"
        mm.write_text("1: inc c0 goto 1\n2: halt\n")
        code, _, err = run_cli(capsys, "check", "--sem", "gi", "--depth", "10",
                               "--machine", str(mm), "--max-positions", "5",
                               "--left", "0@p1", "--right", "0@q1")
        assert code == 3 and "resource" in err


class TestCompileAndRun:
    def test_compile_counts_and_sidecar(self, capsys, tmp_path):
        mm = tmp_path / "loop.mm"
        mm.write_text("1: jzdec c0 zero 2 else 2\n2: halt\n")
        out_net = tmp_path / "loop.net"
        code, _, _ = run_cli(capsys, "compile-minsky", str(mm), "-o", str(out_net))
        assert code == 0
        net = parse_net(out_net.read_text())
        assert len(net.rules) == 17
        sidecar = json.loads((tmp_path / "loop.net.sidecar.json").read_text())
        assert sidecar["places"]["p_1"] == "p1"
        assert sidecar["labels"]["τ1"] == "t1"

    def test_compiled_net_round_trips(self, capsys, tmp_path):
        mm = tmp_path / "m.mm"
        mm.write_text("1: inc c1 goto 2\n2: jzdec c1 zero 3 else 1\n3: halt\n")
        out_net = tmp_path / "m.net"
        run_cli(capsys, "compile-minsky", str(mm), "-o", str(out_net))
        cm = compile_machine(parse_machine(mm.read_text()))
        assert parse_net(out_net.read_text()) == cm.net

    def test_run_machine(self, capsys, tmp_path):
        mm = tmp_path / "m.mm"
        mm.write_text("1: inc c0 goto 2\n2: jzdec c0 zero 3 else 2\n3: halt\n")
        code, out, _ = run_cli(capsys, "run-machine", str(mm))
        assert code == 0
        assert json.loads(out) == {
            "status": "halted", "pc": 3, "c0": 0, "c1": 0, "steps": 3}

    def test_run_machine_out_of_fuel(self, capsys, tmp_path):
        mm = tmp_path / "m.mm"
        mm.write_text("1: inc c0 goto 1\n2: halt\n")
        code, out, _ = run_cli(capsys, "run-machine", str(mm), "--fuel", "7")
        assert json.loads(out)["status"] == "out_of_fuel"


class TestReach:
    def test_durational_found_with_witness(self, capsys, tmp_path):
        net = tmp_path / "n.net"
        net.write_text("rule a dur=1 : p -> q\n")
        code, out, _ = run_cli(capsys, "reach", "--sem", "gi",
                               "--net", str(net), "--source", "0@p",
                               "--target", "1@q")
        lines = out.strip().splitlines()
        assert json.loads(lines[0]) == {"result": "found", "length": 1}
        step = json.loads(lines[1])
        assert step["rule"] == "r1" and step["successor_left"] == "1@q"

    def test_durational_not_reachable(self, capsys, tmp_path):
        net = tmp_path / "n.net"
        net.write_text("rule a dur=1 : p -> q\n")
        code, out, _ = run_cli(capsys, "reach", "--sem", "gi",
                               "--net", str(net), "--source", "0@p",
                               "--target", "0@q")
        assert code == 0
        assert json.loads(out) == {"result": "not_reachable"}

    def test_untimed_target(self, capsys, tmp_path):
        net = tmp_path / "n.net"
        net.write_text("rule a dur=2 : p -> q r\n")
        code, out, _ = run_cli(capsys, "reach", "--sem", "li",
                               "--net", str(net), "--source", "0@p",
                               "--untimed-target", "q r")
        assert json.loads(out.splitlines()[0])["result"] == "found"


class TestSimulate:
    def test_deterministic_given_seed(self, capsys, halting_net):
        args = ("simulate", "--sem", "gi", "--net", str(halting_net),
                "--marking", "0@p1", "--steps", "6", "--seed", "5")
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert first == second and first.strip()

    def test_transcript_lines_replay(self, capsys, tmp_path, halting_net):
        out_file = tmp_path / "trace.jsonl"
        run_cli(capsys, "simulate", "--sem", "gi", "--net", str(halting_net),
                "--marking", "0@p1", "--steps", "4", "--seed", "1",
                "--out", str(out_file))
        code, out, _ = run_cli(capsys, "simulate", "--sem", "gi",
                               "--net", str(halting_net),
                               "--marking", "0@p1",
                               "--replay", str(out_file))
        assert code == 0
        final = json.loads(out)["final"]
        last = json.loads(out_file.read_text().strip().splitlines()[-1])
        assert final == last["successor_left"]


class TestExitCodes:
    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["check", "--sem", "gi"])  # missing net and markings
        assert exc.value.code == 1

    def test_parse_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.net"
        bad.write_text("rule a dur=0 : p -> q\n")
        code, _, err = run_cli(capsys, "enabled", "--sem", "gi",
                               "--net", str(bad), "--marking", "0@p")
        assert code == 2 and "parse error" in err

    def test_console_entrypoint(self, tmp_path):
        mm = tmp_path / "m.mm"
        mm.write_text("1: halt\n")
        proc = subprocess.run(
            [sys.executable, "-m", "durnet.cli", "run-machine", str(mm)],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["status"] == "halted"
