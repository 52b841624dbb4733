from __future__ import annotations

import json
import subprocess
import sys

import pytest

from gradelic.cli import main, read_formula
from gradelic.formula import parse
from gradelic.structures import dump_lts, load_lts, make_lts


def write_star(tmp_path, labels):
    states = [("r", set())] + [(f"c{i}", lab) for i, lab in enumerate(labels)]
    edges = [("r", f"c{i}") for i in range(len(labels))] + [(f"c{i}", f"c{i}") for i in range(len(labels))]
    path = tmp_path / "lts.json"
    path.write_text(dump_lts(make_lts(states, edges, "r", ["p"])))
    return str(path)


# ===== Formula input =====


class TestFormulaInput:
    def test_inline(self):
        assert read_formula("E>=2 X p") == parse("E>=2 X p")

    def test_file_with_comments(self, tmp_path):
        f = tmp_path / "f.gctl"
        f.write_text("# two p-sons\nE>=2 X p  # trailing\n& A G true\n")
        assert read_formula(str(f)) == parse("E>=2 X p & A G true")


# ===== check =====


class TestCheck:
    def test_exit_codes(self, tmp_path, capsys):
        one = write_star(tmp_path, [{"p"}, set()])
        assert main(["check", one, "E>=2 X p"]) == 1
        assert capsys.readouterr().out.strip() == "false"
        two = write_star(tmp_path, [{"p"}, {"p"}])
        assert main(["check", two, "E>=2 X p"]) == 0
        assert capsys.readouterr().out.strip() == "true"

    def test_explain_and_state(self, tmp_path, capsys):
        path = write_star(tmp_path, [{"p"}])
        assert main(["check", path, "p", "--state", "c0", "--explain"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("true") and "game positions:" in out

    @pytest.mark.parametrize(
        "argv",
        [
            ["check", "/nonexistent.json", "p"],
            ["check", "LTS", "E>=2 X ("],
            ["check", "LTS", "p", "--state", "zz"],
        ],
    )
    def test_input_errors(self, tmp_path, capsys, argv):
        path = write_star(tmp_path, [{"p"}])
        argv = [path if a == "LTS" else a for a in argv]
        assert main(argv) == 2
        assert "error" in capsys.readouterr().err

    def test_bad_lts_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"states": []}')
        assert main(["check", str(bad), "p"]) == 2


# ===== sat =====


class TestSat:
    def test_sat_prints_witness(self, capsys):
        assert main(["sat", "E X p & E X !p"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("sat via")
        witness = load_lts(out[out.index("{"):])
        assert witness.degree(witness.initial) == 2

    def test_unsat(self, capsys):
        assert main(["sat", "p & !p", "--mode", "full"]) == 1
        assert "unsat via full" in capsys.readouterr().out

    def test_unsat_at_bound(self, capsys):
        assert main(["sat", "E X p & E X !p", "--degree", "1", "--mode", "full"]) == 3
        assert "unsat-at-bound" in capsys.readouterr().out

    def test_witness_file(self, tmp_path):
        out = tmp_path / "w.json"
        assert main(["sat", "p", "--witness", str(out)]) == 0
        assert "p" in load_lts(out.read_text()).label("w0")

    def test_bad_degree(self):
        assert main(["sat", "p", "--degree", "0"]) == 2


# ===== dump and metrics =====


class TestDump:
    def test_automaton_json(self, tmp_path):
        out = tmp_path / "a.json"
        assert main(["dump", "automaton", "E X p", "-o", str(out)]) == 0
        assert "initial" in json.loads(out.read_text())

    def test_game_dot(self, tmp_path, capsys):
        path = write_star(tmp_path, [{"p"}])
        assert main(["dump", "game", "E X p", "--lts", path, "--format", "dot"]) == 0
        assert capsys.readouterr().out.startswith("digraph")

    def test_game_needs_lts(self):
        assert main(["dump", "game", "E X p"]) == 2

    def test_metrics(self, capsys):
        assert main(["metrics", "E>=2 X p", "--hesitancy", "2"]) == 0
        out = capsys.readouterr().out
        assert "step g=2" in out and "violations=0" in out


# ===== compare =====


class TestCompare:
    def test_clean_run(self, capsys):
        assert main(["compare", "--fragment", "ctlstar-g1", "--cases", "15"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("seed: 7")

    def test_fault_injection_is_caught(self, capsys):
        assert main(["compare", "--fragment", "ctlstar-g1", "--cases", "15", "--inject-fault"]) == 1
        assert "mismatch" in capsys.readouterr().out.lower()

    def test_unknown_fragment(self):
        assert main(["compare", "--fragment", "nope"]) == 2

    def test_deterministic_output(self):
        cmd = [sys.executable, "-m", "gradelic", "compare", "--fragment", "exact", "--cases", "10", "--seed", "3"]
        runs = [subprocess.run(cmd, capture_output=True, check=False).stdout for _ in range(2)]
        assert runs[0] == runs[1] and runs[0].startswith(b"seed: 3")
