from __future__ import annotations

import hashlib
import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from ulc.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestExamples:
    def test_optimize(self, capsys):
        code, out, _ = run(["optimize", "--m", "50"], capsys)
        js = json.loads(out)
        assert code == 0 and float(js["bound"]) > 0.005326

    def test_zaremba(self, capsys):
        code, out, _ = run(["zaremba", "--q", "13", "--m", "2"], capsys)
        assert code == 0 and json.loads(out)["numerators"] == [5, 8]

    def test_witness(self, capsys):
        code, out, _ = run(["witness", "--m", "5", "--tau", "3/2", "--range", "50:200",
                            "--I", "1/5:4/5", "--J", "1/5:4/5"], capsys)
        js = json.loads(out)
        assert code == 0 and len(js["witnesses"]) >= 1

    def test_eval(self, capsys):
        code, out, _ = run(["eval", "--x", "2/7,3/5", "--Q", "4"], capsys)
        assert code == 0 and F(json.loads(out)["value"]) == F(4, 35)

    def test_module_entry_point(self):
        r = subprocess.run([sys.executable, "-m", "ulc", "zaremba", "--q", "13", "--m", "2"],
                           capture_output=True, text=True)
        assert r.returncode == 0 and json.loads(r.stdout)["numerators"] == [5, 8]


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ["optimize", "--m", "0"],
            ["eval", "--x", "0.5", "--Q", "3"],
            ["witness", "--m", "5", "--tau", "1.5", "--range", "50:200", "--I", "1/5:4/5", "--J", "1/5:4/5"],
            ["zaremba", "--q", "13"],
            ["nonsense"],
            ["cf", "--x", "1/3", "--threads", "0"],
            ["optimize", "--m", "5", "--format", "csv"],
            ["build", "--m", "5", "--tau", "3/2", "--d", "1/2", "--beta", "2"],
        ],
    )
    def test_usage(self, argv, capsys):
        code, _, err = run(argv, capsys)
        assert code == 2 and err

    def test_decimal_flag_named(self, capsys):
        _, _, err = run(["eval", "--x", "0.5", "--Q", "3"], capsys)
        assert "--x" in err or "0.5" in err

    def test_verification_failure(self, capsys):
        code, _, err = run(["twisted", "--levels", "3", "--cutoff", "5"], capsys)
        assert code == 1 and "verification failed" in err


class TestOutputs:
    def test_manifest(self, tmp_path, capsys):
        out = tmp_path / "z.json"
        assert main(["zaremba", "--q", "13", "--m", "2", "--out", str(out)]) == 0
        man = json.loads((tmp_path / "z.json.manifest.json").read_text())
        assert man["subcommand"] == "zaremba" and man["exit_code"] == 0
        assert man["sha256"] == hashlib.sha256(out.read_bytes()).hexdigest()
        assert man["params"]["q"] == 13

    def test_config_defaults(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"q": 13, "m": 2}))
        code, out, _ = run(["zaremba", "--config", str(cfg)], capsys)
        assert code == 0 and json.loads(out)["numerators"] == [5, 8]

    def test_csv(self, capsys):
        code, out, _ = run(["eval", "--x", "1/3,2/5", "--profile", "1,5,10", "--format", "csv"], capsys)
        lines = out.strip().splitlines()
        assert code == 0 and lines[0] == "Q,value" and lines[1] == "1,2/15"

    def test_exact_strings(self, capsys):
        _, out, _ = run(["sarith", "padic", "--p", "2", "--beta", "1/10", "--depth", "2"], capsys)
        js = json.loads(out)
        for c in js["certificates"]:
            F(c["value"])
            assert F(4, 5) <= F(c["value"]) <= 1

    def test_timings_only_on_request(self, capsys):
        _, out, _ = run(["optimize", "--m", "5"], capsys)
        assert "elapsed_ms" not in out
        _, out, _ = run(["optimize", "--m", "5", "--timings"], capsys)
        assert "elapsed_ms" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["build", "--m", "5", "--tau", "3/2", "--steps", "3"],
        ["twisted", "--levels", "2"],
        ["sarith", "twisted", "--depth", "2"],
        ["productset", "--sweep", "50:120"],
        ["density", "--T", "500", "--gamma", "1/2", "--m", "3", "--sigma", "1/2"],
        ["witness", "--m", "5", "--tau", "3/2", "--range", "50:2000", "--I", "1/5:4/5", "--J", "1/5:4/5", "--max", "5"],
    ],
)
def test_thread_determinism(argv, tmp_path):
    outs = []
    for t in (1, 3):
        path = tmp_path / f"o{t}.json"
        assert main(argv + ["--threads", str(t), "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
