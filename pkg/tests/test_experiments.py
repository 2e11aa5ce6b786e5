import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from noisyqpc import experiments
from noisyqpc.cli import main
from noisyqpc.experiments import COLUMNS, ExperimentSpec, SpecError, run_experiment, verdict

DATA = Path(__file__).resolve().parent.parent / "data"


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestSpec:
    @pytest.mark.parametrize("kwargs", [
        dict(scenario="nope"), dict(scenario="epr-sweep", trials=0), dict(scenario="epr-sweep", p=[]),
        dict(scenario="epr-sweep", p=[1.5]), dict(scenario="epr-sweep", n=[0]), dict(scenario="epr-sweep", noise="x"),
        dict(scenario="epr-sweep", threshold=2.0), dict(scenario="dishonest-charlie", strategy="bad"),
        dict(scenario="epr-sweep", workers=0),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(SpecError):
            ExperimentSpec(**kwargs).validate()

    def test_from_mapping(self):
        spec = ExperimentSpec.from_mapping({"scenario": "epr-sweep", "p": 0.1, "n": [3, 4]})
        assert spec.p == [0.1] and spec.n == [3, 4]
        with pytest.raises(SpecError):
            ExperimentSpec.from_mapping({"scenario": "epr-sweep", "bogus": 1})


class TestVerdict:
    def test_pass_and_fail(self):
        assert verdict(0.5, 0.5, 100)[1] == "pass"
        assert verdict(0.8, 0.5, 10000)[1] == "fail"
        assert verdict(0.3, None, 10)[1] == "n/a"

    def test_stderr(self):
        se, _ = verdict(0.25, 0.25, 10000)
        assert se == pytest.approx(0.0043301, abs=1e-7)

    def test_degenerate_estimate_uses_model_sigma(self):
        # zero hits out of 100 when the model says 1%: well within 3 sigma
        assert verdict(0.0, 0.01, 100)[1] == "pass"
        assert verdict(0.0, 0.2, 100)[1] == "fail"


class TestRunExperiment:
    def test_epr_sweep(self):
        text, rows = run_experiment(ExperimentSpec("epr-sweep", p=[0.0, 0.05], n=[10], trials=20000, seed=1))
        assert text.splitlines()[0] == ",".join(COLUMNS)
        assert rows[0]["empirical"] == 0.0 and rows[0]["analytic"] == 0.0
        assert rows[1]["analytic"] == pytest.approx(0.486316, abs=1e-6)
        assert all(r["verdict"] == "pass" for r in rows)
        assert [r["seed"] for r in rows] == [1, 2]

    def test_bitphase_grid(self):
        _, rows = run_experiment(ExperimentSpec("epr-sweep", p=[0.1], q=[0.0, 0.2], n=[3], noise="bitphase",
                                                trials=5000))
        assert [r["q"] for r in rows] == [0.0, 0.2]
        assert rows[0]["analytic"] == rows[1]["analytic"]

    def test_css_qpc_noiseless(self):
        _, rows = run_experiment(ExperimentSpec("css-qpc", p=[0.0], n=[1, 3], trials=200))
        assert all(r["empirical"] == 0.0 and r["verdict"] == "pass" for r in rows)

    def test_css_keydist(self):
        _, rows = run_experiment(ExperimentSpec("css-keydist", p=[0.05], n=[2], trials=1000, seed=3))
        assert rows[0]["verdict"] == "pass"

    def test_eve_attack_both_protocols(self):
        _, rows = run_experiment(ExperimentSpec("eve-attack", n=[1, 4], trials=5000, seed=4))
        assert [r["analytic"] for r in rows] == pytest.approx([0.25, 1 - 0.75**4])
        _, rows = run_experiment(ExperimentSpec("eve-attack", n=[20], trials=500, protocol="css", seed=5))
        assert rows[0]["verdict"] == "pass"

    def test_dishonest_charlie(self):
        _, rows = run_experiment(ExperimentSpec("dishonest-charlie", m=[1, 4], n=[4], trials=5000, seed=6))
        assert [r["analytic"] for r in rows] == pytest.approx([0.5, 0.8])
        assert all(r["verdict"] == "pass" for r in rows)
        assert rows[0]["p"] is None

    def test_dishonest_charlie_full_protocol(self):
        _, rows = run_experiment(ExperimentSpec("dishonest-charlie", m=[2], n=[1], trials=300, full_protocol=True))
        assert rows[0]["verdict"] == "pass"

    def test_custom_code_file(self):
        _, rows = run_experiment(ExperimentSpec("css-keydist", p=[0.02], n=[1], trials=300, code=str(DATA / "steane.code")))
        assert rows[0]["verdict"] == "pass"

    def test_deterministic_and_parallel_identical(self):
        spec = ExperimentSpec("epr-sweep", p=[0.05, 0.1], n=[1, 5], trials=3000, seed=9)
        a, _ = run_experiment(spec)
        b, _ = run_experiment(spec)
        c, _ = run_experiment(ExperimentSpec(**{**spec.__dict__, "workers": 2}))
        assert a == b == c

    def test_writes_only_complete_results(self, tmp_path, monkeypatch):
        out = tmp_path / "res.csv"
        out.write_text("old\n")
        real = experiments.run_cell

        def flaky(spec, index, cell):
            if index == 1:
                raise RuntimeError("boom")
            return real(spec, index, cell)

        monkeypatch.setattr(experiments, "run_cell", flaky)
        with pytest.raises(RuntimeError):
            run_experiment(ExperimentSpec("epr-sweep", p=[0.0, 0.1], trials=10, out=str(out)))
        assert out.read_text() == "old\n"
        assert list(tmp_path.iterdir()) == [out]

    def test_writes_file(self, tmp_path):
        out = tmp_path / "res.csv"
        text, _ = run_experiment(ExperimentSpec("epr-sweep", trials=10, out=str(out)))
        assert out.read_text() == text


class TestCli:
    def test_success_to_stdout(self, capsys):
        assert main(["epr-sweep", "--p", "0", "0.05", "--n", "10", "--trials", "2000", "--seed", "3"]) == 0
        rows = rows_of(capsys.readouterr().out)
        assert [r["p"] for r in rows] == ["0", "0.05"]
        assert rows[0]["empirical"] == "0.000000"

    def test_statistical_failure_exits_1(self, capsys, monkeypatch):
        # a wrong closed form makes every row fail its 3-sigma check
        monkeypatch.setattr(experiments.css_qpc, "predict_caught_probability", lambda m, s, r=0.5: 0.0)
        assert main(["dishonest-charlie", "--m", "4", "--trials", "2000"]) == 1
        assert "outside" in capsys.readouterr().err

    @pytest.mark.parametrize("argv", [
        ["bogus"], ["epr-sweep", "--p", "2"], ["epr-sweep", "--trials", "0"], ["epr-sweep", "--n", "x"],
        ["css-keydist", "--code", "/nonexistent/file"], [],
    ])
    def test_usage_errors_exit_2(self, argv, capsys):
        try:
            code = main(argv)
        except SystemExit as exc:
            code = exc.code
        assert code == 2

    def test_config_file_and_override(self, tmp_path, capsys):
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps({"p": [0.05], "n": [4], "trials": 1000, "seed": 11}))
        assert main(["epr-sweep", "--config", str(cfg), "--n", "2"]) == 0
        rows = rows_of(capsys.readouterr().out)
        assert rows[0]["n"] == "2" and rows[0]["trials"] == "1000" and rows[0]["seed"] == "11"

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "exp.json"
        cfg.write_text("[1, 2]")
        assert main(["epr-sweep", "--config", str(cfg)]) == 2

    def test_out_file_and_module_entry(self, tmp_path):
        out = tmp_path / "a.csv"
        proc = subprocess.run([sys.executable, "-m", "noisyqpc", "css-qpc", "--n", "1", "--trials", "50",
                               "--out", str(out)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout == ""
        assert out.read_text().startswith("scenario,p,q,n,m,trials")
