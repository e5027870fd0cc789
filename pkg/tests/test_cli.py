import csv
import json
import os

import pytest
from click.testing import CliRunner

from mirrorbench.cli import main

BRICK_CONFIG = {
    "benchmark_type": "low_level",
    "inputs": {"family": {"kind": "brickwork", "n": 3, "depth": 6, "seed": 0}},
    "sampling": {"m1": 4, "m2": 4, "m3": 4},
    "shots": 400,
    "seed": 7,
}


@pytest.fixture
def runner():
    return CliRunner()


def write_config(tmp_path, cfg):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def run_ok(runner, args):
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    return result


def read_csv(path):
    with open(path, newline="") as fp:
        return list(csv.DictReader(fp))


class TestGenerate:
    def test_creates_artifacts(self, runner, tmp_path):
        cfg = write_config(tmp_path, BRICK_CONFIG)
        out = str(tmp_path / "exp")
        run_ok(runner, ["generate", "--config", cfg, "--out", out])
        for name in ("manifest.json", "circuits.jsonl", "config.json"):
            assert os.path.exists(os.path.join(out, name))
        n_lines = sum(1 for _ in open(os.path.join(out, "circuits.jsonl")))
        assert n_lines == 1 + 12

    def test_byte_identical_regeneration(self, runner, tmp_path):
        cfg = write_config(tmp_path, BRICK_CONFIG)
        outs = []
        for name in ("a", "b"):
            out = str(tmp_path / name)
            run_ok(runner, ["generate", "--config", cfg, "--out", out])
            outs.append(open(os.path.join(out, "circuits.jsonl"), "rb").read())
        assert outs[0] == outs[1]

    def test_missing_seed_exits_2(self, runner, tmp_path):
        bad = {k: v for k, v in BRICK_CONFIG.items() if k != "seed"}
        cfg = write_config(tmp_path, bad)
        result = runner.invoke(main, ["generate", "--config", cfg,
                                      "--out", str(tmp_path / "x")])
        assert result.exit_code == 2

    def test_bad_benchmark_type_exits_2(self, runner, tmp_path):
        bad = dict(BRICK_CONFIG, benchmark_type="bogus")
        cfg = write_config(tmp_path, bad)
        result = runner.invoke(main, ["generate", "--config", cfg,
                                      "--out", str(tmp_path / "x")])
        assert result.exit_code == 2


class TestPipeline:
    def _generate(self, runner, tmp_path, cfg=BRICK_CONFIG):
        path = write_config(tmp_path, cfg)
        out = str(tmp_path / "exp")
        run_ok(runner, ["generate", "--config", path, "--out", out])
        return out

    def test_noiseless_estimates_near_one(self, runner, tmp_path):
        out = self._generate(runner, tmp_path)
        run_ok(runner, ["simulate", "--out", out])
        run_ok(runner, ["analyze", "--out", out, "--bootstrap", "50"])
        rows = read_csv(os.path.join(out, "results.csv"))
        assert len(rows) == 1
        assert abs(float(rows[0]["F_hat"]) - 1.0) < 0.05

    def test_analyze_without_shots_exits_3(self, runner, tmp_path):
        out = self._generate(runner, tmp_path)
        result = runner.invoke(main, ["analyze", "--out", out])
        assert result.exit_code == 3

    def test_report_without_results_exits_3(self, runner, tmp_path):
        out = self._generate(runner, tmp_path)
        result = runner.invoke(main, ["report", "--out", out])
        assert result.exit_code == 3

    def test_analyze_deterministic(self, runner, tmp_path):
        out = self._generate(runner, tmp_path)
        run_ok(runner, ["simulate", "--out", out])
        contents = []
        for _ in range(2):
            run_ok(runner, ["analyze", "--out", out, "--bootstrap", "50"])
            contents.append(open(os.path.join(out, "results.csv"), "rb").read())
        assert contents[0] == contents[1]

    def test_fake_uniform_flags_estimate(self, runner, tmp_path):
        cfg = dict(BRICK_CONFIG)
        cfg["inputs"] = {"family": {"kind": "brickwork", "n": 8, "depth": 8,
                                    "seed": 0}}
        out = self._generate(runner, tmp_path, cfg)
        run_ok(runner, ["simulate", "--out", out, "--fake-uniform"])
        run_ok(runner, ["analyze", "--out", out, "--bootstrap", "20"])
        rows = read_csv(os.path.join(out, "results.csv"))
        assert "estimate-undefined" in rows[0]["flags"]
        assert rows[0]["F_clamped"] == "0"

    def test_report_and_oracle(self, runner, tmp_path):
        out = self._generate(runner, tmp_path)
        run_ok(runner, ["simulate", "--out", out])
        run_ok(runner, ["analyze", "--out", out, "--bootstrap", "50"])
        run_ok(runner, ["report", "--out", out])
        assert os.path.exists(os.path.join(out, "report.svg"))
        assert os.path.exists(os.path.join(out, "summary.txt"))
        run_ok(runner, ["oracle", "--out", out])
        rows = read_csv(os.path.join(out, "oracle.csv"))
        assert len(rows) == 1
        assert abs(float(rows[0]["F_exact"]) - 1.0) < 1e-9
        assert float(rows[0]["abs_deviation"]) < 0.05

    def test_noisy_oracle_close(self, runner, tmp_path):
        cfg = dict(BRICK_CONFIG)
        cfg["noise"] = {"lam_1q": 0.002, "lam_2q": 0.02}
        cfg["sampling"] = {"m1": 20, "m2": 20, "m3": 20}
        out = self._generate(runner, tmp_path, cfg)
        run_ok(runner, ["simulate", "--out", out])
        run_ok(runner, ["analyze", "--out", out, "--bootstrap", "50"])
        run_ok(runner, ["oracle", "--out", out])
        rows = read_csv(os.path.join(out, "oracle.csv"))
        assert float(rows[0]["F_exact"]) < 0.99
        assert float(rows[0]["abs_deviation"]) < 0.05


class TestTrotterReport:
    def test_summary_has_three_fidelities(self, runner, tmp_path):
        cfg = {
            "benchmark_type": "low_level",
            "compile_to_native": True,
            "inputs": {"family": {
                "kind": "trotter",
                "hamiltonian": {"type": "max3sat", "n": 3, "r": 2, "seed": 0},
                "orders": [1], "steps_list": [1], "time": 1.0}},
            "sampling": {"m1": 3, "m2": 3, "m3": 3},
            "shots": 200,
            "seed": 1,
        }
        path = write_config(tmp_path, cfg)
        out = str(tmp_path / "exp")
        run_ok(runner, ["generate", "--config", path, "--out", out])
        run_ok(runner, ["simulate", "--out", out])
        run_ok(runner, ["analyze", "--out", out, "--bootstrap", "20"])
        run_ok(runner, ["report", "--out", out])
        summary = open(os.path.join(out, "summary.txt")).read()
        assert "F_alg=" in summary and "F_noise=" in summary \
            and "F_full=" in summary
        assert "F_alg=1.000000" in summary  # diagonal Hamiltonian is exact


class TestSubcircuitConfig:
    def test_subcircuit_pipeline(self, runner, tmp_path):
        cfg = {
            "benchmark_type": "subcircuit",
            "inputs": {"family": {"kind": "brickwork", "n": 6, "depth": 32,
                                  "seed": 0}},
            "shapes": {"shapes": [[2, 4], [3, 8]], "samples_per_shape": 2},
            "sampling": {"m1": 2, "m2": 2, "m3": 2},
            "shots": 100,
            "seed": 2,
        }
        path = write_config(tmp_path, cfg)
        out = str(tmp_path / "exp")
        run_ok(runner, ["generate", "--config", path, "--out", out])
        run_ok(runner, ["simulate", "--out", out])
        run_ok(runner, ["analyze", "--out", out, "--bootstrap", "20"])
        run_ok(runner, ["report", "--out", out])
        rows = read_csv(os.path.join(out, "results.csv"))
        assert len(rows) == 4
        assert {(r["shape_w"], r["shape_d"]) for r in rows} == \
            {("2", "4"), ("3", "8")}
        svg = open(os.path.join(out, "report.svg")).read()
        assert svg.count('class="cell"') == 2


class TestFullStackConfig:
    def test_full_stack_pipeline_with_jobs(self, runner, tmp_path):
        cfg = {
            "benchmark_type": "full_stack",
            "inputs": {"family": {"kind": "qft", "n": 4}},
            "transpile": {"coupling": "line", "reps": 2,
                          "approximation_degree": 1.0},
            "sampling": {"m1": 2, "m2": 2, "m3": 2},
            "shots": 200,
            "seed": 3,
        }
        path = write_config(tmp_path, cfg)
        out = str(tmp_path / "exp")
        run_ok(runner, ["generate", "--config", path, "--out", out])
        run_ok(runner, ["simulate", "--out", out, "--jobs", "2"])
        run_ok(runner, ["analyze", "--out", out, "--bootstrap", "20"])
        rows = read_csv(os.path.join(out, "results.csv"))
        assert len(rows) == 2
        manifest = json.load(open(os.path.join(out, "manifest.json")))
        bench = [r for r in manifest["records"] if r["kind"] == "benchmark"]
        assert all(abs(r["intrinsic_fidelity"] - 1.0) < 1e-9 for r in bench)
