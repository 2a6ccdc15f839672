import json
import math
import os

import pytest

from phstab.__main__ import run
from phstab._settings import (
    EXIT_BLOW_UP,
    EXIT_CERTIFICATE_REFUSED,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    EXIT_VALIDATION_FAILED,
)

BUMP = ["0", "0.5*(1 + cos(pi*zeta))"]
STRING = {"preset": "string", "parameters": {"k": 1.0}}


def read(out_dir, name):
    with open(os.path.join(out_dir, name)) as report_file:
        return json.load(report_file)


@pytest.fixture
def out_dir(tmp_path):
    return str(tmp_path / "out")


def command(name, config_path, out_dir, *extra):
    return run([name, "--config", config_path, "--out", out_dir] + list(extra))


class TestValidate:
    def test_passes(self, write_config, out_dir):
        assert command("validate", write_config({"system": STRING}), out_dir) == EXIT_OK
        report = read(out_dir, "validation.json")
        assert report["command"] == "validate"
        assert report["validation"]["generator_ok"] is True
        assert report["dissipation"]["kappa"]["b"] == pytest.approx(0.5, abs=1e-8)
        assert "generated_at" in report
        assert report["paper_notes"]
        assert any("one-sided end rows by default" in note for note in report["paper_notes"])
        assert os.path.isfile(os.path.join(out_dir, "phstab-log.txt"))

    def test_rank_deficient_boundary(self, write_config, out_dir):
        system = {
            "n": 2,
            "P0": [[0, 0], [0, 0]],
            "P1": [[0, 1], [1, 0]],
            "W_tilde_B": [[1, 0, 0, 0], [2, 0, 0, 0]],
            "H": [["1", "0"], ["0", "1"]],
        }
        assert command("validate", write_config({"system": system}), out_dir) == EXIT_VALIDATION_FAILED
        assert read(out_dir, "validation.json")["validation"]["generator_ok"] is False

    def test_config_errors(self, tmp_path, write_config, out_dir):
        broken = tmp_path / "broken.json"
        broken.write_text("{")
        assert command("validate", str(broken), out_dir) == EXIT_CONFIG_ERROR
        strict = write_config({"system": STRING, "extra": 1})
        assert command("validate", strict, out_dir, "--strict") == EXIT_CONFIG_ERROR
        assert command("validate", strict, out_dir) == EXIT_OK
        wrong_type = write_config({"system": STRING, "sim": {"t_end": "soon"}})
        assert command("validate", wrong_type, out_dir) == EXIT_CONFIG_ERROR

    def test_no_command(self):
        assert run([]) == EXIT_CONFIG_ERROR


class TestSimulate:
    def test_zero_horizon(self, write_config, out_dir):
        config = write_config({"system": STRING, "sim": {"t_end": 0, "x0": BUMP, "N": 32}})
        assert command("simulate", config, out_dir) == EXIT_OK
        with open(os.path.join(out_dir, "trajectory.csv")) as csv_file:
            lines = csv_file.read().splitlines()
        assert lines[0] == "t,E,trace_a_sq,trace_b_sq"
        assert len(lines) == 2
        summary = read(out_dir, "simulation_summary.json")
        assert summary["simulation"]["records"] == 1
        assert summary["simulation"]["compatibility"]["ok"] is True

    def test_json_only(self, write_config, out_dir):
        config = write_config(
            {
                "system": STRING,
                "sim": {"t_end": 0.5, "x0": BUMP, "N": 32},
                "output": {"formats": ["json"]},
            }
        )
        assert command("simulate", config, out_dir) == EXIT_OK
        assert not os.path.exists(os.path.join(out_dir, "trajectory.csv"))
        checks = read(out_dir, "simulation_summary.json")["simulation"]["checks"]
        assert checks["growth_bound"]["passed"] is True
        assert checks["contraction"]["passed"] is True

    def test_damped_string(self, write_config, out_dir):
        config = write_config({"system": STRING, "sim": {"t_end": 1, "x0": BUMP, "N": 64}})
        assert command("simulate", config, out_dir) == EXIT_OK
        assert os.path.isfile(os.path.join(out_dir, "trajectory.csv"))
        simulation = read(out_dir, "simulation_summary.json")["simulation"]
        assert simulation["final_energy"] < simulation["initial_energy"]

    @pytest.mark.slow
    def test_conservative_string(self, write_config, out_dir):
        system = {"preset": "string", "parameters": {"k": 0.0}}
        x0 = ["0", "%r*cos(%r*zeta)" % (math.pi / 2.0, math.pi / 2.0)]
        config = write_config({"system": system, "sim": {"t_end": 5, "x0": x0, "N": 200}})
        assert command("simulate", config, out_dir) == EXIT_OK
        assert read(out_dir, "simulation_summary.json")["simulation"]["relative_drift"] < 1e-4

    def test_blow_up(self, write_config, out_dir):
        system = {
            "n": 2,
            "P0": [[0, 0], [0, 0]],
            "P1": [[0, 1], [1, 0]],
            "W_tilde_B": [[0, 1, 0, 0], [0, 0, 1, 0]],
            "H": [["1", "0"], ["0", "1"]],
            "K": [["20", "0"], ["0", "20"]],
        }
        config = write_config({"system": system, "sim": {"t_end": 5, "x0": BUMP, "N": 32}})
        assert command("simulate", config, out_dir) == EXIT_BLOW_UP

    def test_bad_initial_state(self, write_config, out_dir):
        config = write_config({"system": STRING, "sim": {"t_end": 1, "x0": ["0", "1 +"]}})
        assert command("simulate", config, out_dir) == EXIT_CONFIG_ERROR


class TestCertify:
    def test_certificate(self, write_config, out_dir):
        config = write_config({"system": STRING, "certify": {"tau_grid": [4.0]}})
        assert command("certify", config, out_dir) == EXIT_OK
        report = read(out_dir, "certificate.json")
        certificate = report["certificate"]
        assert certificate["tau"] == 4.0
        assert certificate["omega"] == pytest.approx(math.log(1.0 / 3.0) / 4.0)
        assert certificate["L"] == pytest.approx(3.0)
        assert report["kappa"] == pytest.approx(0.5, abs=1e-8)
        assert len(report["tau_table"]) == 1

    def test_refused_without_dissipation(self, write_config, out_dir):
        config = write_config(
            {"system": {"preset": "string", "parameters": {"k": 0.0}}, "certify": {"tau_grid": [4.0]}}
        )
        assert command("certify", config, out_dir) == EXIT_CERTIFICATE_REFUSED
        refused = read(out_dir, "certificate.json")["refused"]
        assert refused["hypothesis"] == "boundary_dissipation"
        assert refused["M_tau"][0]["M_tau"] == pytest.approx(1.0)

    def test_refused_without_contractivity(self, write_config, out_dir):
        system = {"preset": "string", "parameters": {"rho": "1/(1 + 0.1*t)"}}
        config = write_config({"system": system, "certify": {"tau_grid": [4.0]}})
        assert command("certify", config, out_dir) == EXIT_CERTIFICATE_REFUSED
        assert read(out_dir, "certificate.json")["refused"]["hypothesis"] == "contractivity_constraint"

    @pytest.mark.slow
    def test_cross_check(self, write_config, out_dir):
        config = write_config(
            {
                "system": STRING,
                "certify": {"tau_grid": [4.0], "cross_check": True},
                "sim": {"t_end": 5.5, "x0": BUMP, "N": 100},
            }
        )
        assert command("certify", config, out_dir) == EXIT_OK
        cross_check = read(out_dir, "certificate.json")["cross_check"]
        assert cross_check["soundness"]["passed"] is True
        assert cross_check["observability"]["passed"] is True
        assert os.path.isfile(os.path.join(out_dir, "observability.csv"))


class TestCounterexample:
    def test_growing(self, out_dir):
        assert run(["counterexample", "--alpha", "0.6", "--periods", "20", "--out", out_dir]) == EXIT_OK
        result = read(out_dir, "counterexample.json")["counterexample"]
        assert result["verdict"] == "growing"
        assert result["claimed_factor"] == pytest.approx(1.2)
        assert result["envelope"]["holds"] is True
        with open(os.path.join(out_dir, "growth.csv")) as csv_file:
            assert len(csv_file.read().splitlines()) == 22

    def test_decaying_from_config(self, write_config, out_dir):
        config = write_config({"counterexample": {"alpha": 0.1, "periods": 20, "cross_check": True}})
        assert command("counterexample", config, out_dir) == EXIT_OK
        result = read(out_dir, "counterexample.json")["counterexample"]
        assert result["verdict"] == "decaying"
        assert result["riemann_cross_check"]["relative_difference"] < 1e-6

    def test_period_count(self, out_dir):
        assert run(["counterexample", "--periods", "0", "--out", out_dir]) == EXIT_CONFIG_ERROR


class TestReport:
    def test_gathers_reports(self, write_config, out_dir):
        assert command("validate", write_config({"system": STRING}), out_dir) == EXIT_OK
        assert run(["counterexample", "--alpha", "0.6", "--periods", "5", "--out", out_dir]) == EXIT_OK
        assert run(["report", "--out", out_dir]) == EXIT_OK
        report = read(out_dir, "report.json")
        assert sorted(report["reports"]) == ["counterexample.json", "validation.json"]
        assert "paper_notes" not in report["reports"]["validation.json"]
        assert report["series"] == ["growth.csv"]

    def test_missing_directory(self, tmp_path):
        assert run(["report", "--out", str(tmp_path / "missing")]) == EXIT_CONFIG_ERROR
