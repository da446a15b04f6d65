"""Integration tests for the command-line interface.

Most tests call ``main`` in-process for speed; one subprocess test covers the
``python -m bellbound`` entry point.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

import bellbound as bb
from bellbound.cli import SURFACE_HEADER, SWEEP_HEADER, main


def write_werner_file(tmp_path, p=0.82):
    path = tmp_path / f"werner_{p}.json"
    path.write_text(json.dumps({"factory": "werner", "p": p}))
    return path


def run_cli(args, capsys):
    code = main([str(a) for a in args])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestAnalyze:
    def test_werner_report(self, tmp_path, capsys):
        code, out, _ = run_cli(["analyze", write_werner_file(tmp_path)], capsys)
        assert code == 0
        report = json.loads(out)
        assert abs(report["b_max"] - 2.319) < 1e-3
        assert np.allclose(report["canonical_diag"], [-0.82, -0.82, -0.82], atol=1e-12)
        assert np.allclose(report["delta_d_canonical_pair"], [0.82, 0.82], atol=1e-12)

    def test_maximally_mixed_is_all_zero(self, tmp_path, capsys):
        path = tmp_path / "mixed.json"
        path.write_text(json.dumps({"factory": "werner", "p": 0.0}))
        code, out, _ = run_cli(["analyze", path], capsys)
        report = json.loads(out)
        assert code == 0
        assert abs(report["b_max"]) < 1e-12
        assert np.allclose(report["bloch"]["T"], np.zeros((3, 3)), atol=1e-12)

    def test_malformed_json_exits_1(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        code, _, err = run_cli(["analyze", path], capsys)
        assert code == 1
        assert "error:" in err

    def test_missing_file_exits_1(self, tmp_path, capsys):
        code, _, err = run_cli(["analyze", tmp_path / "nope.json"], capsys)
        assert code == 1

    def test_invalid_state_exits_1(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"matrix": np.diag([0.5, 0.7, -0.05, -0.05]).tolist()}))
        code, _, err = run_cli(["analyze", path], capsys)
        assert code == 1
        assert "trace" in err


class TestSweep:
    def test_noiseless_matches_closed_form(self, tmp_path, capsys):
        out_file = tmp_path / "sweep.csv"
        code, _, _ = run_cli(
            ["sweep", "--p", 0.82, "--theta-step", 5, "--out", out_file], capsys
        )
        assert code == 0
        lines = out_file.read_text().splitlines()
        assert lines[0] == ",".join(SWEEP_HEADER)
        for line in lines[1:]:
            theta, k_hat, p_hat, dk_hat, dk_theory = map(float, line.split(","))
            assert abs(dk_hat - dk_theory) < 1e-12
            assert abs(dk_hat - 0.82 * abs(np.cos(np.radians(2 * theta)))) < 1e-12
            assert p_hat < 1e-12

    def test_p_zero_has_zero_excess_columns(self, capsys):
        code, out, _ = run_cli(["sweep", "--p", 0, "--theta-step", 15], capsys)
        assert code == 0
        for line in out.splitlines()[1:]:
            _, k_hat, p_hat, dk_hat, dk_theory = map(float, line.split(","))
            assert abs(k_hat) < 1e-12 and abs(dk_hat) < 1e-12 and dk_theory == 0.0

    def test_noisy_sweep_is_bit_reproducible(self, tmp_path, capsys):
        out_file = tmp_path / "noisy.csv"
        args = ["sweep", "--p", 0.82, "--noise", "--seed", 3, "--theta-step", 10,
                "--out", out_file]
        assert run_cli(args, capsys)[0] == 0
        first = out_file.read_bytes()
        assert run_cli(args, capsys)[0] == 0
        assert out_file.read_bytes() == first

    def test_manifest_replay_reproduces_output(self, tmp_path, capsys):
        out_file = tmp_path / "replay.csv"
        args = ["sweep", "--p", 0.45, "--noise", "--seed", 11, "--theta-step", 30,
                "--signal", "xy", "--out", out_file]
        assert run_cli(args, capsys)[0] == 0
        original = out_file.read_bytes()
        manifest = json.loads((tmp_path / "replay.csv.manifest.json").read_text())
        assert run_cli(manifest["replay_argv"], capsys)[0] == 0
        assert out_file.read_bytes() == original

    def test_config_file_precedence(self, tmp_path, capsys):
        config = tmp_path / "conf.txt"
        config.write_text("p = 0.45\ntheta_step = 45\n# comment\n")
        # config file supplies p; flag overrides it
        code, out, _ = run_cli(["sweep", "--config", config], capsys)
        assert code == 0
        first_row = out.splitlines()[1].split(",")
        assert abs(float(first_row[1]) - 0.45) < 1e-12
        code, out, _ = run_cli(["sweep", "--config", config, "--p", 0.82], capsys)
        first_row = out.splitlines()[1].split(",")
        assert abs(float(first_row[1]) - 0.82) < 1e-12

    def test_invalid_params_exit_1(self, capsys):
        assert run_cli(["sweep", "--p", 3.0], capsys)[0] == 1
        assert run_cli(["sweep", "--theta-step", -1], capsys)[0] == 1


class TestSurface:
    def test_saturation_and_bound_columns(self, capsys):
        code, out, _ = run_cli(
            ["surface", "--p", 0.82, "--theta-step", 5, "--theta-prime-step", 5], capsys
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == ",".join(SURFACE_HEADER)
        best = None
        for line in lines[1:]:
            theta, theta_prime, dk2, dkp2, total, bound = map(float, line.split(","))
            assert abs(bound - 1.3448) < 1e-12
            assert total <= bound + 1e-9
            if best is None or total > best[2]:
                best = (theta, theta_prime, total)
        assert best[2] == pytest.approx(1.3448, abs=1e-10)
        assert (best[0], best[1]) == (0.0, 45.0)

    def test_p045_bound_matches_theory(self, capsys):
        code, out, _ = run_cli(
            ["surface", "--p", 0.45, "--theta-step", 45, "--theta-prime-step", 45], capsys
        )
        assert code == 0
        bound = float(out.splitlines()[1].split(",")[5])
        assert bound == pytest.approx(2 * 0.45**2, abs=1e-12)
        assert bound == pytest.approx((1.273 / 2) ** 2, abs=2e-4)


class TestVerify:
    def test_small_fuzz_passes(self, capsys):
        code, out, err = run_cli(["verify", "--trials", 300, "--seed", 1], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["passed"] is True
        assert report["min_slack"] >= -1e-9
        assert report["min_same_meter_slack"] >= -1e-9

    def test_replay_round_trip_reproduces_identical_slack(self, tmp_path, capsys):
        from bellbound.io import write_json
        from bellbound.verify import instance_to_json, run_trial

        instance = run_trial(seed=1, trial=17)
        path = tmp_path / "instance.json"
        write_json(path, instance_to_json(instance))
        code, out, _ = run_cli(["verify", "--replay", path], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["check"]["slack"] == instance.check.slack
        assert report["same_meter_check"]["slack"] == instance.same_meter_check.slack

    def test_replay_of_maximally_mixed_instance_has_zero_slack(self, tmp_path, capsys):
        # forced instance: both sum and bound vanish, slack is exactly 0
        from bellbound.io import complex_matrix_to_json, write_json

        path = tmp_path / "mixed_instance.json"
        write_json(
            path,
            {
                "matrix": complex_matrix_to_json(np.eye(4) / 4),
                "signal_axis": [1.0, 0.0, 0.0],
                "signal_axis_prime": [0.0, 1.0, 0.0],
                "meter_axis": [0.0, 0.0, 1.0],
                "meter_axis_prime": [1.0, 0.0, 0.0],
            },
        )
        code, out, _ = run_cli(["verify", "--replay", path], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["check"]["slack"] == 0.0
        assert report["check"]["bound"] == 0.0

    def test_violation_exits_2_and_dumps_instance(self, tmp_path, capsys, monkeypatch):
        # the bound is a theorem, so a violation can only be injected
        import bellbound.cli as cli_module
        from bellbound.verify import FuzzSummary, run_trial

        instance = run_trial(seed=1, trial=0)
        fake = FuzzSummary(
            trials=1,
            seed=1,
            min_slack=-0.5,
            worst=instance,
            min_same_meter_slack=0.2,
            worst_same_meter=instance,
        )
        monkeypatch.setattr(cli_module, "fuzz_bounds", lambda *a, **k: fake)
        dump = tmp_path / "violation.json"
        code, out, err = run_cli(["verify", "--trials", 1, "--dump", dump], capsys)
        assert code == 2
        assert dump.exists()
        assert "violation" in err

    def test_zero_trials_exit_1(self, capsys):
        assert run_cli(["verify", "--trials", 0], capsys)[0] == 1


class TestSimulate:
    def test_reports_bell_estimate_with_stderr(self, tmp_path, capsys):
        code, out, err = run_cli(
            ["simulate", "--p", 0.82, "--theta-step", 30, "--seed", 5], capsys
        )
        assert code == 0
        report = json.loads(out)
        b = report["bell"]
        assert abs(b["b_max_hat"] - 2.319) < 3 * b["b_max_stderr"] + 1e-9
        assert b["reference_measured"] == {"value": 2.36, "uncertainty": 0.02}
        assert "2.36" in err
        assert len(report["sweep"]) == 2 * 4  # hv and xy sweeps

    def test_p045_reference_comparison(self, capsys):
        code, out, _ = run_cli(["simulate", "--p", 0.45, "--theta-step", 45, "--seed", 5], capsys)
        report = json.loads(out)
        assert report["bell"]["reference_measured"] == {"value": 1.32, "uncertainty": 0.02}
        assert abs(report["bell"]["b_max_theory"] - 1.273) < 1e-3

    def test_zero_duration_exits_1(self, capsys):
        code, _, err = run_cli(["simulate", "--p", 0.82, "--duration", 0], capsys)
        assert code == 1
        assert "zero total" in err

    def test_is_bit_reproducible(self, capsys):
        args = ["simulate", "--p", 0.45, "--theta-step", 45, "--seed", 13]
        first = run_cli(args, capsys)
        second = run_cli(args, capsys)
        assert first[0] == 0 and first[1] == second[1]

    def test_schedule_preparation(self, capsys):
        # the compensated 22/10/13 schedule prepares Werner(0.82)
        target = bb.werner_mixing_model(0.82)
        rates = f"{target.w_singlet / 22.0},{target.w_hh / 10.0},{target.w_vv / 13.0}"
        code, out, _ = run_cli(
            ["simulate", "--visibility", target.visibility, "--schedule-durations",
             "22,10,13", "--schedule-rates", rates, "--theta-step", 45, "--seed", 2],
            capsys,
        )
        assert code == 0
        report = json.loads(out)
        assert abs(report["p"] - 0.82) < 1e-9
        assert abs(report["mixing_model"]["derived_p"] - 0.82) < 1e-9
        assert report["bell"]["reference_measured"]["value"] == 2.36

    def test_uncompensated_schedule_exits_1(self, capsys):
        code, _, err = run_cli(
            ["simulate", "--visibility", 0.9, "--schedule-durations", "22,10,13",
             "--schedule-rates", "1,1,1", "--theta-step", 45],
            capsys,
        )
        assert code == 1
        assert "Werner" in err

    def test_incomplete_schedule_flags_exit_1(self, capsys):
        code, _, err = run_cli(["simulate", "--visibility", 0.9], capsys)
        assert code == 1
        assert "schedule" in err


class TestFilter:
    def test_bell_diagonal_input(self, tmp_path, capsys):
        path = tmp_path / "bd.json"
        path.write_text(json.dumps({"factory": "bell_diagonal", "lambdas": [0.1, 0.2, 0.3, 0.4]}))
        code, out, _ = run_cli(["filter", path], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["iterations"] == 0
        assert abs(report["post_filter_check"]["slack"]) < 1e-6
        f_s = np.array([[c["re"] + 1j * c["im"] for c in row] for row in report["f_signal"]])
        np.testing.assert_allclose(f_s, np.eye(2), atol=1e-12)

    def test_random_state_filters_and_saturates(self, tmp_path, capsys):
        path = tmp_path / "r.json"
        path.write_text(json.dumps({"factory": "random", "seed": 12, "ancilla_dim": 4}))
        code, out, _ = run_cli(["filter", path], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["b_max_out"] >= report["b_max_in"] - 1e-9
        assert abs(report["post_filter_check"]["slack"]) < 1e-6

    def test_pure_product_exits_1(self, tmp_path, capsys):
        matrix = np.zeros((4, 4))
        matrix[0, 0] = 1.0
        path = tmp_path / "prod.json"
        path.write_text(json.dumps({"matrix": matrix.tolist()}))
        code, _, err = run_cli(["filter", path], capsys)
        assert code == 1
        assert "rank deficient" in err


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        path = write_werner_file(tmp_path)
        proc = subprocess.run(
            [sys.executable, "-m", "bellbound", "analyze", str(path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert abs(json.loads(proc.stdout)["b_max"] - 2.319) < 1e-3

    def test_outputs_accompanied_by_manifest(self, tmp_path):
        out_file = tmp_path / "out.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "bellbound", "sweep", "--p", "0.5", "--theta-step", "45",
             "--out", str(out_file)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        manifest = json.loads((tmp_path / "out.csv.manifest.json").read_text())
        assert manifest["outputs"] == [str(out_file)]
        assert manifest["command"] == "sweep"
