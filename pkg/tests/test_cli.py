"""End-to-end tests of the command-line interface and its artifacts."""

import json
import subprocess
import sys

import pytest

from anofdm.cli import main

CSV_HEADER = "sweep_value,scheme,receiver,r_bob_bps,r_eve_bps,r_sec_bps,stderr_bps,trials"


def run_cli(*args):
    return main(list(args))


class TestFigureCommand:
    def test_csv_header_contract(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("figure", "--which", "fig5", "--seed", "42", "--trials", "2", "--out", str(out)) == 0
        lines = (out / "results.csv").read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert (out / "metadata.json").exists()
        assert (out / "run.log").exists()

    def test_byte_identical_reruns_and_workers(self, tmp_path):
        outs = []
        for name, workers in [("a", "1"), ("b", "1"), ("c", "4")]:
            out = tmp_path / name
            code = run_cli(
                "figure", "--which", "fig5", "--seed", "7", "--trials", "3",
                "--workers", workers, "--out", str(out),
            )
            assert code == 0
            outs.append((out / "results.csv").read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_metadata_assumed_flags(self, tmp_path):
        out = tmp_path / "out"
        run_cli("figure", "--which", "fig3", "--trials", "2", "--out", str(out))
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["preset"] == "fig3"
        assert meta["assumed"]["snr_db"] is False  # stated for fig3
        assert meta["assumed"]["n_sub"] is True
        assert meta["assumed"]["trials"] is False  # user override
        assert meta["parameters"]["trials"] == 2

    def test_metadata_roundtrips_byte_identically(self, tmp_path):
        first = tmp_path / "first"
        run_cli("figure", "--which", "fig5", "--seed", "9", "--trials", "2", "--out", str(first))
        second = tmp_path / "second"
        assert run_cli("run", "--config", str(first / "metadata.json"), "--out", str(second)) == 0
        assert (first / "results.csv").read_bytes() == (second / "results.csv").read_bytes()

    def test_approx_rows_in_fig1(self, tmp_path):
        out = tmp_path / "out"
        run_cli(
            "figure", "--which", "fig1", "--trials", "2", "--out", str(out),
            "--override", "sweep_values=0.5",
        )
        body = (out / "results.csv").read_text()
        assert "joint_approx" in body


class TestRunAndSweep:
    def test_config_file_with_override(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text(
            "n_sub = 32\nn_cp = 8\nl_bob = 2\nl_eve = 4\ntrials = 2\nsnr_db = 20.0\n"
            'schemes = ["unknown_csi", "no_an"]\n'
        )
        out = tmp_path / "out"
        code = run_cli(
            "run", "--config", str(cfg), "--override", "snr_db=10", "--out", str(out)
        )
        assert code == 0
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["parameters"]["snr_db"] == 10.0
        assert meta["parameters"]["n_sub"] == 32
        assert meta["parameters"]["schemes"] == ["unknown_csi", "no_an"]

    def test_sweep_axis_and_values(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli(
            "sweep", "--axis", "L_B", "--values", "1,2", "--trials", "2", "--out", str(out),
            "--override", "n_sub=32", "--override", "n_cp=8", "--override", "l_eve=4",
        )
        assert code == 0
        lines = (out / "results.csv").read_text().splitlines()
        assert [l.split(",")[0] for l in lines[1:]] == ["1.0", "2.0"]

    def test_json_format(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli(
            "run", "--trials", "2", "--format", "json", "--out", str(out),
            "--override", "n_sub=32", "--override", "n_cp=8",
            "--override", "l_bob=2", "--override", "l_eve=4",
        )
        assert code == 0
        rows = json.loads((out / "results.json").read_text())
        assert rows and rows[0]["receiver"] == "joint"

    def test_skipped_sweep_value_reported(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli(
            "sweep", "--axis", "N", "--values", "8,32", "--trials", "2", "--out", str(out),
            "--override", "n_cp=8", "--override", "l_bob=2", "--override", "l_eve=4",
        )
        assert code == 0
        meta = json.loads((out / "metadata.json").read_text())
        skipped = meta["diagnostics"]["skipped_sweep_values"]
        assert len(skipped) == 1 and skipped[0]["value"] == 8


class TestUsageErrors:
    def test_unknown_override_key(self, tmp_path):
        assert run_cli("run", "--override", "bogus=1", "--out", str(tmp_path)) == 1

    def test_malformed_override(self, tmp_path):
        assert run_cli("run", "--override", "snr_db", "--out", str(tmp_path)) == 1

    def test_missing_subcommand(self):
        assert run_cli() == 1

    def test_bad_figure_name(self):
        assert run_cli("figure", "--which", "fig9") == 1

    def test_invalid_spec_value(self, tmp_path):
        assert run_cli("run", "--override", "alpha=1.5", "--out", str(tmp_path)) == 1


class TestValidateCommand:
    def test_quick_suite_passes(self, capsys):
        assert run_cli("validate", "--quick") == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out

    def test_console_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "anofdm.cli", "--help"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert "figure" in proc.stdout
