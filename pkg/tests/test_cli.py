import csv
import io
import json

import pytest

from bemrank.cli import CSV_COLUMNS, main
from bemrank.config import ConfigError, parse_config


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


class TestVerify:
    def test_s1_ce_siso(self, capsys):
        code, doc, _ = report(capsys, "verify", "--preset", "s1", "--bem", "ce", "--mode", "siso")
        assert code == 0
        assert doc["rank"]["final"]["rank"] == 12
        assert doc["verdict"] == "full-rank"
        assert doc["schema_version"] == "1.0"
        assert doc["scenario"]["full_column_rank"] is True
        assert "wall_clock_s" not in doc
        assert "lambda" not in doc["rank"]["rnc_bem"]["per_tx"][0]

    def test_s3_mimo_three_refused(self, capsys):
        code, doc, err = report(capsys, "verify", "--preset", "s3", "--mode", "mimo", "--nt", "3")
        assert code == 1
        assert doc["violated"] == ["harmonic_mimo_capacity"]
        assert doc["rank"] is None
        assert "harmonic_mimo_capacity" in err

    def test_missing_n(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"geometry": {"N_P": 16, "P_sep": 8, "P_b": 1, "L_P": 3,
                                                "B_c": 1, "L": 4, "Q": 3}}))
        code, out, err = run(capsys, "verify", "--config", str(cfg))
        assert code == 2
        assert out == ""
        assert "N" in err

    @pytest.mark.parametrize("text", ["{not json", "[1, 2]", '{"mode": "fdkd", "preset": "s9"}',
                                      '{"preset": "s1", "colour": 1}',
                                      '{"preset": "s1", "geometry": {"L_P": 4}}'])
    def test_bad_configs(self, capsys, tmp_path, text):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(text)
        code, out, _ = run(capsys, "verify", "--config", str(cfg))
        assert code == 2 and out == ""

    def test_no_source(self, capsys):
        assert run(capsys, "verify")[0] == 2

    def test_usage_error(self, capsys):
        assert run(capsys, "verify", "--bem", "dkl")[0] == 2

    def test_deterministic(self, capsys):
        a = run(capsys, "verify", "--preset", "s4", "--bem", "s", "--mode", "fdkd")[1]
        b = run(capsys, "verify", "--preset", "s4", "--bem", "s", "--mode", "fdkd")[1]
        assert a == b

    def test_echo_reruns(self, capsys, tmp_path):
        _, doc, _ = report(capsys, "verify", "--preset", "s2", "--bem", "gce", "--mode", "fdkd")
        cfg = tmp_path / "echo.json"
        cfg.write_text(json.dumps(doc["config"]))
        _, again, _ = report(capsys, "verify", "--config", str(cfg))
        assert again == doc

    def test_custom_patterns(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"preset": "s1", "patterns": [{"harmonics": [0, 1, 2]}]}))
        code, doc, _ = report(capsys, "verify", "--config", str(cfg))
        assert code == 0  # full rank despite the collision
        assert doc["rank"]["theta_orthogonality"]["passed"] is False
        assert doc["rank"]["consistent"] is False
        assert doc["design"]["mode"] == "custom"

    def test_rank_deficient_exit(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "geometry": {"N": 64, "N_P": 8, "P_sep": 8, "P_b": 2, "L_P": 5, "B_c": 1, "L": 4, "Q": 3},
            "patterns": [{"harmonics": [0, 4, 8, 12, 16]}]}))
        code, doc, _ = report(capsys, "verify", "--config", str(cfg))
        assert code == 1
        assert doc["rank"]["final"]["rank"] == 8

    def test_verbose_and_timing(self, capsys):
        _, doc, _ = report(capsys, "verify", "--preset", "s1", "--verbose", "--timing")
        tables = doc["rank"]["rnc_bem"]["per_tx"][0]["lambda"]
        assert len(tables) == 12 and len(tables[0]["table"]) == 3
        assert len(doc["design"]["patterns"][0]["matrix"]) == 16
        assert doc["wall_clock_s"] >= 0

    def test_out_and_env(self, capsys, tmp_path, monkeypatch):
        out = tmp_path / "r.json"
        code, text, _ = run(capsys, "verify", "--preset", "s1", "--out", str(out))
        assert code == 0 and "full-rank" in text
        assert json.loads(out.read_text())["exit_code"] == 0
        monkeypatch.setenv("BEMRANK_OUTPUT_DIR", str(tmp_path / "env"))
        run(capsys, "verify", "--preset", "s1", "--bem", "p")
        assert (tmp_path / "env" / "verify-s1-siso-p.json").exists()


def scan_rows(capsys, *argv):
    code, out, _ = run(capsys, "scan", *argv)
    return code, list(csv.DictReader(io.StringIO(out)))


class TestScan:
    def test_s4_fdkd_mimo(self, capsys):
        code, rows = scan_rows(capsys, "--preset", "s4", "--mode", "fdkd-mimo", "--sweep", "N_T=2..6")
        assert code == 0
        assert [r["N_T"] for r in rows] == ["2", "3", "4", "5", "6"]
        assert all(r["full_column_rank"] == "True" for r in rows)
        assert rows[-1]["rank"] == "120"
        assert list(rows[0]) == CSV_COLUMNS

    def test_s3_mimo(self, capsys):
        code, rows = scan_rows(capsys, "--preset", "s3", "--mode", "mimo", "--sweep", "nt=1,2,3,4")
        assert code == 1
        assert [r["verdict"] for r in rows] == ["full-rank", "full-rank", "infeasible", "infeasible"]
        assert rows[2]["violated"] == "harmonic_mimo_capacity"

    def test_single_point_matches_verify(self, capsys):
        _, rows = scan_rows(capsys, "--preset", "s2", "--bem", "p", "--sweep", "bem=p")
        _, doc, _ = report(capsys, "verify", "--preset", "s2", "--bem", "p")
        scen = {k: ("" if v is None else str(v)) for k, v in doc["scenario"].items()}
        assert rows == [scen]

    def test_bem_sweep(self, capsys):
        code, rows = scan_rows(capsys, "--preset", "s1", "--sweep", "bem=p,ce,gce,s")
        assert code == 0 and [r["bem"] for r in rows] == ["p", "ce", "gce", "s"]

    @pytest.mark.parametrize("sweep", [None, "N_T=", "colour=1", "Q=a", "L_P=4"])
    def test_bad_sweeps(self, capsys, sweep):
        argv = ["--preset", "s1"] + ([] if sweep is None else ["--sweep", sweep])
        code, out, _ = run(capsys, "scan", *argv)
        assert code == 2 and out == ""


class TestSimulate:
    def test_noiseless_exact(self, capsys):
        code, doc, _ = report(capsys, "simulate", "--preset", "s1", "--trials", "1")
        assert code == 0
        assert doc["simulation"]["per_snr"][0]["nmse_coeff_mean"] <= 1e-8

    def test_zero_trials(self, capsys):
        code, doc, _ = report(capsys, "simulate", "--preset", "s1", "--trials", "0")
        assert code == 0
        assert doc["simulation"]["per_snr"][0]["trials"] == 0

    def test_monotone(self, capsys):
        code, doc, _ = report(capsys, "simulate", "--preset", "s1", "--trials", "100",
                              "--snr", "10,30", "--seed", "5")
        rows = {r["snr_db"]: r for r in doc["simulation"]["per_snr"]}
        assert rows[30.0]["nmse_coeff_median"] < rows[10.0]["nmse_coeff_median"]

    def test_refuses_rank_failure(self, capsys):
        code, doc, _ = report(capsys, "simulate", "--preset", "s3", "--mode", "mimo", "--nt", "3")
        assert code == 1 and doc["simulation"] is None

    def test_data_and_model(self, capsys):
        code, doc, _ = report(capsys, "simulate", "--preset", "s1", "--trials", "3", "--snr", "20",
                              "--model", "sos", "--data", "--verbose")
        assert code == 0
        assert doc["config"]["simulation"]["data"] is True
        assert len(doc["simulation"]["trials"][0]["nmse_coeff"]) == 3


class TestConfig:
    def test_bem_block_overrides(self):
        cfg = parse_config({"preset": "s1", "bem": {"kind": "s", "Q": 2, "f_D": 0.2}})
        assert cfg.geometry.Q == 2 and cfg.bem.Q == 2 and cfg.bem.f_D == 0.2

    def test_complex_chi(self):
        cfg = parse_config({"preset": "s1", "patterns": [{"harmonics": [0, 4, 8], "chi": [0, 1]}]})
        assert cfg.patterns[0].chi == 1j

    def test_matrix_pattern_shape(self):
        with pytest.raises(ConfigError):
            parse_config({"preset": "s1", "patterns": [{"matrix": [[1, 2, 3]]}]})

    def test_schema_version(self):
        with pytest.raises(ConfigError):
            parse_config({"preset": "s1", "schema_version": "0.1"})
