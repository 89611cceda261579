"""CLI contract: flags, exit codes, machine outputs, manifests."""

import json
import time

import pytest

from confbayes.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def y_csv(tmp_path):
    p = tmp_path / "y.csv"
    p.write_text("y\n14\n15\n13\n16\n12\n14\n15\n13\n14\n15\n")
    return str(p)


class TestInterval:
    def test_analytic_json_contract(self, y_csv, capsys):
        code, out, _ = run_cli(
            [
                "interval",
                "--model",
                "binomial",
                "--m",
                "20",
                "--prior-a",
                "0.5",
                "--prior-b",
                "0.5",
                "--alpha",
                "0.1",
                "--method",
                "analytic",
                "--data",
                y_csv,
                "--json",
            ],
            capsys,
        )
        assert code == 0
        res = json.loads(out)
        assert res["set"]["type"] == "discrete"
        assert all(isinstance(v, int) for v in res["set"]["members"])
        assert res["method"] == "analytic" and res["alpha"] == 0.1

    def test_invalid_alpha_exits_2(self, y_csv, capsys):
        code, _, err = run_cli(
            ["interval", "--model", "binomial", "--m", "20", "--alpha", "1.5", "--data", y_csv],
            capsys,
        )
        assert code == 2
        assert "alpha" in err

    def test_missing_data_exits_2(self, capsys):
        code, _, err = run_cli(["interval", "--model", "binomial", "--m", "20"], capsys)
        assert code == 2

    def test_malformed_file_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("header\n12\nnot-a-number\n")
        code, _, _ = run_cli(
            ["interval", "--model", "binomial", "--m", "20", "--data", str(bad)], capsys
        )
        assert code == 2

    def test_analytic_matches_full_bres(self, y_csv, capsys):
        base = ["interval", "--model", "binomial", "--m", "20", "--alpha", "0.1",
                "--data", y_csv, "--json"]
        _, out_a, _ = run_cli(base + ["--method", "analytic"], capsys)
        _, out_f, _ = run_cli(base + ["--method", "full", "--score", "bres"], capsys)
        assert json.loads(out_a)["set"]["members"] == json.loads(out_f)["set"]["members"]

    def test_inline_outcomes_and_normal_model(self, capsys):
        code, out, _ = run_cli(
            [
                "interval",
                "--model",
                "normal",
                "--y",
                "0.4,1.2,0.8,0.3,0.9",
                "--method",
                "split",
                "--score",
                "bres",
                "--alpha",
                "0.2",
                "--seed",
                "3",
                "--json",
            ],
            capsys,
        )
        assert code == 0
        res = json.loads(out)
        assert res["set"]["type"] == "interval"

    def test_full_carries_diagnostics(self, y_csv, capsys):
        code, out, _ = run_cli(
            ["interval", "--model", "binomial", "--m", "20", "--data", y_csv,
             "--method", "full", "--score", "ppd", "--json"],
            capsys,
        )
        res = json.loads(out)
        assert len(res["diagnostics"]["pvalues"]) == 21

    def test_result_file_and_manifest(self, y_csv, tmp_path, capsys):
        out_path = tmp_path / "res.json"
        code, _, _ = run_cli(
            ["interval", "--model", "binomial", "--m", "20", "--data", y_csv,
             "--out", str(out_path)],
            capsys,
        )
        assert code == 0
        assert out_path.exists()
        manifest = json.loads((tmp_path / "res.json.manifest.json").read_text())
        assert manifest["command"] == "interval"
        assert str(out_path) in manifest["outputs"]


class TestSimulate:
    def test_smoke_run_under_a_minute(self, tmp_path, capsys):
        out = tmp_path / "study.csv"
        t0 = time.time()
        code, _, _ = run_cli(
            ["simulate", "--reps", "50", "--seed", "5", "--out", str(out)], capsys
        )
        assert code == 0
        assert time.time() - t0 < 60
        lines = out.read_text().splitlines()
        assert len(lines) == 11  # header + 10 default methods

    def test_default_method_rows(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        run_cli(["simulate", "--reps", "3", "--seed", "1", "--out", str(out)], capsys)
        body = [line.split(",") for line in out.read_text().splitlines()[1:]]
        pairs = {(r[1], r[2]) for r in body}
        assert ("full", "ppd") in pairs and ("split", "dbres") in pairs
        assert ("analytic", "bres") in pairs and ("hppd", "") in pairs

    def test_seed_reproducibility_bytes(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli(["simulate", "--reps", "12", "--seed", "9", "--out", str(a)], capsys)
        run_cli(["simulate", "--reps", "12", "--seed", "9", "--out", str(b)], capsys)
        assert a.read_bytes() == b.read_bytes()

    def test_config_file_and_flag_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n_rep": 4, "master_seed": 7, "alpha": 0.2}))
        out = tmp_path / "c.csv"
        code, _, _ = run_cli(
            ["simulate", "--config", str(cfg), "--alpha", "0.1", "--out", str(out),
             "--methods", "analytic"], capsys
        )
        assert code == 0
        row = out.read_text().splitlines()[1].split(",")
        assert row[8] == "0.1"  # flag beat the config file
        assert row[9] == "4"  # config file beat the default
        echo = json.loads((tmp_path / "c.csv.config.json").read_text())
        assert echo["master_seed"] == 7

    def test_env_seed_fallback(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("CONFBAYES_SEED", "4242")
        out = tmp_path / "e.csv"
        run_cli(["simulate", "--reps", "2", "--methods", "analytic", "--out", str(out)], capsys)
        echo = json.loads((tmp_path / "e.csv.config.json").read_text())
        assert echo["master_seed"] == 4242

    def test_manifest_written(self, tmp_path, capsys):
        out = tmp_path / "m.csv"
        run_cli(["simulate", "--reps", "2", "--methods", "hppd", "--out", str(out)], capsys)
        manifest = json.loads((tmp_path / "m.csv.manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["resolved_config"]["n_rep"] == 2
        assert "started_at" in manifest and "finished_at" in manifest

    def test_bad_method_exits_2(self, tmp_path, capsys):
        code, _, err = run_cli(
            ["simulate", "--reps", "2", "--methods", "bogus", "--out", str(tmp_path / "x.csv")],
            capsys,
        )
        assert code == 2


class TestSweep:
    def test_single_cell_rows(self, tmp_path, capsys):
        out = tmp_path / "sw.csv"
        code, _, _ = run_cli(
            ["sweep", "--reps", "4", "--seed", "2", "--a-grid", "0.5", "--b-grid", "0.5",
             "--out", str(out)], capsys
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + 2  # header + hppd + analytic

    def test_grid_row_count(self, tmp_path, capsys):
        out = tmp_path / "sw2.csv"
        run_cli(
            ["sweep", "--reps", "2", "--seed", "2", "--a-grid", "0.5,2", "--b-grid", "1,5,30",
             "--out", str(out), "--sweep-methods", "analytic"], capsys
        )
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + 6

    def test_manifest_round_trip_reproduces_csv(self, tmp_path, capsys):
        out = tmp_path / "sw3.csv"
        run_cli(
            ["sweep", "--reps", "3", "--seed", "11", "--a-grid", "0.5,1", "--b-grid", "0.5",
             "--out", str(out)], capsys
        )
        manifest = json.loads((tmp_path / "sw3.csv.manifest.json").read_text())
        rc = manifest["resolved_config"]
        out2 = tmp_path / "sw3-replay.csv"
        code, _, _ = run_cli(
            [
                "sweep",
                "--reps", str(rc["n_rep"]),
                "--seed", str(rc["master_seed"]),
                "--n", str(rc["n"]),
                "--m", str(rc["m"]),
                "--theta", str(rc["theta_true"]),
                "--alpha", str(rc["alpha"]),
                "--a-grid", ",".join(str(v) for v in rc["a_grid"]),
                "--b-grid", ",".join(str(v) for v in rc["b_grid"]),
                "--sweep-methods", ",".join(rc["sweep_methods"]),
                "--out", str(out2),
            ],
            capsys,
        )
        assert code == 0
        assert out.read_bytes() == out2.read_bytes()
