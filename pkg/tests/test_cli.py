import json

import numpy as np
import pytest

from plap.cli import main


def write_config(tmp_path, name="cfg.json", **overrides):
    cfg = {
        "p": 2.0,
        "q": 2.0,
        "lambda": 2 * np.pi**2,
        "nonlinearity": {"kind": "power_asym", "b_plus": 1.0, "b_minus": 1.0, "r_exp": 4.0},
    }
    cfg.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


class TestValidate:
    def test_pass(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["validate", "--config", cfg]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["passed"] is True
        assert report["L_plus"] < 0

    def test_hypothesis_failure_exit_2(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            q=3.0,
            nonlinearity={"kind": "power_asym", "b_plus": 1.0, "b_minus": 1.0, "r_exp": 2.0},
        )
        assert main(["validate", "--config", cfg]) == 2

    def test_malformed_json_exit_1(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["validate", "--config", str(bad)]) == 1

    def test_missing_field_exit_1(self, tmp_path):
        bad = tmp_path / "missing.json"
        bad.write_text(json.dumps({"q": 2.0}))
        assert main(["validate", "--config", str(bad)]) == 1


class TestDiagram:
    def test_q_equals_p_has_classical_column(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "diagram.csv"
        assert main(["diagram", "--config", cfg, "--n", "3", "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        header = lines[0].split(",")
        assert header[-1] == "lambda_n"
        rows = [line.split(",") for line in lines[1:]]
        assert [r[0] for r in rows] == ["1", "2", "3"]
        # p = 2: flat-core thresholds are infinite
        assert all(r[1] == "inf" and r[2] == "inf" for r in rows)
        assert float(rows[0][-1]) == pytest.approx(np.pi**2, rel=1e-12)
        # star columns are empty for q = p
        assert all(r[3] == "" and r[4] == "" for r in rows)

    def test_star_columns_for_q_above_p(self, tmp_path):
        cfg = write_config(
            tmp_path,
            q=3.0,
            nonlinearity={"kind": "power_asym", "b_plus": 1.0, "b_minus": 1.0, "r_exp": 5.0},
        )
        out = tmp_path / "diagram.csv"
        assert main(["diagram", "--config", cfg, "--n", "2", "--out", str(out)]) == 0
        rows = [line.split(",") for line in out.read_text().strip().splitlines()[1:]]
        assert float(rows[0][3]) > 0
        assert float(rows[0][3]) == pytest.approx(float(rows[0][4]), rel=1e-11)

    def test_bad_n_exit_1(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["diagram", "--config", cfg, "--n", "65"]) == 1
        assert main(["diagram", "--config", cfg, "--n", "0"]) == 1

    def test_deterministic(self, tmp_path):
        cfg = write_config(tmp_path)
        out1, out2 = tmp_path / "d1.csv", tmp_path / "d2.csv"
        main(["diagram", "--config", cfg, "--n", "4", "--out", str(out1)])
        main(["diagram", "--config", cfg, "--n", "4", "--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()


class TestSolveRoundTrip:
    def test_solve_profile_verify(self, tmp_path):
        cfg = write_config(tmp_path)
        solve_out = tmp_path / "solve.json"
        assert main(["solve", "--config", cfg, "--jmax", "2", "--out", str(solve_out)]) == 0
        payload = json.loads(solve_out.read_text())
        ids = [d["id"] for d in payload["descriptors"]]
        assert len(ids) == 3  # trivial + S1+ + S1-
        nontrivial = [d for d in payload["descriptors"] if d["kind"] != "trivial"]
        assert {d["sign"] for d in nontrivial} == {"+", "-"}

        prof_out = tmp_path / "profile.csv"
        d0 = nontrivial[0]
        assert (
            main(
                [
                    "profile",
                    "--config",
                    cfg,
                    "--id",
                    d0["id"],
                    "--jmax",
                    "2",
                    "--out",
                    str(prof_out),
                ]
            )
            == 0
        )
        rows = prof_out.read_text().strip().splitlines()
        assert rows[0] == "x,phi,dphi"
        first = rows[1].split(",")
        assert float(first[0]) == 0.0 and float(first[1]) == 0.0
        sidecar = json.loads((tmp_path / "profile.json").read_text())
        assert sidecar["descriptor"]["id"] == d0["id"]
        assert sidecar["nodes"] == []

        assert main(["verify", "--config", cfg, "--id", d0["id"], "--jmax", "2"]) == 0

    def test_unknown_id_exit_1(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["profile", "--config", cfg, "--id", "deadbeef0000"]) == 1
        assert main(["verify", "--config", cfg, "--id", "deadbeef0000"]) == 1

    def test_trivial_id_round_trips(self, tmp_path):
        cfg = write_config(tmp_path)
        solve_out = tmp_path / "solve.json"
        main(["solve", "--config", cfg, "--jmax", "1", "--out", str(solve_out)])
        payload = json.loads(solve_out.read_text())
        trivial = [d for d in payload["descriptors"] if d["kind"] == "trivial"][0]
        out = tmp_path / "trivial.csv"
        assert main(["profile", "--config", cfg, "--id", trivial["id"], "--out", str(out)]) == 0
        assert main(["verify", "--config", cfg, "--id", trivial["id"]]) == 0

    def test_missing_id_exit_1(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["profile", "--config", cfg]) == 1

    def test_bad_cores_exit_1(self, tmp_path, quintic_q3):
        from plap.bifurcation import bifurcation_table

        tab = bifurcation_table(quintic_q3, 3.0, 1)
        cfg = write_config(
            tmp_path,
            p=3.0,
            q=3.0,
            nonlinearity={"kind": "power_asym", "b_plus": 1.0, "b_minus": 1.0, "r_exp": 6.0},
            **{"lambda": 1.5 * tab.tilde_plus[0]},
        )
        solve_out = tmp_path / "solve.json"
        main(["solve", "--config", cfg, "--jmax", "1", "--out", str(solve_out)])
        payload = json.loads(solve_out.read_text())
        fc = [d for d in payload["descriptors"] if d["kind"] == "flat_core"][0]
        code = main(
            [
                "profile",
                "--config",
                cfg,
                "--id",
                fc["id"],
                "--cores",
                "0.001",
                "--out",
                str(tmp_path / "p.csv"),
            ]
        )
        assert code == 1

    def test_solve_deterministic(self, tmp_path):
        cfg = write_config(tmp_path)
        out1, out2 = tmp_path / "s1.json", tmp_path / "s2.json"
        main(["solve", "--config", cfg, "--jmax", "2", "--out", str(out1)])
        main(["solve", "--config", cfg, "--jmax", "2", "--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()


class TestStructureAndRegularity:
    def test_structure_report(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["structure", "--config", cfg, "--n", "2"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["regime"] == "q=p"
        tags = {(e["j"], e["sign"]): e["tag"] for e in rep["entries"]}
        assert tags[(1, "+")] == "single" and tags[(2, "+")] == "empty"

    def test_regularity_report(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        solve_out = tmp_path / "solve.json"
        main(["solve", "--config", cfg, "--jmax", "1", "--out", str(solve_out)])
        payload = json.loads(solve_out.read_text())
        d0 = [d for d in payload["descriptors"] if d["kind"] == "regular"][0]
        assert main(["regularity", "--config", cfg, "--id", d0["id"], "--jmax", "1"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["smoothness_class"] == "C2"
