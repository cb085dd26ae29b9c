import json

import pytest

from finslerlab.cli import main


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def strip_timing(report: dict) -> dict:
    out = dict(report)
    out.pop("timing", None)
    return out


BASE_CONFIG = {
    "metric": {"catalog": "conformally_flat",
               "params": {"n": 2, "rho": "re_z1"}},
    "sample": {"count": 8, "seed": 42},
    "tasks": ["classify", "verify", "theorem41"],
    "identities": ["euler", "ricci_identity", "negativity",
                   "complexified_trace", "trace_relation"],
}


class TestCatalogCommand:
    def test_text_listing(self, capsys):
        assert main(["catalog"]) == 0
        out = capsys.readouterr().out
        assert "szabo" in out and "randers" in out

    def test_json_listing(self, capsys):
        assert main(["catalog", "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert "fubini_study" in payload
        assert payload["flat"]["params"][0]["name"] == "n"


class TestRunCommand:
    def test_successful_run(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASE_CONFIG)
        out_path = str(tmp_path / "report.json")
        code = main(["run", cfg, "--out", out_path])
        assert code == 0
        report = json.loads(open(out_path).read())
        assert report["exit_code"] == 0
        assert report["sample"]["accepted"] == 8
        assert report["tasks"]["verify"]["all_passed"] is True
        assert report["tasks"]["kahler_witness"]["verdict"] == "consistent"
        assert report["tasks"]["classify"]["balanced"] == pytest.approx(0.25)

    def test_determinism_byte_identical(self, tmp_path):
        # identical config (including the output path) twice; the reports must
        # agree byte-for-byte once the timing block is dropped
        cfg = write_config(tmp_path, BASE_CONFIG)
        out = str(tmp_path / "report.json")
        assert main(["run", cfg, "--out", out]) == 0
        first = open(out).read()
        assert main(["run", cfg, "--out", out]) == 0
        second = open(out).read()
        ja = json.dumps(strip_timing(json.loads(first)), sort_keys=True)
        jb = json.dumps(strip_timing(json.loads(second)), sort_keys=True)
        assert ja == jb

    def test_seed_override_changes_report(self, tmp_path):
        cfg = write_config(tmp_path, BASE_CONFIG)
        a = str(tmp_path / "a.json")
        b = str(tmp_path / "b.json")
        main(["run", cfg, "--out", a])
        main(["run", cfg, "--seed", "7", "--out", b])
        ra = json.loads(open(a).read())
        rb = json.loads(open(b).read())
        assert ra["config"]["sample"]["seed"] == 42
        assert rb["config"]["sample"]["seed"] == 7
        assert ra["tasks"]["classify"]["per_point"] != rb["tasks"]["classify"]["per_point"]

    def test_float_round_trip_is_lossless(self, tmp_path):
        cfg = write_config(tmp_path, BASE_CONFIG)
        out_path = str(tmp_path / "r.json")
        main(["run", cfg, "--out", out_path])
        text = open(out_path).read()
        report = json.loads(text)
        assert json.loads(json.dumps(report)) == report

    def test_identity_failure_exit_code(self, tmp_path):
        cfg_payload = dict(BASE_CONFIG)
        # the homogeneity residuals are tiny but nonzero, so tol = 0 must fail
        cfg_payload["tolerances"] = {"euler": 0.0}
        cfg = write_config(tmp_path, cfg_payload)
        out_path = str(tmp_path / "r.json")
        assert main(["run", cfg, "--out", out_path]) == 1
        report = json.loads(open(out_path).read())
        assert report["exit_code"] == 1
        verdicts = {r["name"]: r["verdict"]
                    for r in report["tasks"]["verify"]["identities"]}
        assert verdicts["euler"] == "fail"

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = write_config(tmp_path, {"metric": {"catalog": "nope"}})
        assert main(["run", bad]) == 2
        missing = str(tmp_path / "missing.json")
        assert main(["run", missing]) == 2
        notjson = tmp_path / "bad.json"
        notjson.write_text("{)")
        assert main(["run", str(notjson)]) == 2

    def test_starvation_exit_code(self, tmp_path):
        cfg = write_config(tmp_path, {
            "metric": {"catalog": "randers", "params": {"n": 2, "c": 0.5}},
            "sample": {"count": 30, "seed": 9, "v_box": [-0.012, 0.012],
                       "max_attempts_factor": 5},
            "tasks": ["classify"],
        })
        assert main(["run", cfg]) == 3

    def test_conformal_task(self, tmp_path):
        cfg = write_config(tmp_path, {
            "metric": {"catalog": "flat", "params": {"n": 2}},
            "sample": {"count": 5, "seed": 3},
            "tasks": ["conformal"],
            "conformal": {"rho": {"catalog": "re_z1z2"}},
        })
        out_path = str(tmp_path / "r.json")
        assert main(["run", cfg, "--out", out_path]) == 0
        report = json.loads(open(out_path).read())
        laws = {r["name"]: r for r in report["tasks"]["conformal"]["laws"]}
        assert laws["conformal_rund_defect"]["verdict"] == "pass"
        assert laws["conformal_balanced_ricci_gap"]["verdict"] == "skipped"

    def test_task_alias_and_cli_task_override(self, tmp_path):
        cfg = write_config(tmp_path, dict(BASE_CONFIG, tasks=["classify"]))
        out_path = str(tmp_path / "r.json")
        assert main(["run", cfg, "--task", "kahler_witness",
                     "--out", out_path]) == 0
        report = json.loads(open(out_path).read())
        assert "kahler_witness" in report["tasks"]
        assert "classify" not in report["tasks"]

    def test_inline_metric_config(self, tmp_path):
        from finslerlab.catalog import build_catalog_metric
        from finslerlab.expressions import metric_to_dict
        inline = metric_to_dict(build_catalog_metric("fubini_study", n=2))
        cfg = write_config(tmp_path, {
            "metric": {"inline": inline},
            "sample": {"count": 5, "seed": 1},
            "tasks": ["classify"],
        })
        out_path = str(tmp_path / "r.json")
        assert main(["run", cfg, "--out", out_path]) == 0
        report = json.loads(open(out_path).read())
        assert report["tasks"]["classify"]["kahler"] < 1e-9


class TestPointCommand:
    def test_flat_point_dump(self, capsys):
        code = main(["point", "--metric", "flat", "--param", "n=2",
                     "--z", "0.0,0.0;0.0,0.0", "--v", "1.0,0.0;0.0,0.0"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["metric_value"] == [1.0, 0.0]
        fund = payload["frame"]["fundamental"]
        assert fund["dims"] == [2, 2]
        assert fund["re"] == [1.0, 0.0, 0.0, 1.0]
        assert payload["curvature"]["scalar_chern"] == 0.0

    def test_dimension_mismatch(self, capsys):
        code = main(["point", "--metric", "flat", "--param", "n=2",
                     "--z", "0.0,0.0", "--v", "1.0,0.0"])
        assert code == 2


class TestOracleCommand:
    def test_json_output(self, capsys):
        code = main(["oracle", "--metric", "szabo", "--param", "k=2.0",
                     "--z", "0.1,0.0;0.2,-0.1", "--v", "0.9,0.2;0.8,-0.3",
                     "--json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["max_rel"] < 1e-4
        assert payload["entries"] == 324


class TestEvalTask:
    def test_eval_task_dumps_tensors(self, tmp_path):
        cfg = write_config(tmp_path, {
            "metric": {"catalog": "fubini_study", "params": {"n": 2}},
            "sample": {"count": 4, "seed": 13},
            "tasks": ["eval"],
            "eval_limit": 2,
        })
        out_path = str(tmp_path / "r.json")
        assert main(["run", cfg, "--out", out_path]) == 0
        report = json.loads(open(out_path).read())
        rows = report["tasks"]["eval"]["points"]
        assert len(rows) == 2
        curv = rows[0]["curvature"]
        assert curv["chern"]["dims"] == [2, 2, 2, 2]
        assert curv["torsion_square_scalar"] >= -1e-12
        assert rows[0]["frame"]["condition_number"] >= 1.0


class TestFlatVerifyAll:
    def test_flat_all_identities_exit_zero(self, tmp_path):
        cfg = write_config(tmp_path, {
            "metric": {"catalog": "flat", "params": {"n": 2}},
            "sample": {"count": 6, "seed": 2},
            "tasks": ["verify"],
        })
        out_path = str(tmp_path / "r.json")
        assert main(["run", cfg, "--out", out_path]) == 0
        report = json.loads(open(out_path).read())
        for r in report["tasks"]["verify"]["identities"]:
            assert r["verdict"] in ("pass", "skipped")
            if r["verdict"] == "pass" and not r["name"].startswith(
                    ("ddbar", "codif", "canonical")):
                assert r["max_rel"] < 1e-10


class TestAlternateInputForms:
    def test_run_with_config_flag(self, tmp_path):
        cfg = write_config(tmp_path, dict(BASE_CONFIG, tasks=["classify"]))
        assert main(["run", "--config", cfg]) == 0

    def test_point_with_metric_json(self, tmp_path, capsys):
        from finslerlab.catalog import build_catalog_metric
        from finslerlab.expressions import metric_to_dict
        mpath = tmp_path / "metric.json"
        mpath.write_text(json.dumps(metric_to_dict(
            build_catalog_metric("fubini_study", n=2))))
        code = main(["point", "--metric-json", str(mpath),
                     "--z", "0.1,0.2;-0.1,0.0", "--v", "1.0,0.0;0.5,-0.2"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["metric"]["name"] == "fubini_study"
