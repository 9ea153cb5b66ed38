import csv
import json
import math
from pathlib import Path

import pytest

from transgauss import cli

ROOT = Path(__file__).resolve().parents[1]


def run(tmp_path, command, config=None, *extra, name="out.json"):
    args = [command]
    if config is not None:
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(config) if isinstance(config, dict) else config)
        args += ["--config", str(cfg)]
    out = tmp_path / name
    code = cli.main(args + ["--out", str(out), *extra])
    return code, out


def load(path):
    return json.loads(path.read_text())


def test_published_schema_matches_package_copy():
    assert json.loads((ROOT / "docs" / "config_schema.json").read_text()) == cli.load_schema()


def test_report_csv_clifford(tmp_path):
    cfg = {"surface": {"family": "clifford", "params": {"r": 0.5}}, "grid": {"nodes": 16},
           "output": {"format": "csv"}}
    code, out = run(tmp_path, "report", cfg, name="table.csv")
    assert code == 0
    rows = list(csv.DictReader(out.open(encoding="utf-8")))
    assert len(rows) == 256
    assert list(rows[0]) == ["u1", "u2", "lambda_1", "lambda_2", "c", "kappa_gamma", "gk", "prop_residual"]
    for row in rows:
        assert float(row["lambda_1"]) == pytest.approx(-1.7320508, abs=1e-7)
        assert float(row["lambda_2"]) == pytest.approx(0.5773503, abs=1e-7)
    summary = load(tmp_path / "table.summary.json")
    assert summary["rows"] == 256 and summary["config"]["grid"]["nodes"] == 16


def test_report_json_geodesic_sphere(tmp_path):
    code, out = run(tmp_path, "report", {"surface": {"family": "geodesic_sphere"}}, "--grid", "12")
    assert code == 0
    k = load(out)["summary"]["kappa_gamma"]
    assert k["min"] == pytest.approx(1 / math.sin(0.5) ** 2, abs=1e-6)
    assert k["max"] == pytest.approx(1 / math.sin(0.5) ** 2, abs=1e-6)


@pytest.mark.parametrize("text", ['{"surface": ', '{"surface": {"family": "cube"}}',
                                  '{"grid": {"nodes": 8, "spacing": 1}}', '[1, 2]',
                                  '{"surface": {"family": "clifford", "params": {"rho": 0.5}}}'])
def test_invalid_config_exit_2(tmp_path, text, capsys):
    code, _ = run(tmp_path, "report", text)
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_gauss_bonnet_commands(tmp_path):
    code, out = run(tmp_path, "gauss-bonnet", {"surface": {"family": "geodesic_sphere"}}, "--grid", "64")
    rep = load(out)
    assert code == 0 and rep["passed"]
    assert rep["integral"] == pytest.approx(12.5663706, abs=1e-5)
    assert rep["degree_preimage"] == 1
    code, out = run(tmp_path, "gauss-bonnet", {"surface": {"family": "clifford", "params": {"r": 0.6}}})
    assert code == 0 and abs(load(out)["integral"]) < 1e-6


def test_gauss_bonnet_odd_dimension(tmp_path):
    code, _ = run(tmp_path, "gauss-bonnet", {"surface": {"family": "geodesic_sphere", "n": 3}}, "--grid", "6")
    assert code == 2


def test_certify_commands(tmp_path):
    code, out = run(tmp_path, "certify", {"surface": {"family": "geodesic_sphere"}}, "--grid", "32")
    rep = load(out)
    assert code == 0
    assert rep["certificate"]["min_margin_curvature"] == pytest.approx(1.575146, abs=1e-5)
    assert set(rep["all_conventions"]) == {"enclosing", "lemma"}
    torus = {"surface": {"family": "clifford", "params": {"r": 1 / math.sqrt(2)}}}
    assert run(tmp_path, "certify", torus, "--convention", "enclosing", "--grid", "32")[0] == 1
    big_delta = {"surface": {"family": "geodesic_sphere"}, "numerics": {"delta": 2.0}}
    assert run(tmp_path, "certify", big_delta, "--grid", "16")[0] == 1


@pytest.mark.parametrize("eps,expect", [(0.2, 0), (0.41, 0), (0.45, 2)])
def test_counterexample_command(tmp_path, eps, expect):
    code, out = run(tmp_path, "counterexample", None, "--epsilon", str(eps), "--grid", "16")
    assert code == expect
    if expect == 0:
        rep = load(out)["report"]
        assert rep["chi"] == 0 and rep["min_margin"] > 0
        if eps == 0.2:
            assert rep["r"] == pytest.approx(0.4785, abs=1e-4)


def test_xia_commands(tmp_path):
    code, out = run(tmp_path, "xia", {"surface": {"family": "geodesic_sphere", "params": {"rho": 1.2}}},
                    "--grid", "24")
    assert code == 0 and load(out)["report"]["t_star"] < 1
    code, out = run(tmp_path, "xia", {"surface": {"family": "clifford"}}, "--grid", "16")
    rep = load(out)["report"]
    assert code == 1 and rep["failure_stage"] == 2
    assert [s["error"] for s in rep["stages"]][1:] == ["NotInHemisphere", "MixedCurvatureSigns"]


def test_config_is_echoed_with_defaults(tmp_path):
    code, out = run(tmp_path, "certify", {"surface": {"family": "geodesic_sphere"}}, "--grid", "8")
    cfg = load(out)["config"]
    assert cfg["numerics"]["delta"] == 1e-6 and cfg["grid"]["nodes"] == 8
    assert cfg["surface"]["params"]["center"] == [0.0, 0.0, 0.0, 1.0]
    assert cfg["structure"]["base_point"] == [0.0, 0.0, 0.0, 1.0]


def test_geometry_error_exit_3(tmp_path, capsys):
    # the base point is antipodal to the grid node u = (0, 0) of the torus
    cfg = {"surface": {"family": "clifford", "params": {"r": 0.6}},
           "structure": {"kind": "parallel", "base_point": [-0.6, 0.0, -0.8, 0.0]}}
    assert run(tmp_path, "report", cfg, "--grid", "8")[0] == 3
    assert "geometry error (OutOfDomain)" in capsys.readouterr().err
