import json

import pytest

from nullresult.cli import main
from nullresult.scenario import Scenario, dump_scenario, load_scenario


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_predict_aspect(capsys):
    code, out, _ = run(capsys, "predict", "--model", "qm", "--angle-deg", "22.5", "--apparatus", "aspect")
    assert code == 0
    rep = json.loads(out)
    cond = rep["settings"][0]["conditional_given_d1"]
    assert cond["difference"] == pytest.approx(0.675584, abs=1e-6)
    assert cond["published"]["value"] == 0.696
    assert rep["chsh"]["ideal"]["s"] == pytest.approx(2.828427, abs=1e-6)


def test_predict_local_constant_half_has_zero_s(capsys):
    code, out, _ = run(capsys, "predict", "--model", "local", "--alpha", "const:0.5")
    assert code == 0
    rep = json.loads(out)
    assert rep["chsh"]["ideal"]["s"] == pytest.approx(0.0, abs=1e-12)
    assert rep["local_bound"]["ideal"]["margin"] == pytest.approx(0.25)


def test_predict_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "predict", "--format", "csv", "--out", str(tmp_path / "p"))
    assert code == 0
    assert out.splitlines()[0].startswith("setting,angle_deg,table")
    assert (tmp_path / "p.predict.csv").read_text() == out


def test_simulate_writes_artifacts(capsys, tmp_path):
    prefix = str(tmp_path / "run")
    code, out, _ = run(capsys, "simulate", "--trials", "20000", "--seed", "3", "--apparatus", "aspect", "--out", prefix)
    assert code == 0
    for suffix in (".counts.json", ".counts.csv", ".report.json", ".scenario.json"):
        assert (tmp_path / f"run{suffix}").exists()
    rep = json.loads(out)
    assert rep["counts"][0]["n_pairs"] == 20000 and rep["counts"][0]["seed"] == 3
    assert rep["estimates"]["settings"][0]["n_pairs"] == 20000


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_simulate_analyze_round_trip(capsys, tmp_path, fmt):
    prefix = str(tmp_path / "rt")
    run(capsys, "simulate", "--trials", "20000", "--seed", "5", "--angles", "0", "45", "22.5", "67.5", "--out", prefix)
    sim = json.loads((tmp_path / "rt.report.json").read_text())
    code, out, _ = run(capsys, "analyze", f"{prefix}.counts.{fmt}")
    assert code == 0
    ana = json.loads(out)
    strip = lambda est: [{k: v for k, v in s.items() if k != "hypothesis"} for s in est["settings"]]  # noqa: E731
    assert strip(ana["estimates"]) == strip(sim["estimates"])
    assert ana["estimates"]["chsh"]["s"] == sim["estimates"]["chsh"]["s"]


def test_simulate_is_reproducible(capsys):
    a = json.loads(run(capsys, "simulate", "--trials", "5000", "--seed", "9")[1])
    b = json.loads(run(capsys, "simulate", "--trials", "5000", "--seed", "9", "--workers", "3", "--chunk-size", "1000")[1])
    c = json.loads(run(capsys, "simulate", "--trials", "5000", "--seed", "9", "--chunk-size", "1000")[1])
    assert b["estimates"] == c["estimates"]
    assert a["estimates"]["settings"][0]["n_pairs"] == 5000


def test_scenario_fixed_point(tmp_path, capsys):
    s = Scenario(hypothesis="no-nr:sawtooth", angle_deg=30.0, trials=1000, seed=7, workers=2)
    path = tmp_path / "s.json"
    path.write_text(dump_scenario(s))
    assert load_scenario(path) == s
    assert dump_scenario(load_scenario(path)) == dump_scenario(s)
    code, out, _ = run(capsys, "predict", "--scenario", str(path), "--angle-deg", "10")
    assert code == 0
    assert json.loads(out)["scenario"]["angle_deg"] == 10.0
    assert json.loads(out)["scenario"]["hypothesis"] == s.hypothesis


def test_geometry_warnings(capsys):
    code, out, err = run(capsys, "geometry", "--geometry", "lightlike")
    assert code == 0 and "zero margin" in err
    assert json.loads(out)["ordering"]["preserved"] is True
    code, out, err = run(capsys, "geometry", "--geometry", "1,1,4,1")
    assert code == 0 and "space-like" in err
    assert json.loads(out)["ordering"]["preserved"] is False


def test_paradox_single(capsys):
    code, out, _ = run(capsys, "paradox", "--u-bar", "2", "--v", "0.9", "--mode", "sr")
    assert code == 0
    rep = json.loads(out)
    assert rep["paradox"] is True and rep["threshold"] == pytest.approx(0.8)
    code, out, _ = run(capsys, "paradox", "--u-bar", "2", "--v", "0.9", "--mode", "aether")
    assert json.loads(out)["paradox"] is False


def test_paradox_sweep(capsys):
    code, out, _ = run(capsys, "paradox", "--sweep", "--mode", "aether", "--u-grid", "1.5:5:8", "--v-grid=-0.9:0.9:10")
    assert code == 0
    rows = out.strip().splitlines()
    assert len(rows) == 9
    assert all(set(r.split(",")[1:]) == {"0"} for r in rows[1:])


@pytest.mark.parametrize(
    "argv",
    [
        ("paradox", "--u-bar", "0.5", "--v", "0.1"),
        ("paradox", "--u-bar", "2"),
        ("simulate", "--trials", "0"),
        ("predict", "--tpar", "1.5"),
        ("predict", "--model", "bogus"),
        ("predict", "--model", "no-nr", "--alpha", "table:0=1;45=2;90=0"),
    ],
)
def test_validation_exit_code(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "validation error" in err


def test_negative_count_is_parse_error(capsys, tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("n_ab,n_ab_perp,n_aperp_b,n_aperp_bperp,n_pairs,angle_deg,hypothesis,seed\n10,-2,3,4,100,22.5,qm,1\n")
    code, _, err = run(capsys, "analyze", str(p))
    assert code == 3
    assert "line 2" in err


def test_malformed_json_is_parse_error(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"schema": "nullresult.counts/1",\n "settings": [\n')
    code, _, err = run(capsys, "analyze", str(p))
    assert code == 3 and "line" in err and "column" in err


def test_degenerate_counts(capsys, tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("n_ab,n_ab_perp,n_aperp_b,n_aperp_bperp,n_pairs,angle_deg,hypothesis,seed\n0,0,3,4,100,22.5,qm,1\n")
    code, _, err = run(capsys, "analyze", str(p))
    assert code == 4 and "degenerate" in err


def test_missing_file_is_io_error(capsys, tmp_path):
    code, _, _ = run(capsys, "analyze", str(tmp_path / "nope.json"))
    assert code == 5
