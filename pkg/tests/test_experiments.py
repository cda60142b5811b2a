import csv
import json

import numpy as np
import pytest

from mubtomo import cli
from mubtomo.experiments import (
    CONVENTIONS,
    ExperimentConfig,
    run_experiment,
    shadow_histograms,
    tail_deltas,
)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# -- configuration -----------------------------------------------------------------


def test_parse_flags():
    cfg = cli.parse_config(["fig1", "--trials", "2000", "--seed", "7"])
    assert (cfg.kind, cfg.trials, cfg.seed) == ("fig1", 2000, 7)


def test_defaults():
    assert cli.parse_config(["fig3"]).shadow_samples == 500_000
    fig1 = cli.parse_config(["fig1"])
    assert fig1.trials == 20_000 and fig1.seed == 0xC0FFEE
    assert cli.parse_config(["fig2"]).catalogs == ["090", "306"]


def test_hex_seed_and_lists():
    cfg = cli.parse_config(["fig2", "--seed", "0x10", "--catalogs", "234,162", "--families", "w,separable"])
    assert cfg.seed == 16 and cfg.catalogs == ["234", "162"] and cfg.families == ["W", "SEPARABLE"]


@pytest.mark.parametrize(
    "argv",
    [["fig1", "--trials", "0"], ["fig1", "--bogus"], ["nope"], ["fig1", "--catalogs", "999"], ["fig1", "--families", "X"]],
)
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        cli.parse_config(argv)
    assert info.value.code == 2


def test_config_file_and_flag_override(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"trials": 300, "seed": 5, "catalogs": "090,306", "out": "x"}))
    cfg = cli.parse_config(["fig1", "--config", str(path), "--seed", "9"])
    assert (cfg.trials, cfg.seed, cfg.catalogs, cfg.output_dir) == (300, 9, ["090", "306"], "x")


def test_config_file_unknown_key(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"trails": 3}))
    with pytest.raises(SystemExit) as info:
        cli.parse_config(["fig1", "--config", str(path)])
    assert info.value.code == 2


def test_config_validation():
    with pytest.raises(ValueError, match="seed"):
        ExperimentConfig("fig1", seed=-1)
    with pytest.raises(ValueError, match="unknown experiment"):
        ExperimentConfig("fig9")


# -- runs ---------------------------------------------------------------------------


def test_verify_cli(tmp_path, capsys):
    assert cli.main(["verify", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    for sig in ("(2,3,4)", "(0,9,0)", "(1,6,2)", "(3,0,6)"):
        assert sig in out
    rows = read_csv(tmp_path / "verify.csv")
    assert all(r["passed"] == "True" for r in rows)


def test_fig1_small_run_and_metadata(tmp_path):
    cfg = ExperimentConfig("fig1", trials=60, seed=3, output_dir=str(tmp_path))
    report = run_experiment(cfg)
    rows = read_csv(report.data[0])
    assert len(rows) == 16
    assert all(int(r["trials"]) == 60 for r in rows)
    assert all(float(r["mean"]) > 0 for r in rows)
    meta = json.loads(report.meta.read_text())
    assert meta["seed"] == 3 and meta["config"]["trials"] == 60
    assert meta["conventions"] == CONVENTIONS
    assert set(meta["ensembles"]) == {"GHZ", "W", "BIPARTITE", "SEPARABLE"}
    assert all(p.suffix == ".svg" and p.exists() for p in report.plots)


def test_fig2_row_counts(tmp_path):
    report = run_experiment(ExperimentConfig("fig2", trials=40, catalogs=["090", "306"], families=["GHZ", "W"],
                                             output_dir=str(tmp_path)))
    assert len(read_csv(report.data[0])) == 2 * 2 * 40
    assert len(read_csv(report.data[1])) == 4


def test_fig3_histograms_are_normalized(tmp_path):
    report = run_experiment(ExperimentConfig("fig3", shadow_samples=2000, catalogs=["090", "306"],
                                             families=["GHZ"], output_dir=str(tmp_path)))
    rows = read_csv(tmp_path / "fig3_GHZ.csv")
    assert len(rows) == 100
    assert list(rows[0]) == ["bin_low", "bin_high", "P_090", "P_306", "delta"]
    for col in ("P_090", "P_306"):
        assert sum(float(r[col]) for r in rows) == pytest.approx(1, abs=1e-9)
    assert report.data[-1].name == "fig3_tails.csv"


def test_fig3_needs_two_catalogs(tmp_path):
    with pytest.raises(ValueError, match="two catalogs"):
        run_experiment(ExperimentConfig("fig3", shadow_samples=10, catalogs=["090"], output_dir=str(tmp_path)))


def test_shadow_run(tmp_path):
    report = run_experiment(ExperimentConfig("shadow", shadow_samples=50, catalogs=["090"], families=["W"],
                                             output_dir=str(tmp_path)))
    assert len(read_csv(report.data[0])) == 50
    axes = read_csv(report.data[1])
    assert len(axes) == 9
    assert all(abs(float(r["eigenvalue_0"])) <= 1e-12 for r in axes)


def test_standard_error_shrinks_as_inverse_sqrt(tmp_path):
    se = []
    for n in (500, 2000, 8000):
        rep = run_experiment(ExperimentConfig("fig1", trials=n, catalogs=["090"], families=["GHZ"],
                                              output_dir=str(tmp_path / str(n))))
        se.append(rep.summary["rows"][0][3])
    slope = np.polyfit(np.log([500, 2000, 8000]), np.log(se), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.05)


def test_io_failure_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["verify", "--out", str(blocker / "sub")]) == 1
    assert "I/O error" in capsys.readouterr().err


# -- histogram helpers --------------------------------------------------------------------


def test_shadow_histograms_share_bins():
    edges, ha, hb = shadow_histograms(np.array([0.0, 1.0]), np.array([0.5, 2.0]), bins=4)
    np.testing.assert_allclose(edges, [0, 0.5, 1, 1.5, 2])
    np.testing.assert_allclose(ha, [0.5, 0, 0.5, 0])
    np.testing.assert_allclose(hb, [0, 0.5, 0, 0.5])


def test_tail_deltas_include_crossing_bin():
    ha = np.array([0.0, 0.03, 0.04, 0.86, 0.04, 0.03])
    hb = np.array([0.0, 0.01, 0.06, 0.90, 0.02, 0.01])
    left, right = tail_deltas(ha, hb, mass=0.05)
    # left: bins 1 (pooled 0.02) and 2 (crosses 0.05); right: bins 5 and 4
    assert left == pytest.approx(0.02 - 0.02)
    assert right == pytest.approx(0.02 + 0.02)
