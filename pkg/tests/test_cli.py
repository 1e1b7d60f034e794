import csv
import json

import numpy as np
import pytest

from echoassign.cli import SWEEP_COLUMNS, main, stream
from echoassign.devicegraph import load_layout


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["gen-noisemap", "--rows", "3", "--cols", "3", "--seed", "4", "--planted", "--planted-n", "3",
                 "--readout-range", "0.0", "0.05", "--out", str(d / "map")]) == 0
    assert main(["sweep", "--layout", str(d / "map" / "layout.json"), "--n", "3", "--rand-r", "2",
                 "--shots", "500", "--out", str(d / "sweep")]) == 0
    return d


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_streams_independent_and_reproducible():
    assert stream(1, 0, "anneal").random() == stream(1, 0, "anneal").random()
    assert stream(1, 0, "anneal").random() != stream(1, 1, "anneal").random()
    assert stream(1, 0, "anneal").random() != stream(1, 0, "baseline").random()


def test_gen_noisemap(workdir):
    g = load_layout(workdir / "map" / "layout.json")
    assert len(g.vertices) == 9
    meta = json.loads((workdir / "map" / "layout.json").read_text())
    assert len(meta["planted"]) == 3
    assert json.loads((workdir / "map" / "manifest.json").read_text())["command"] == "gen-noisemap"


def test_sweep_schema(workdir):
    rows = read_csv(workdir / "sweep" / "sweep.csv")
    assert list(rows[0]) == SWEEP_COLUMNS
    assert len(rows) == 44  # sum of deg*(deg-1) over a 3x3 grid
    for r in rows[:5]:
        assert 0 <= float(r["F"]) <= 1 and 0 <= float(r["F_LE"]) <= 1
        assert float(r["F_LE_rand_std"]) >= 0


def test_sweep_is_reproducible(workdir, tmp_path):
    main(["sweep", "--layout", str(workdir / "map" / "layout.json"), "--n", "3", "--rand-r", "2",
          "--shots", "500", "--out", str(tmp_path)])
    assert (tmp_path / "sweep.csv").read_bytes() == (workdir / "sweep" / "sweep.csv").read_bytes()


def test_anneal_offline(workdir):
    out = workdir / "anneal"
    assert main(["anneal", "--layout", str(workdir / "map" / "layout.json"), "--sweep",
                 str(workdir / "sweep" / "sweep.csv"), "--n", "3", "--trials", "5", "--steps", "30",
                 "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["trials"] == 5 and len(summary["improvement_ci95"]) == 2
    assert len(list((out / "traces").glob("*.csv"))) == 5
    rows = read_csv(out / "summary.csv")
    assert all(int(r["n_s"]) <= 31 for r in rows)


def test_anneal_online(workdir, tmp_path):
    assert main(["anneal", "--layout", str(workdir / "map" / "layout.json"), "--n", "3", "--trials", "2",
                 "--steps", "5", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "summary.json").read_text())["trials"] == 2


def test_report(workdir):
    out = workdir / "report"
    assert main(["report", "--sweep", str(workdir / "sweep" / "sweep.csv"), "--layout",
                 str(workdir / "map" / "layout.json"), "--resamples", "200", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["rows"] == 44
    assert -1 <= rep["tau_b"]["F_LE"] <= 1 and rep["tau_b_bootstrap_std"]["F_LE"] > 0
    assert len(rep["conditional"]["F_LE"]) == 19
    assert [int(r["k"]) for r in read_csv(out / "locality.csv")] == [0, 1, 2, 3]


def test_errors_exit_2(tmp_path, capsys):
    assert main(["sweep", "--layout", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    assert json.loads(capsys.readouterr().err)["error"]
    assert main(["sweep", "--layout", "builtin:rainbow", "--n", "3", "--circuit", "swapnet",
                 "--alpha", "1", "--beta", "1", "--out", str(tmp_path)]) == 2
