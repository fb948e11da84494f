import csv
import json

import pytest

from netsize.cli import main


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(ln for ln in fh if not ln.startswith("#")))


def test_pipeline(workdir):
    (workdir / "spec.json").write_text(json.dumps({"block_sizes": [60, 40], "p": [[0.4, 0.1], [0.1, 0.5]]}))
    assert main(["generate", "--config", "spec.json", "--seed", "1", "--out", "g.edges"]) == 0
    assert (workdir / "g.edges.labels").exists()
    assert main(["sample", "g.edges", "--n", "40", "--seed", "2", "--out", "obs.json"]) == 0
    assert main(["estimate-nsum", "obs.json", "--out", "nsum.csv"]) == 0
    assert float(read_csv("nsum.csv")[0]["N_hat"]) > 0
    (workdir / "cfg.json").write_text(json.dumps({"chain": {"iterations": 8000, "burn_in": 2000, "thin": 4}}))
    assert main(["estimate-pulse", "obs.json", "--config", "cfg.json", "--seed", "5",
                 "--out", "pulse.csv", "--trace", "trace.csv"]) == 0
    row = read_csv("pulse.csv")[0]
    assert len(row["N_hat_blocks"].split(";")) == 2 and row["seed"] == "5"
    trace = read_csv("trace.csv")
    assert len(trace) == 1500 and trace[0]["iteration"] == "2004"
    assert int(trace[0]["N"]) == int(trace[0]["ntilde_1"]) + int(trace[0]["ntilde_2"]) + 40


def test_experiment_rerun_identical(workdir):
    plan = {"name": "vary_n", "grid": {"N": [150], "n": [40, 80]}, "replicates_per_point": 2,
            "chains_per_graph": 1, "chain": {"iterations": 5000, "burn_in": 1000}}
    (workdir / "plan.json").write_text(json.dumps(plan))
    assert main(["experiment", "plan.json", "--out", "a.csv"]) == 0
    assert main(["experiment", "plan.json", "--out", "b.csv", "--jobs", "2"]) == 0
    a = (workdir / "a.csv").read_text().split("\n", 1)[1]
    b = (workdir / "b.csv").read_text().split("\n", 1)[1]
    assert a == b
    assert main(["experiment", "plan.json", "--out", "c.csv", "--seed", "99"]) == 0
    assert (workdir / "c.csv").read_text().split("\n", 1)[1] != a
    assert main(["plot-script", "a.csv", "--out", "a.gp"]) == 0
    assert (workdir / "a.gp").exists()


def test_exit_codes(workdir, capsys):
    assert main(["estimate-nsum", "missing.json"]) == 1
    (workdir / "bad.json").write_text("{not json")
    assert main(["experiment", "bad.json"]) == 1
    (workdir / "plan.json").write_text(json.dumps({"name": "nope"}))
    assert main(["experiment", "plan.json"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["sample", "g.edges"])
    assert exc.value.code == 1
    # a sample without induced edges: NSUM cannot be computed
    obs = {"K": 1, "sample_ids": [0, 1], "degree": [1, 2], "block": [1, 1], "induced_edges": []}
    (workdir / "obs.json").write_text(json.dumps(obs))
    assert main(["estimate-nsum", "obs.json"]) == 2
    # inconsistent data: degree below the within-sample degree
    obs = {"K": 1, "sample_ids": [0, 1], "degree": [0, 1], "block": [1, 1], "induced_edges": [[0, 1]]}
    (workdir / "obs.json").write_text(json.dumps(obs))
    assert main(["estimate-nsum", "obs.json"]) == 1
    # infeasible chain start: pendant degree above K * ntilde_max
    obs = {"K": 1, "sample_ids": [0, 1], "degree": [9, 1], "block": [1, 1], "induced_edges": [[0, 1]]}
    (workdir / "obs.json").write_text(json.dumps(obs))
    (workdir / "cfg.json").write_text(json.dumps({"prior": {"ntilde_max": 3}}))
    assert main(["estimate-pulse", "obs.json", "--config", "cfg.json"]) == 2
