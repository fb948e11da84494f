import io
import json
import pytest

from netsize import ValidationError
from netsize.experiments import (
    CSV_COLUMNS,
    ExperimentPlan,
    expand_points,
    mix,
    read_rows,
    run_experiment,
    write_rows,
)
from netsize.plotscript import emit_plot_script

FAST = {"iterations": 6000, "burn_in": 1000, "thin": 5}


def small_plan(**kw):
    d = dict(name="vary_p", grid={"N": [120], "n": [40], "p": [0.2, 0.6]},
             replicates_per_point=2, chains_per_graph=2, chain=FAST, base_seed=11)
    d.update(kw)
    return ExperimentPlan(**d)


def test_mix_is_order_sensitive_and_64_bit():
    seeds = {mix(0, p, g, s) for p in range(5) for g in range(5) for s in range(5)}
    assert len(seeds) == 125
    assert all(0 <= s < 2**64 for s in seeds)
    assert mix(1, 2) != mix(2, 1)
    assert mix(7, 0, 0, 0) == mix(7, 0, 0, 0)


def test_plan_validation():
    with pytest.raises(ValidationError):
        ExperimentPlan("nope")
    with pytest.raises(ValidationError):
        small_plan(grid={"p": []})
    with pytest.raises(ValidationError):
        small_plan(grid={"q": [1]})
    with pytest.raises(ValidationError):
        small_plan(replicates_per_point=0)
    with pytest.raises(ValidationError):
        small_plan(chain={"bogus": 1})
    with pytest.raises(ValidationError):
        ExperimentPlan.from_dict({"name": "vary_p", "extra": 1})


def test_points_order():
    pts = expand_points(small_plan())
    assert [p["p"] for p in pts] == [0.2, 0.6]


def test_row_structure_and_order():
    rows = run_experiment(small_plan(), log=None)
    # per graph: one NSUM row then two chains
    assert len(rows) == 2 * 2 * 3
    keys = [(int(r["point_index"]), int(r["graph_index"]), r["chain_index"]) for r in rows]
    assert keys == sorted(keys, key=lambda k: (k[0], k[1], -1 if k[2] == "" else int(k[2])))
    assert [r["estimator"] for r in rows[:3]] == ["nsum", "pulse", "pulse"]
    assert all(set(r) == set(CSV_COLUMNS) for r in rows)
    assert all(r["status"] == "ok" for r in rows)


def test_rows_independent_of_jobs():
    plan = small_plan()
    assert run_experiment(plan, jobs=1, log=None) == run_experiment(plan, jobs=2, log=None)


def test_adding_grid_points_keeps_earlier_rows():
    a = run_experiment(small_plan(), log=None)
    b = run_experiment(small_plan(grid={"N": [120], "n": [40], "p": [0.2, 0.6, 0.9]}), log=None)
    assert b[: len(a)] == a


def test_rows_are_regenerable_from_provenance():
    from netsize import SbmSpec, generate_sbm, nsum_estimate, sample_induced, sufficient_stats

    r = run_experiment(small_plan(), log=None)[3]
    params = json.loads(r["params"])
    g = generate_sbm(SbmSpec(params["block_sizes"], params["p"]), int(r["graph_seed"]))
    stats = sufficient_stats(sample_induced(g, int(r["n"]), int(r["sample_seed"])))
    assert repr(nsum_estimate(stats).estimate) == r["N_hat"]


def test_infeasible_point_is_a_row_level_error():
    plan = ExperimentPlan("epsilon_sweep", grid={"N1": [30], "N2": [40], "n": [20], "epsilon": [0.9, 0.1]},
                          replicates_per_point=1, chains_per_graph=1, chain=FAST)
    rows = run_experiment(plan, log=None)
    assert rows[0]["status"].startswith("error:") and "feasible epsilon range" in rows[0]["status"]
    assert [r["status"] for r in rows[1:]] == ["ok", "ok"]


def test_empty_sample_marks_nsum_undefined():
    plan = ExperimentPlan("single_run", grid={"block_sizes": [[30]], "p": [[[0.0]]], "n": [10]},
                          replicates_per_point=1, chains_per_graph=1, chain=FAST)
    nsum, pulse = run_experiment(plan, log=None)
    assert nsum["status"].startswith("undefined")
    assert pulse["status"] == "ok"


def test_census_single_run():
    plan = ExperimentPlan("single_run", grid={"block_sizes": [[60]], "p": [[[0.3]]], "n": [60]},
                          replicates_per_point=1, chains_per_graph=1, chain=FAST)
    nsum, pulse = run_experiment(plan, log=None)
    assert float(nsum["N_hat"]) == 60.0
    assert float(pulse["q975"]) == 60.0
    assert abs(float(pulse["N_hat"]) - 60) < 0.05


def test_heatmap_and_crp_rows():
    plan = ExperimentPlan("partition_heatmap", grid={"ratio": [0.3], "n": [60]},
                          replicates_per_point=2, chains_per_graph=1, chain=FAST)
    rows = run_experiment(plan, log=None)
    ps = [json.loads(r["params"])["p"] for r in rows if r["estimator"] == "nsum"]
    for p in ps:
        assert 0.5 <= p[0][0] <= 1 and 0.5 <= p[1][1] <= 1 and 0 <= p[0][1] <= min(p[0][0], p[1][1])
    assert ps[0] != ps[1]
    plan = ExperimentPlan("crp_K_sweep", grid={"fraction": [0.5]}, replicates_per_point=2,
                          chains_per_graph=1, chain=FAST)
    rows = run_experiment(plan, log=None)
    for r in rows:
        assert r["y"] == r["K"]
        assert sum(int(v) for v in r["N_true_blocks"].split(";")) == 200


def test_runtime_estimate_printed():
    buf = io.StringIO()
    run_experiment(small_plan(replicates_per_point=1, chains_per_graph=1), log=buf)
    assert "projected" in buf.getvalue()


def test_full_scale_counts():
    plan = small_plan().full_scale()
    assert (plan.replicates_per_point, plan.chains_per_graph) == (100, 50)


def test_csv_roundtrip_and_byte_identity(tmp_path):
    plan = small_plan()
    write_rows(run_experiment(plan, log=None), tmp_path / "a.csv")
    write_rows(run_experiment(plan, log=None), tmp_path / "b.csv")
    a = (tmp_path / "a.csv").read_bytes().split(b"\n", 1)
    b = (tmp_path / "b.csv").read_bytes().split(b"\n", 1)
    assert a[0].startswith(b"# ") and a[1] == b[1]
    rows = read_rows(tmp_path / "a.csv")
    assert len(rows) == 12 and rows[0]["experiment"] == "vary_p"


def test_plot_scripts(tmp_path):
    plan = small_plan()
    csv_path = tmp_path / "e.csv"
    write_rows(run_experiment(plan, log=None), csv_path)
    box = emit_plot_script(csv_path, "boxplot").read_text()
    assert "$pulse << EOD" in box and "$nsum << EOD" in box and "boxplot" in box
    hm_plan = ExperimentPlan("partition_heatmap", grid={"ratio": [0.3, 0.5], "n": [40, 60]},
                             replicates_per_point=1, chains_per_graph=1, chain=FAST)
    write_rows(run_experiment(hm_plan, log=None), tmp_path / "h.csv")
    hm = emit_plot_script(tmp_path / "h.csv", "heatmap", tmp_path / "h.gp").read_text()
    assert "pm3d" in hm and hm.count("EOD") == 4


def test_plot_script_empty_and_bad(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("# generated\n" + ",".join(CSV_COLUMNS) + "\n")
    with pytest.warns(UserWarning, match="empty frame"):
        text = emit_plot_script(empty, "boxplot").read_text()
    assert "no data" in text
    bad = tmp_path / "bad.csv"
    bad.write_text("experiment,x\nvary_p,0.1\n")
    with pytest.raises(ValidationError, match="estimator"):
        emit_plot_script(bad, "boxplot")
