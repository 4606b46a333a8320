import json

import numpy as np
import pytest

import ealab as ea
from ealab.cli import main


def run_cli(*argv):
    return main(list(argv))


def test_solve_smoke(capsys):
    assert run_cli("solve", "--d", "2", "--L", "4", "--bc", "fixed-plus",
                   "--seed", "7") == 0
    out = capsys.readouterr().out
    assert "method=exhaustive" in out
    assert "exact=true" in out
    assert "energy=" in out and "config=" in out


def test_solve_matches_library(capsys):
    assert run_cli("solve", "--d", "1", "--L", "5", "--topology", "free",
                   "--seed", "3") == 0
    out = capsys.readouterr().out
    g = ea.build_cube(ea.Topology.free_cube(1, 5))
    res = ea.solve_exact(g, ea.sample_disorder(g, 3))
    assert f"energy={res.energy:.12f}" in out


def test_chaos_writes_records_and_aggregates(tmp_path, capsys):
    out = tmp_path / "chaos.csv"
    code = run_cli("chaos", "--d", "2", "--L", "3", "--kind", "rotate",
                   "--p", "0.1,0.3,0.5", "--replicates", "20", "--seed", "42",
                   "--out", str(out))
    assert code == 0
    records = ea.read_records(out)
    assert len(records) == 60  # 3 parameter points x 20 replicates
    agg = (tmp_path / "chaos.agg.csv").read_text().strip().split("\n")
    assert len(agg) == 4  # header + 3 parameter points
    assert agg[0].startswith("experiment,")


def test_config_file_and_override(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "experiment": "chaos", "d": 2, "L": [3], "p": [0.3],
        "replicates": 100, "seed": 1}))
    out = tmp_path / "r.csv"
    code = run_cli("chaos", "--config", str(cfg_path), "--replicates", "10",
                   "--out", str(out))
    assert code == 0
    assert len(ea.read_records(out)) == 10


def test_bad_config_key_is_usage_error(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"experiment": "chaos", "oops": 1}))
    assert run_cli("chaos", "--config", str(cfg_path)) == 1


def test_bad_p_is_usage_error():
    assert run_cli("chaos", "--p", "1.5", "--replicates", "5") == 1


def test_jsonl_format(tmp_path):
    out = tmp_path / "r.jsonl"
    code = run_cli("decay", "--d", "2", "--L", "3", "--replicates", "5",
                   "--seed", "2", "--out", str(out), "--format", "jsonl")
    assert code == 0
    rows = [json.loads(line) for line in out.read_text().strip().split("\n")]
    assert all(row["experiment"] == "decay" for row in rows)


def test_gen_and_inspect(tmp_path, capsys):
    prefix = tmp_path / "inst"
    assert run_cli("gen", "--d", "2", "--L", "3", "--seed", "5",
                   "--out", str(prefix)) == 0
    g = ea.load_graph(f"{prefix}.graph")
    assert g.n_vertices == 16
    J = ea.read_disorder_csv(f"{prefix}.csv", g)
    assert np.array_equal(J.couplings, ea.sample_disorder(g, 5).couplings)
    capsys.readouterr()
    assert run_cli("inspect", "--graph", f"{prefix}.graph") == 0
    out = capsys.readouterr().out
    assert "vertices=16" in out


def test_verify_quick(capsys):
    assert run_cli("verify", "--scale", "0.05", "--seed", "1") == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 4


def test_thread_flag_gives_identical_bytes(tmp_path):
    outs = []
    for threads, name in ((1, "a.csv"), (8, "b.csv")):
        out = tmp_path / name
        code = run_cli("critical", "--bc", "free", "--topology", "torus",
                       "--d", "2", "--L", "3", "--replicates", "10",
                       "--seed", "9", "--threads", str(threads),
                       "--out", str(out))
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_env_threads_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("EA_LAB_THREADS", "2")
    out = tmp_path / "env.csv"
    assert run_cli("chaos", "--d", "2", "--L", "3", "--p", "0.3",
                   "--replicates", "6", "--seed", "4", "--out", str(out)) == 0
    assert len(ea.read_records(out)) == 6
