import json

import numpy as np
import pytest

import ealab as ea
from ealab.errors import ParseError, UnknownKey, WrongKind
from ealab.experiments import depth_classes, interior_pairs, left_half_region


def test_config_defaults_and_validation():
    cfg = ea.ExperimentConfig(experiment="chaos", p=(0.3,))
    assert cfg.replicates == 2000
    assert cfg.topology == "open"
    cfg = ea.ExperimentConfig(experiment="critical", bc="periodic", L=[4])
    assert cfg.topology == "torus"
    assert cfg.replicates == 500
    with pytest.raises(ParseError):
        ea.ExperimentConfig(experiment="nope")
    with pytest.raises(ParseError):
        ea.ExperimentConfig(experiment="chaos", p=(1.0,))
    with pytest.raises(ParseError):
        ea.ExperimentConfig(experiment="chaos", p=(0.3,), K=2.0)
    with pytest.raises(ParseError):
        ea.ExperimentConfig(experiment="chaos", bc="periodic", topology="open")


def test_load_config_minimal_and_strict(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"experiment": "chaos", "d": 2, "L": [5],
                                "p": [0.3], "replicates": 100, "seed": 1}))
    cfg = ea.load_config(path)
    assert cfg.L == (5,) and cfg.p == (0.3,) and cfg.replicates == 100

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"experiment": "chaos", "p": [1.0]}))
    with pytest.raises(ParseError):
        ea.load_config(bad)

    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"experiment": "chaos", "pee": [0.5]}))
    with pytest.raises(UnknownKey):
        ea.load_config(unknown)

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ParseError):
        ea.load_config(broken)


def test_flag_overrides_beat_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"experiment": "chaos", "L": [4], "p": [0.3],
                                "replicates": 100}))
    cfg = ea.load_config(path, {"replicates": 10})
    assert cfg.replicates == 10


def test_K_rule():
    cfg = ea.ExperimentConfig(experiment="valleys", d=1, L=(8, 16), K=2.0,
                              replicates=5)
    assert cfg.p_values(8) == (0.25,)
    assert cfg.p_values(16) == (0.125,)


def test_chaos_records_and_identity():
    cfg = ea.ExperimentConfig(experiment="chaos", d=2, L=(3,), p=(0.3,),
                              replicates=40, seed=11)
    res = ea.run_chaos(cfg)
    assert len(res.records) == 40
    g = ea.build_cube(ea.Topology.open_cube(2, 3))
    m = len(g.interior)
    for rec in res.records:
        # Row-wise overlap-droplet identity.
        r = 1.0 - 2.0 * rec.droplet_size / m
        assert rec.R2 == r * r
        assert rec.exact
    est = res.extras["estimates"][(3, 0.3)]
    assert est.n == 40 and 0.0 <= est.mean <= 1.0


def test_chaos_single_replicate_reports_zero_stderr():
    cfg = ea.ExperimentConfig(experiment="chaos", d=2, L=(3,), p=(0.3,),
                              replicates=1, seed=11)
    res = ea.run_chaos(cfg)
    est = res.extras["estimates"][(3, 0.3)]
    assert est.n == 1 and est.stderr == 0.0


def test_chaos_p_to_one_matches_independent_control():
    # Rotation with p near 1 decorrelates the environments completely, so
    # E[R^2] must match a control run with two independent disorders.
    cfg = ea.ExperimentConfig(experiment="chaos", d=2, L=(3,),
                              p=(1.0 - 1e-9,), replicates=300, seed=21)
    res = ea.run_chaos(cfg)
    est = res.extras["estimates"][(3, 1.0 - 1e-9)]

    g = ea.build_cube(ea.Topology.open_cube(2, 3))
    bc = ea.BoundaryCondition.all_plus(g)
    control = []
    for k in range(300):
        Ja = ea.sample_disorder(g, 1000 + k, "ctrlA")
        Jb = ea.sample_disorder(g, 1000 + k, "ctrlB")
        sa = ea.solve_exact(g, Ja, bc).config
        sb = ea.solve_exact(g, Jb, bc).config
        control.append(ea.site_overlap(g, sa, sb).R_squared)
    ctrl = ea.mean_estimate(control)
    pooled = (est.stderr**2 + ctrl.stderr**2) ** 0.5
    assert abs(est.mean - ctrl.mean) <= 3 * pooled


def test_thread_determinism_all_experiments():
    base = dict(d=2, L=(3,), seed=13, replicates=12)
    configs = [
        ea.ExperimentConfig(experiment="chaos", p=(0.3,), **base),
        ea.ExperimentConfig(experiment="pair_correlation", p=(0.3,), **base),
        ea.ExperimentConfig(experiment="fractal", p=(0.3,), **base),
        ea.ExperimentConfig(experiment="valleys", d=1, L=(8,), K=2.0,
                            seed=13, replicates=12),
        ea.ExperimentConfig(experiment="fixed_region_tail", **base),
        ea.ExperimentConfig(experiment="critical", bc="periodic", d=2, L=(3,),
                            seed=13, replicates=12),
        ea.ExperimentConfig(experiment="decay", **base),
    ]
    for cfg in configs:
        serial = ea.run_experiment(cfg)
        from dataclasses import replace
        threaded = ea.run_experiment(replace(cfg, threads=8))
        assert serial.records == threaded.records, cfg.experiment


def test_pair_correlation_bound_columns():
    cfg = ea.ExperimentConfig(experiment="pair_correlation", d=2, L=(4,),
                              p=(0.3,), replicates=60, seed=3)
    res = ea.run_pair_correlation(cfg)
    g = ea.build_cube(ea.Topology.open_cube(2, 4))
    assert len(res.extras["cells"]) == len(interior_pairs(g))
    for cell in res.extras["cells"]:
        assert cell["bound"] == (1.0 - 0.3) ** cell["m"]
        assert cell["bound"] < 1.0
        assert cell["m"] >= 1
    passed = sum(c["passed"] for c in res.extras["cells"])
    assert passed >= 0.9 * len(res.extras["cells"])


def test_pair_correlation_free_bc_uses_graph_distance():
    g = ea.build_cube(ea.Topology.torus(2, 3))
    m = ea.experiments.pair_distance_exponent(g, 0, 4)
    assert m == ea.graph_distance(g, 0, 4)


def test_fractal_requires_rotation():
    cfg = ea.ExperimentConfig(experiment="fractal", kind="resample", p=(0.3,),
                              L=(3,), replicates=5)
    with pytest.raises(WrongKind):
        ea.run_fractal(cfg)


def test_fractal_tiny_p_mostly_empty_droplets():
    cfg = ea.ExperimentConfig(experiment="fractal", d=2, L=(4,), p=(1e-6,),
                              replicates=200, seed=17)
    res = ea.run_fractal(cfg)
    empty = sum(1 for rec in res.records if rec.boundary_size == 0)
    assert empty >= 0.95 * len(res.records)
    assert all(rec.boundary_size <= 40 for rec in res.records)  # |E| of 5x5 grid


def test_fractal_median_boundary_grows_with_p():
    cfg = ea.ExperimentConfig(experiment="fractal", d=2, L=(4,),
                              p=(0.05, 0.2, 0.5), replicates=300, seed=19)
    res = ea.run_fractal(cfg)
    medians = [res.extras["quantiles"][(4, p)][1] for p in (0.05, 0.2, 0.5)]
    assert medians[0] <= medians[1] + 1e-9
    assert medians[1] <= medians[2] + 1e-9


def test_valleys_contracts():
    cfg = ea.ExperimentConfig(experiment="valleys", d=1, L=(8, 12), K=2.0,
                              replicates=60, seed=23)
    res = ea.run_valleys(cfg)
    assert res.extras["bound_failures"] == 0
    assert res.extras["fexact_violations"] == 0
    for L in (8, 12):
        assert res.extras["n_size_ok"][L] > 0


def test_left_half_region():
    g = ea.build_cube(ea.Topology.open_cube(2, 4))
    region = left_half_region(g)
    coords = [g.vertex_coords(int(v)) for v in region]
    assert all(1 <= x <= 2 for x, _ in coords)
    assert len(region) == 6


def test_tail_negative_never():
    cfg = ea.ExperimentConfig(experiment="fixed_region_tail", d=2, L=(4,),
                              replicates=80, seed=29)
    res = ea.run_fixed_region_tail(cfg)
    assert res.extras["negative_ratio_count"] == 0
    tail = res.extras["tail"]
    assert tail[(4, 0.0)].mean == 0.0
    assert tail[(4, 10.0)].mean == 1.0


def test_critical_extras_and_isoperimetry():
    cfg = ea.ExperimentConfig(experiment="critical", bc="periodic", d=2,
                              L=(4,), replicates=40, seed=31)
    res = ea.run_critical(cfg)
    assert res.extras["iso_violations"] == 0
    assert res.extras["mean_size"][4].n == 40
    for rec in res.records:
        assert rec.Dsize <= 8  # complement convention on 16 vertices


def test_critical_matches_exact_oracle_on_chains():
    # Exhaustive critical droplets on small chains, via both solver modes.
    from dataclasses import replace
    cfg = ea.ExperimentConfig(experiment="critical", bc="fixed_all_plus",
                              topology="open", d=1, L=(10,), replicates=25,
                              seed=37)
    exact = ea.run_critical(cfg)
    annealed = ea.run_critical(replace(cfg, solver="anneal"))
    for a, b in zip(exact.extras["details"][10], annealed.extras["details"][10]):
        assert a[1] == b[1]  # same random edge
        assert a[2] == pytest.approx(b[2], abs=1e-9)  # H1
        assert a[3] == pytest.approx(b[3], abs=1e-9)  # H2
        assert a[4] == b[4]  # droplet size


def test_decay_depth_classes():
    g = ea.build_cube(ea.Topology.open_cube(2, 5))
    classes = depth_classes(g)
    assert set(classes) == {1, 2}
    g4 = ea.build_cube(ea.Topology.open_cube(2, 4))
    assert set(depth_classes(g4)) == {1}


def test_decay_records():
    cfg = ea.ExperimentConfig(experiment="decay", d=2, L=(4,), replicates=50,
                              seed=41)
    res = ea.run_decay(cfg)
    assert len(res.records) == 50
    est = res.extras["p_event"][(4, 1)]
    assert 0.0 <= est.lo95 <= est.mean <= est.hi95 <= 1.0


def test_records_round_trip_through_files(tmp_path):
    cfg = ea.ExperimentConfig(experiment="chaos", d=2, L=(3,), p=(0.2,),
                              replicates=25, seed=43)
    res = ea.run_chaos(cfg)
    for fmt in ("csv", "jsonl"):
        path = tmp_path / f"out.{fmt}"
        ea.write_records(res.records, path, fmt)
        assert ea.read_records(path) == res.records
