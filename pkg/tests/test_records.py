import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ealab as ea
from ealab.errors import EmptyAggregation
from ealab.records import Record, mean_estimate, proportion_estimate


def test_mean_estimate_hand_values():
    est = mean_estimate([1.0, 2.0, 3.0])
    assert est.mean == 2.0
    assert est.stderr == pytest.approx(1.0 / math.sqrt(3))
    assert est.n == 3
    assert est.lo95 <= est.mean <= est.hi95


def test_single_observation():
    est = mean_estimate([5.0])
    assert est.mean == 5.0
    assert est.stderr == 0.0
    assert est.n == 1


def test_empty_aggregation():
    with pytest.raises(EmptyAggregation):
        mean_estimate([])
    with pytest.raises(EmptyAggregation):
        proportion_estimate(0, 0)
    with pytest.raises(EmptyAggregation):
        ea.aggregate([], kind="proportion")


def test_wilson_interval_contains_phat():
    for k, n in [(0, 10), (10, 10), (3, 17), (250, 500)]:
        est = proportion_estimate(k, n)
        assert 0.0 <= est.lo95 <= est.mean <= est.hi95 <= 1.0
    positive = proportion_estimate(1, 500)
    assert positive.lo95 > 0.0
    zero = proportion_estimate(0, 500)
    assert zero.lo95 == 0.0


def _random_record(rng: np.random.Generator, idx: int) -> Record:
    def maybe(value):
        return None if rng.random() < 0.3 else value

    return Record(
        experiment="chaos", d=int(rng.integers(1, 4)), L=int(rng.integers(2, 9)),
        topology="open", bc="fixed_all_plus", kind="rotation",
        p=maybe(float(rng.uniform(0, 1))), K=maybe(float(rng.uniform(0, 4))),
        replicate=idx, seed=7, exact=bool(rng.integers(0, 2)),
        R2=maybe(float(rng.standard_normal())),
        droplet_size=maybe(int(rng.integers(0, 50))),
        boundary_size=maybe(int(rng.integers(0, 50))),
        delta=maybe(float(rng.standard_normal() * 10)),
        ratio=maybe(float(rng.standard_normal())),
        size_ok=maybe(bool(rng.integers(0, 2))),
        bound_ok=maybe(bool(rng.integers(0, 2))),
        Dsize=maybe(int(rng.integers(0, 50))),
        DboundarySize=maybe(int(rng.integers(0, 50))),
        event=maybe(bool(rng.integers(0, 2))),
        r=maybe(int(rng.integers(0, 5))),
        energy0=maybe(float(rng.standard_normal() * 20)),
        energy1=maybe(float(rng.standard_normal() * 20)),
        walltime_ms=None,
    )


@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
def test_record_round_trip(tmp_path, fmt):
    rng = np.random.default_rng(0)
    records = [_random_record(rng, i) for i in range(1000)]
    path = tmp_path / f"records.{fmt}"
    ea.write_records(records, path, fmt)
    back = ea.read_records(path, fmt)
    assert back == records


def test_round_trip_is_bit_exact_for_floats(tmp_path):
    values = [1 / 3, math.pi, 1e-17, 123456789.123456789, 5e-324]
    records = [Record(experiment="chaos", d=2, L=3, topology="open",
                      bc="free", R2=v, replicate=i)
               for i, v in enumerate(values)]
    path = tmp_path / "r.csv"
    ea.write_records(records, path)
    back = ea.read_records(path)
    for rec, v in zip(back, values):
        assert rec.R2 == v


def test_write_records_deterministic_bytes(tmp_path):
    rng = np.random.default_rng(1)
    records = [_random_record(rng, i) for i in range(50)]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    ea.write_records(records, p1)
    ea.write_records(records, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_write_table(tmp_path):
    rows = [{"L": 4, "mean": 0.5, "stderr": 0.01, "lo95": 0.48, "hi95": 0.52},
            {"L": 5, "mean": 0.4, "stderr": 0.01, "lo95": 0.38, "hi95": 0.42}]
    path = tmp_path / "agg.csv"
    ea.write_table(rows, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "L,mean,stderr,lo95,hi95"
    assert len(lines) == 3


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False,
                          min_value=-1e12, max_value=1e12, width=64),
                min_size=2, max_size=40))
def test_mean_estimate_matches_numpy(values):
    est = mean_estimate(values)
    arr = np.asarray(values)
    assert est.mean == pytest.approx(arr.mean(), rel=1e-12, abs=1e-300)
    assert est.n == len(values)
