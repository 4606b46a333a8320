import math

import numpy as np
import pytest

import ealab as ea
from ealab import streams
from ealab.errors import LengthMismatch


@pytest.fixture(scope="module")
def grid():
    return ea.build_cube(ea.Topology.open_cube(2, 4))


def test_sampling_is_deterministic(grid):
    a = ea.sample_disorder(grid, 123, "J")
    b = ea.sample_disorder(grid, 123, "J")
    assert np.array_equal(a.couplings, b.couplings)


def test_streams_differ(grid):
    a = ea.sample_disorder(grid, 123, "J")
    b = ea.sample_disorder(grid, 123, "J'")
    c = ea.sample_disorder(grid, 124, "J")
    assert (a.couplings != b.couplings).any()
    assert (a.couplings != c.couplings).any()


def test_standard_normal_moments():
    values = streams.gaussians(7, "moments", 100_000)
    assert abs(values.mean()) < 0.02
    assert abs(values.var(ddof=1) - 1.0) < 0.02


def test_rotation_formula_single_edge():
    spec = ea.PerturbationSpec("rotation", 0.5)
    env = ea.perturb(ea.Disorder([1.0]), ea.Disorder([-1.0]), spec)
    assert env.perturbed.couplings[0] == pytest.approx(0.5 - math.sqrt(0.75), abs=1e-12)
    assert env.resample_mask is None


def test_rotation_coefficients_identity():
    rng = np.random.default_rng(0)
    for p in rng.uniform(1e-9, 1 - 1e-9, 100):
        a, b = ea.PerturbationSpec("rotation", float(p)).rotation_coefficients
        assert abs(a * a + b * b - 1.0) < 1e-15


def test_continuity_at_small_p(grid):
    J = ea.sample_disorder(grid, 5, "J")
    F = ea.sample_disorder(grid, 5, "J'")
    env = ea.perturb(J, F, ea.PerturbationSpec("rotation", 1e-12))
    scale = 1.0 + max(np.abs(J.couplings).max(), np.abs(F.couplings).max())
    assert np.abs(env.perturbed.couplings - J.couplings).max() < 1e-5 * scale


def test_resample_mask_density():
    n = 100_000
    g = ea.build_explicit(n // 2 + 1, [(i, i + 1) for i in range(n // 2)] +
                          [(0, n // 2)])
    J = ea.sample_disorder(g, 1, "J")
    F = ea.sample_disorder(g, 1, "J'")
    env = ea.perturb(J, F, ea.PerturbationSpec("resample", 0.3), mask_seed=9)
    density = env.resample_mask.mean()
    assert abs(density - 0.3) < 0.01
    # Perturbed equals fresh where masked, original elsewhere.
    m = env.resample_mask
    assert np.array_equal(env.perturbed.couplings[m], F.couplings[m])
    assert np.array_equal(env.perturbed.couplings[~m], J.couplings[~m])


def test_spec_validation():
    with pytest.raises(ValueError):
        ea.PerturbationSpec("rotation", 0.0)
    with pytest.raises(ValueError):
        ea.PerturbationSpec("rotation", 1.0)
    with pytest.raises(ValueError):
        ea.PerturbationSpec("spin", 0.5)
    spec = ea.PerturbationSpec("resample", 0.25)
    assert spec.t == pytest.approx(-math.log(0.75))


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        ea.perturb(ea.Disorder([1.0, 2.0]), ea.Disorder([1.0]),
                   ea.PerturbationSpec("rotation", 0.5))


@pytest.mark.parametrize("kind", ["rotation", "resample"])
def test_marginal_moments_and_correlation(kind):
    g = ea.build_cube(ea.Topology.torus(2, 10))  # 200 edges
    spec = ea.PerturbationSpec(kind, 0.2)
    envs = [ea.couple(g, seed, spec, label=f"m{seed}:") for seed in range(500)]
    report = ea.marginal_check(envs)
    assert report.n == 100_000
    assert abs(report.mean) < 0.02
    assert abs(report.variance - 1.0) < 0.02
    assert abs(report.correlation - 0.8) < 0.01
    capped = ea.marginal_check(envs, n=10_000)
    assert capped.n == 10_000


def test_coupled_reproducibility(grid):
    spec = ea.PerturbationSpec("resample", 0.4)
    a = ea.couple(grid, 77, spec, label="x:")
    b = ea.couple(grid, 77, spec, label="x:")
    assert np.array_equal(a.original.couplings, b.original.couplings)
    assert np.array_equal(a.fresh.couplings, b.fresh.couplings)
    assert np.array_equal(a.perturbed.couplings, b.perturbed.couplings)
    assert np.array_equal(a.resample_mask, b.resample_mask)


def test_disorder_csv_round_trip(tmp_path, grid):
    J = ea.sample_disorder(grid, 42)
    path = tmp_path / "disorder.csv"
    ea.write_disorder_csv(grid, J, path)
    back = ea.read_disorder_csv(path, grid)
    assert np.array_equal(back.couplings, J.couplings)
