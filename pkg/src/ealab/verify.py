"""Built-in invariant suite behind ``ea-lab verify``.

Each check runs a batch of randomized instances and counts hard failures of
identities or inequalities that must hold deterministically for exact
solves:

* the flip cost of a region equals twice the coupling sum over its edge
  boundary,
* the droplet cost ratio obeys the rotation-perturbation bound,
* the unconstrained ground state follows the sign of J_e minus the
  constrained-minima threshold, with the matching energy identity,
* critical droplets on tori satisfy the discrete isoperimetric inequality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import streams
from .disorder import PerturbationSpec, couple, sample_disorder
from .lattice import Topology, build_cube, build_explicit
from .observables import critical_droplet, interface_energy, valley_upper_bound
from .solver import BoundaryCondition, SolverPolicy, solve_exact

__all__ = ["CheckResult", "run_verification"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    failures: int
    total: int
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _random_tree(n: int, seed: int, label: str):
    attach = streams.indices(seed, label, n - 1, n)
    edges = [(int(attach[v - 1]) % v, v) for v in range(1, n)]
    return build_explicit(n, edges)


def _instance_pool(seed: int, count: int):
    """Mixed small instances: paths, random trees, open squares, a torus."""
    pool = []
    for k in range(count):
        variant = k % 4
        if variant == 0:
            n = 4 + k % 9
            g = build_explicit(n, [(i, i + 1) for i in range(n - 1)])
            bc = BoundaryCondition.free()
        elif variant == 1:
            g = _random_tree(5 + k % 8, seed, f"tree:{k}")
            bc = BoundaryCondition.free()
        elif variant == 2:
            g = build_cube(Topology.open_cube(2, 3 + k % 2))
            bc = BoundaryCondition.all_plus(g)
        else:
            g = build_cube(Topology.torus(2, 3))
            bc = BoundaryCondition.free()
        pool.append((g, bc))
    return pool


def check_delta_identity(seed: int = 1, instances: int = 100,
                         regions_per_instance: int = 10) -> CheckResult:
    failures = 0
    total = 0
    for k, (g, bc) in enumerate(_instance_pool(seed, instances)):
        J = sample_disorder(g, seed, f"delta:{k}")
        sigma = solve_exact(g, J, bc).config
        interior = [int(v) for v in g.interior]
        picks = streams.uniforms(seed, f"delta:regions:{k}",
                                 regions_per_instance * len(interior))
        for r in range(regions_per_instance):
            row = picks[r * len(interior):(r + 1) * len(interior)]
            region = [v for v, u in zip(interior, row) if u < 0.5]
            total += 1
            try:
                delta = interface_energy(g, J, sigma, region)
            except Exception:
                failures += 1
                continue
            if delta < -1e-9:
                failures += 1
    return CheckResult("flip cost equals edge-boundary form (and is >= 0)",
                       failures, total)


def check_ratio_bound(seed: int = 2, instances: int = 100) -> CheckResult:
    failures = 0
    total = 0
    ps = (0.1, 0.3, 0.5)
    for k, (g, bc) in enumerate(_instance_pool(seed, instances)):
        spec = PerturbationSpec("rotation", ps[k % len(ps)])
        env = couple(g, seed, spec, label=f"sbound:{k}:")
        _, bound_ok, _ = valley_upper_bound(g, env, bc)
        total += 1
        if not bound_ok:
            failures += 1
    return CheckResult("droplet ratio obeys the rotation perturbation bound",
                       failures, total)


def check_threshold_consistency(seed: int = 3, instances: int = 100) -> CheckResult:
    failures = 0
    total = 0
    for k, (g, bc) in enumerate(_instance_pool(seed, instances)):
        J = sample_disorder(g, seed, f"threshold:{k}")
        # Both pair constraints must be feasible, so the edge needs an
        # interior endpoint when the boundary is pinned.
        usable = [e for e in range(g.n_edges)
                  if not (g.boundary_mask[g.edges[e, 0]]
                          and g.boundary_mask[g.edges[e, 1]])]
        pick = int(streams.indices(seed, f"threshold:edge:{k}", 1, len(usable))[0])
        total += 1
        try:
            critical_droplet(g, J, bc, usable[pick], check_ground_state=True)
        except Exception:
            failures += 1
    return CheckResult("ground state follows the constrained-minima threshold",
                       failures, total)


def check_isoperimetry(seed: int = 4, instances: int = 60, L: int = 4) -> CheckResult:
    g = build_cube(Topology.torus(2, L))
    bc = BoundaryCondition.free()
    failures = 0
    total = 0
    edges = streams.indices(seed, "iso:edges", instances, g.n_edges)
    for k in range(instances):
        J = sample_disorder(g, seed, f"iso:{k}")
        cd = critical_droplet(g, J, bc, int(edges[k]))
        if cd.size == 0:
            continue
        total += 1
        if cd.boundary_size < 2.0 * cd.size ** 0.5 - 1e-9:
            failures += 1
    return CheckResult("torus critical droplets satisfy isoperimetry",
                       failures, total)


def run_verification(seed: int = 0, scale: float = 1.0) -> list[CheckResult]:
    """Run every invariant check; ``scale`` shrinks batch sizes for smoke runs."""
    n = max(4, int(100 * scale))
    return [
        check_delta_identity(seed + 1, n, max(2, int(10 * scale))),
        check_ratio_bound(seed + 2, n),
        check_threshold_consistency(seed + 3, n),
        check_isoperimetry(seed + 4, max(4, int(60 * scale))),
    ]
