"""Observables on ground-state pairs: overlaps, droplets, interface energies.

These functions implement the quantities measured by the experiment suite:

* site overlap of two configurations over the interior,
* droplet (disagreement region) reports with edge boundary and flip cost,
* interface energy of overturning a region, computed two independent ways,
* the valley statistic: the minimal cost-per-boundary-edge over regions of
  macroscopic size, exactly and via a perturbation upper bound,
* critical droplets of an edge from the two constrained minimizers,
* the boundary-dependence event: does a neighboring pair's spin product
  stay the same under every boundary condition?
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .disorder import CoupledEnvironments, Disorder
from .errors import (
    DimensionMismatch,
    InternalMismatch,
    NotOpenCube,
    RegionTouchesBoundary,
    TooLarge,
    WrongKind,
)
from .lattice import LatticeGraph, edge_boundary
from .solver import (
    BoundaryCondition,
    PairConstraint,
    SolverPolicy,
    canonicalize,
    energy,
    solve_exact,
)

__all__ = [
    "OverlapSample",
    "DropletReport",
    "CriticalDroplet",
    "site_overlap",
    "flip_region",
    "interface_energy",
    "droplet",
    "valley_statistic_exact",
    "valley_upper_bound",
    "critical_droplet",
    "boundary_dependence",
    "boundary_dependence_batch",
]

DELTA_TOL = 1e-9


@dataclass(frozen=True)
class OverlapSample:
    """Interior site overlap of two configurations.

    ``droplet_size`` counts interior disagreements; with ``m`` interior
    vertices the identity ``droplet_size = m (1 - R) / 2`` holds exactly.
    """

    R: float
    R_squared: float
    droplet_size: int


@dataclass(frozen=True, eq=False)
class DropletReport:
    """Disagreement region with its edge boundary and flip cost."""

    region: np.ndarray
    boundary: np.ndarray
    size: int
    boundary_size: int
    delta: float
    ratio: float


@dataclass(frozen=True, eq=False)
class CriticalDroplet:
    """Disagreement set of the two pair-constrained minimizers of an edge."""

    edge: int
    region: np.ndarray
    size: int
    boundary_size: int
    H1: float
    H2: float
    threshold: float


def site_overlap(g: LatticeGraph, sigma_a, sigma_b) -> OverlapSample:
    """Overlap over interior vertices; inputs must share a gauge.

    Under a free boundary condition both configurations should be
    canonicalized first; R is then gauge-dependent but R^2 is not.
    """
    sa = _check_config(g, sigma_a)
    sb = _check_config(g, sigma_b)
    m = len(g.interior)
    k = int((sa[g.interior] != sb[g.interior]).sum())
    r = (m - 2 * k) / m
    return OverlapSample(r, r * r, k)


def flip_region(g: LatticeGraph, sigma, region) -> np.ndarray:
    """Overturn all spins of ``region``; an involution.

    ``region`` must avoid the boundary set (those spins are pinned under a
    fixed boundary condition).
    """
    sigma = _check_config(g, sigma)
    region = _check_region(g, region)
    out = sigma.copy()
    out[region] = -out[region]
    return out


def interface_energy(g: LatticeGraph, J: Disorder, sigma, region) -> float:
    """Energy cost of overturning ``region`` in the ground state ``sigma``.

    Computed both by flip-and-evaluate and as ``2 sum_{boundary edges}
    J_e s_u s_v``; the two must agree within 1e-9, otherwise the caller
    passed inconsistent inputs and :class:`InternalMismatch` is raised.
    Returns the edge-boundary form.  Nonnegative whenever ``sigma`` is an
    exact minimizer and the region respects the boundary condition.
    """
    sigma = _check_config(g, sigma)
    region = _check_region(g, region)
    flipped = flip_region(g, sigma, region)
    by_eval = energy(g, J, flipped) - energy(g, J, sigma)
    cut = edge_boundary(g, region)
    u = g.edges[cut, 0]
    v = g.edges[cut, 1]
    by_cut = float(2.0 * (J.couplings[cut] * sigma[u] * sigma[v]).sum())
    if abs(by_eval - by_cut) > DELTA_TOL:
        raise InternalMismatch(
            f"flip-and-evaluate {by_eval!r} vs edge-boundary form {by_cut!r}")
    return by_cut


def droplet(g: LatticeGraph, sigma_a, sigma_b, J: Disorder | None = None,
            bc: BoundaryCondition | None = None) -> DropletReport:
    """Disagreement region of two configurations.

    Under a free boundary condition the region and its complement describe
    the same droplet; the smaller side is reported, ties excluding the
    canonical pivot vertex.  With ``J`` supplied the flip cost ``delta`` and
    the ratio ``delta / |boundary|`` are evaluated in the first
    configuration (ratio 0 for an empty edge boundary).
    """
    bc = bc or BoundaryCondition.free()
    sa = _check_config(g, sigma_a)
    sb = _check_config(g, sigma_b)
    disagree = np.flatnonzero(sa != sb).astype(np.int64)
    if bc.is_free and 2 * len(disagree) > g.n_vertices:
        mask = np.ones(g.n_vertices, dtype=bool)
        mask[disagree] = False
        disagree = np.flatnonzero(mask).astype(np.int64)
    cut = edge_boundary(g, disagree)
    if J is None:
        delta = math.nan
        ratio = math.nan
    else:
        delta = interface_energy(g, J, sa, disagree)
        ratio = 0.0 if len(cut) == 0 else delta / len(cut)
    return DropletReport(disagree, cut, len(disagree), len(cut), delta, ratio)


def valley_statistic_exact(g: LatticeGraph, J: Disorder,
                           bc: BoundaryCondition | None = None,
                           cap: int = 20) -> tuple[float, np.ndarray]:
    """Exact minimum of delta(A)/|boundary(A)| over central-size regions.

    Enumerates every interior region A with ``|interior| <= 4 |A| <= 3
    |interior|`` (integer comparisons, no rounding).  Ties resolve to the
    lexicographically smallest region.  Requires at most ``cap`` interior
    vertices; the ground state is solved exactly first.
    """
    bc = bc or BoundaryCondition.free()
    m = len(g.interior)
    if m > cap:
        raise TooLarge(f"{m} interior vertices exceed the enumeration cap {cap}")
    sigma = solve_exact(g, J, bc).config
    eu = g.edges[:, 0].astype(np.int64)
    ev = g.edges[:, 1].astype(np.int64)
    edge_q = J.couplings * sigma[eu] * sigma[ev]
    found, ratio, mask = _kernels.valley_scan(
        g.n_vertices, g.interior.astype(np.int64), g.adj_indptr,
        g.adj_vertex, eu, ev, edge_q, m, 3 * m)
    if not found:
        raise TooLarge("no admissible region (interior too small)")
    slots = [s for s in range(m) if (int(mask) >> s) & 1]
    region = g.interior[slots].astype(np.int64)
    return float(ratio), region


def valley_upper_bound(g: LatticeGraph, env: CoupledEnvironments,
                       bc: BoundaryCondition | None = None,
                       policy: SolverPolicy | None = None,
                       seed: int = 0, stream: str = "valley",
                       ) -> tuple[DropletReport, bool, bool]:
    """Perturbation route to a small-ratio region.

    Solves the ground states of the original and rotation-perturbed
    environments, forms their droplet A, and checks the deterministic bound

        delta(A)/|boundary(A)| <= 2 sqrt(2p - p^2) / (1 - p) * max_e |J'_e|

    which holds whenever both solves are exact.  ``size_ok`` reports whether
    A falls in the central size window (only then does the ratio bound the
    valley statistic).
    """
    if env.spec.kind != "rotation":
        raise WrongKind("the perturbation route needs the rotation kind")
    bc = bc or BoundaryCondition.free()
    policy = policy or SolverPolicy(mode="exact")
    res_a = policy.solve(g, env.original, bc, seed, f"{stream}:orig")
    res_b = policy.solve(g, env.perturbed, bc, seed, f"{stream}:pert")
    sa = canonicalize(g, bc, res_a.config)
    sb = canonicalize(g, bc, res_b.config)
    report = droplet(g, sa, sb, J=env.original, bc=bc)
    p = env.spec.p
    bound = (2.0 * math.sqrt(2.0 * p - p * p) / (1.0 - p)
             * float(np.abs(env.fresh.couplings).max()))
    bound_ok = report.ratio <= bound + DELTA_TOL
    m = len(g.interior)
    inter = int(np.isin(report.region, g.interior).sum())
    size_ok = (m <= 4 * inter) and (4 * inter <= 3 * m)
    return report, bool(bound_ok), bool(size_ok)


def critical_droplet(g: LatticeGraph, J: Disorder, bc: BoundaryCondition | None,
                     edge: int, policy: SolverPolicy | None = None,
                     seed: int = 0, stream: str = "critical",
                     check_ground_state: bool = False) -> CriticalDroplet:
    """Disagreement set of the two constrained minimizers of ``edge``.

    The minimizers are solved with the edge's coupling zeroed (their energies
    H1 and H2 therefore do not depend on J_e); the ground state follows the
    sign of ``J_e - (H1 - H2)/2``.  Under a free boundary condition the
    smaller representative of the disagreement set is reported.

    With ``check_ground_state`` the unconstrained ground state is solved too
    and the threshold consistency asserted (slower; used by verification).
    """
    bc = bc or BoundaryCondition.free()
    policy = policy or SolverPolicy(mode="exact")
    i, j = (int(x) for x in g.edges[edge])
    r1 = policy.solve(g, J, bc, seed, f"{stream}:same",
                      constraint=PairConstraint(i, j, +1), zero_edge=True)
    r2 = policy.solve(g, J, bc, seed, f"{stream}:diff",
                      constraint=PairConstraint(i, j, -1), zero_edge=True)
    s1 = canonicalize(g, bc, r1.config)
    s2 = canonicalize(g, bc, r2.config)
    threshold = (r1.energy - r2.energy) / 2.0
    region = np.flatnonzero(s1 != s2).astype(np.int64)
    if bc.is_free and 2 * len(region) > g.n_vertices:
        mask = np.ones(g.n_vertices, dtype=bool)
        mask[region] = False
        region = np.flatnonzero(mask).astype(np.int64)
    cut = edge_boundary(g, region)
    if check_ground_state:
        ground = solve_exact(g, J, bc)
        je = float(J.couplings[edge])
        want = 1 if je > threshold else -1
        got = int(ground.config[i] * ground.config[j])
        if got != want:
            raise InternalMismatch(
                f"ground state pair product {got}, threshold rule wants {want}")
        expected = min(-je + r1.energy, je + r2.energy)
        if abs(ground.energy - expected) > DELTA_TOL:
            raise InternalMismatch(
                f"ground energy {ground.energy!r} vs threshold form {expected!r}")
    return CriticalDroplet(edge, region, len(region), len(cut),
                           r1.energy, r2.energy, threshold)


# -- boundary dependence ------------------------------------------------------------


def _relevant_boundary(g: LatticeGraph) -> np.ndarray:
    """Boundary vertices with an interior neighbor.

    Boundary spins without one only touch boundary-boundary edges, whose
    energy is constant for each assignment; they cannot change the minimizer
    and are skipped by the enumeration.
    """
    keep = []
    interior_mask = ~g.boundary_mask
    for b in g.boundary:
        nbrs = g.neighbors(int(b))
        if interior_mask[nbrs].any():
            keep.append(int(b))
    return np.asarray(keep, dtype=np.int64)


def boundary_dependence_batch(g: LatticeGraph, J: Disorder, pairs,
                              b_cap: int = 16, interior_cap: int = 16,
                              halve: bool = True) -> np.ndarray:
    """Event flags for several interior pairs in one enumeration pass."""
    if g.topology.kind != "open":
        raise NotOpenCube(f"requires an open cube, got {g.topology}")
    interior = g.interior.astype(np.int64)
    m = len(interior)
    relevant = _relevant_boundary(g)
    if m > interior_cap:
        raise TooLarge(f"{m} interior vertices exceed cap {interior_cap}")
    if len(relevant) > b_cap:
        raise TooLarge(f"{len(relevant)} relevant boundary vertices exceed cap {b_cap}")

    slot_of = np.full(g.n_vertices, -1, dtype=np.int64)
    slot_of[interior] = np.arange(m)

    pairs_a = np.empty(len(pairs), dtype=np.int64)
    pairs_b = np.empty(len(pairs), dtype=np.int64)
    for k, (i, j) in enumerate(pairs):
        if not g.has_edge(i, j):
            raise ValueError(f"pair ({i},{j}) is not an edge")
        if slot_of[i] < 0 or slot_of[j] < 0:
            raise ValueError(f"pair ({i},{j}) must lie in the interior")
        pairs_a[k] = slot_of[i]
        pairs_b[k] = slot_of[j]

    # Interior-interior CSR over slots.
    int_src, int_dst, int_w = [], [], []
    for v in interior:
        sv = slot_of[v]
        for t in range(g.adj_indptr[v], g.adj_indptr[v + 1]):
            u = int(g.adj_vertex[t])
            if slot_of[u] >= 0:
                int_src.append(sv)
                int_dst.append(slot_of[u])
                int_w.append(float(J.couplings[g.adj_edge[t]]))
    int_src = np.asarray(int_src, dtype=np.int64)
    counts = np.bincount(int_src, minlength=m)
    int_indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    order = np.argsort(int_src, kind="stable")
    int_nbr = np.asarray(int_dst, dtype=np.int64)[order]
    int_wa = np.asarray(int_w, dtype=np.float64)[order]

    # Boundary-to-interior CSR over relevant boundary slots.
    b_src, b_islot, b_w = [], [], []
    for bs, b in enumerate(relevant):
        for t in range(g.adj_indptr[b], g.adj_indptr[b + 1]):
            u = int(g.adj_vertex[t])
            if slot_of[u] >= 0:
                b_src.append(bs)
                b_islot.append(slot_of[u])
                b_w.append(float(J.couplings[g.adj_edge[t]]))
    b_src = np.asarray(b_src, dtype=np.int64)
    bcounts = np.bincount(b_src, minlength=len(relevant))
    b_indptr = np.concatenate([[0], np.cumsum(bcounts)]).astype(np.int64)
    border = np.argsort(b_src, kind="stable")
    b_islot = np.asarray(b_islot, dtype=np.int64)[border]
    b_wa = np.asarray(b_w, dtype=np.float64)[border]

    # Perimeter = interior slots that receive a boundary coupling.
    perim_slot = np.full(m, -1, dtype=np.int64)
    for s in sorted(set(int(x) for x in b_islot)):
        perim_slot[s] = 0
    mp = 0
    for s in range(m):
        if perim_slot[s] == 0:
            perim_slot[s] = mp
            mp += 1
        else:
            perim_slot[s] = -1

    events = _kernels.boundary_dependence_events(
        int_indptr, int_nbr, int_wa, perim_slot, mp,
        b_indptr, b_islot, b_wa, pairs_a, pairs_b, halve)
    return events.astype(bool)


def boundary_dependence(g: LatticeGraph, J: Disorder, i: int, j: int,
                        b_cap: int = 16, interior_cap: int = 16,
                        halve: bool = True) -> tuple[bool, float]:
    """Does the product s_i s_j change across boundary conditions?

    Enumerates every boundary assignment (up to the global flip when
    ``halve`` is set, which leaves all pair products unchanged) and solves
    the interior exactly for each.  Returns the event flag and
    ``r = min(d(i, B), d(j, B))``.
    """
    events = boundary_dependence_batch(g, J, [(i, j)], b_cap, interior_cap, halve)
    dists = g.boundary_distances()
    r = min(float(dists[i]), float(dists[j]))
    return bool(events[0]), int(r) if not math.isinf(r) else r


# -- helpers -------------------------------------------------------------------------


def _check_config(g: LatticeGraph, sigma) -> np.ndarray:
    arr = np.ascontiguousarray(sigma, dtype=np.int8)
    if arr.shape != (g.n_vertices,):
        raise DimensionMismatch(
            f"configuration has shape {arr.shape}, graph has {g.n_vertices} vertices")
    if not (np.abs(arr) == 1).all():
        raise ValueError("spins must be +-1")
    return arr


def _check_region(g: LatticeGraph, region) -> np.ndarray:
    region = np.asarray(sorted(int(v) for v in region), dtype=np.int64)
    if region.size:
        if region.min() < 0 or region.max() >= g.n_vertices:
            raise ValueError("region vertex out of range")
        if len(np.unique(region)) != len(region):
            raise ValueError("region contains duplicates")
        if g.boundary_mask[region].any():
            raise RegionTouchesBoundary("region must avoid the boundary set")
    return region
