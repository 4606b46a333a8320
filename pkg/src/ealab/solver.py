"""Ground states of H(s) = -sum_e J_e s_u s_v under boundary conditions.

Solvers:

* :func:`solve_exact` -- exhaustive Gray-code enumeration up to a cap
  (default 24 free spins) or depth-first branch and bound up to 40.
* :func:`solve_anneal` -- simulated annealing with restarts and a final
  zero-temperature quench; heuristic but deterministic given a seed.
* :func:`solve_constrained` -- exact minimization subject to s_i s_j = sign
  for one edge {i, j}, optionally treating that edge's coupling as zero.

Under a free boundary condition the two ground states form a global-flip
pair; results are reported in the gauge where the lowest-indexed interior
vertex carries spin +1 (see :func:`canonicalize`).

Every solve reduces the instance to a quadratic form over genuinely free
spins: fixed boundary spins fold into local fields, a pair constraint merges
one endpoint into the other, and the free-boundary gauge is fixed by pinning
the canonical vertex.  The compiled kernels in :mod:`._kernels` then search
the reduced form.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _kernels, streams
from .disorder import Disorder
from .errors import (
    DimensionMismatch,
    InfeasibleConstraint,
    InvalidRestarts,
    InvalidSchedule,
    TooLarge,
)
from .lattice import LatticeGraph

__all__ = [
    "BoundaryCondition",
    "PairConstraint",
    "SolveResult",
    "SolverPolicy",
    "energy",
    "canonicalize",
    "solve_exact",
    "solve_anneal",
    "solve_constrained",
    "free_spin_count",
]

TIE_TOL = 1e-12

DEFAULT_SCHEDULE = (2.0, 0.05, 2000)
DEFAULT_RESTARTS = 32


@dataclass(frozen=True, eq=False)
class BoundaryCondition:
    """Free, or fixed spins on the boundary set.

    ``values`` aligns with ``g.boundary`` (ascending vertex order).
    """

    kind: str  # "free" | "fixed"
    values: np.ndarray | None = None

    @staticmethod
    def free() -> "BoundaryCondition":
        return BoundaryCondition("free", None)

    @staticmethod
    def fixed(g: LatticeGraph, values) -> "BoundaryCondition":
        if len(g.boundary) == 0:
            raise ValueError("fixed boundary condition needs a nonempty boundary")
        arr = np.ascontiguousarray(values, dtype=np.int8)
        if arr.shape != (len(g.boundary),):
            raise ValueError(f"expected {len(g.boundary)} boundary values")
        if not np.isin(arr, (-1, 1)).all():
            raise ValueError("boundary values must be +-1")
        arr.setflags(write=False)
        return BoundaryCondition("fixed", arr)

    @staticmethod
    def all_plus(g: LatticeGraph) -> "BoundaryCondition":
        return BoundaryCondition.fixed(g, np.ones(len(g.boundary), dtype=np.int8))

    @staticmethod
    def random_once(g: LatticeGraph, seed: int, stream: str = "bc") -> "BoundaryCondition":
        """One random assignment drawn from a stream independent of disorder."""
        return BoundaryCondition.fixed(g, streams.spins(seed, stream, len(g.boundary)))

    @property
    def is_free(self) -> bool:
        return self.kind == "free"


@dataclass(frozen=True)
class PairConstraint:
    """Requires s_i * s_j = sign for the edge {i, j}."""

    i: int
    j: int
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +-1")


@dataclass(frozen=True, eq=False)
class SolveResult:
    config: np.ndarray
    energy: float
    method: str  # "exhaustive" | "branch_bound" | "anneal"
    exact: bool
    tie_detected: bool
    free_spin_count: int


def free_spin_count(g: LatticeGraph, bc: BoundaryCondition) -> int:
    """|V| under a free boundary condition, |V \\ B| under a fixed one."""
    return g.n_vertices if bc.is_free else len(g.interior)


def energy(g: LatticeGraph, J: Disorder, sigma) -> float:
    """-sum_e J_e s_u s_v, summed in edge-index order."""
    sigma = _as_config(g, sigma)
    if len(J) != g.n_edges:
        raise DimensionMismatch(f"{len(J)} couplings for {g.n_edges} edges")
    terms = J.couplings * sigma[g.edges[:, 0]] * sigma[g.edges[:, 1]]
    return float(-terms.sum())


def canonicalize(g: LatticeGraph, bc: BoundaryCondition, sigma) -> np.ndarray:
    """Gauge-fix a configuration.

    Free boundary: return sigma or -sigma, whichever puts +1 on the
    lowest-indexed interior vertex.  Fixed boundary: identity.
    """
    sigma = _as_config(g, sigma)
    if not bc.is_free:
        return sigma
    pivot = int(g.interior[0])
    return sigma if sigma[pivot] > 0 else (-sigma).astype(np.int8)


def _as_config(g: LatticeGraph, sigma) -> np.ndarray:
    arr = np.ascontiguousarray(sigma, dtype=np.int8)
    if arr.shape != (g.n_vertices,):
        raise DimensionMismatch(
            f"configuration has shape {arr.shape}, graph has {g.n_vertices} vertices")
    if not (np.abs(arr) == 1).all():
        raise ValueError("spins must be +-1")
    return arr


# -- reduction to a quadratic form over free spins ------------------------------


class _Reduced:
    """Quadratic form over free spins plus the data to rebuild full configs."""

    __slots__ = ("g", "free", "slot_of", "indptr", "nbr", "w", "h", "const",
                 "root", "sign", "fixed_val", "edge_a", "edge_b", "edge_w")

    def __init__(self, g, free, slot_of, indptr, nbr, w, h, const,
                 root, sign, fixed_val, edge_a, edge_b, edge_w):
        self.g = g
        self.free = free
        self.slot_of = slot_of
        self.indptr = indptr
        self.nbr = nbr
        self.w = w
        self.h = h
        self.const = const
        self.root = root
        self.sign = sign
        self.fixed_val = fixed_val
        self.edge_a = edge_a
        self.edge_b = edge_b
        self.edge_w = edge_w

    @property
    def m(self) -> int:
        return len(self.free)

    def config_from_spins(self, slot_spins: np.ndarray) -> np.ndarray:
        root_val = self.fixed_val.astype(np.int8).copy()
        root_val[self.free] = slot_spins
        return (self.sign * root_val[self.root]).astype(np.int8)

    def config_from_mask(self, mask: int) -> np.ndarray:
        spins = np.ones(self.m, dtype=np.int8)
        for slot in range(self.m):
            if (int(mask) >> slot) & 1:
                spins[slot] = -1
        return self.config_from_spins(spins)

    def bb_order_and_slack(self) -> tuple[np.ndarray, np.ndarray]:
        """BFS spin order over the reduced graph plus per-depth slack bounds."""
        m = self.m
        order = np.empty(m, dtype=np.int64)
        seen = np.zeros(m, dtype=bool)
        k = 0
        for start in range(m):
            if seen[start]:
                continue
            seen[start] = True
            queue = deque([start])
            while queue:
                v = queue.popleft()
                order[k] = v
                k += 1
                for t in range(self.indptr[v], self.indptr[v + 1]):
                    u = int(self.nbr[t])
                    if not seen[u]:
                        seen[u] = True
                        queue.append(u)
        pos = np.empty(m, dtype=np.int64)
        pos[order] = np.arange(m)
        total = float(np.abs(self.edge_w).sum() + np.abs(self.h).sum())
        buckets = np.zeros(m + 1)
        if len(self.edge_w):
            done_at = np.maximum(pos[self.edge_a], pos[self.edge_b]) + 1
            np.add.at(buckets, done_at, np.abs(self.edge_w))
        np.add.at(buckets, pos + 1, np.abs(self.h))
        slack = total - np.cumsum(buckets)
        slack = np.maximum(slack, 0.0)
        return order, slack


def _reduce(g: LatticeGraph, J: Disorder, bc: BoundaryCondition,
            constraint: PairConstraint | None = None, zero_edge: bool = False,
            pin: int | None = None) -> _Reduced:
    n = g.n_vertices
    if len(J) != g.n_edges:
        raise DimensionMismatch(f"{len(J)} couplings for {g.n_edges} edges")
    root = np.arange(n, dtype=np.int64)
    sign = np.ones(n, dtype=np.int8)
    fixed_val = np.zeros(n, dtype=np.int8)  # value of a root, 0 when free

    if not bc.is_free:
        fixed_val[g.boundary] = bc.values

    drop_edge = -1
    if constraint is not None:
        i, j, s = int(constraint.i), int(constraint.j), int(constraint.sign)
        if not g.has_edge(i, j):
            raise ValueError(f"constraint pair ({i},{j}) is not an edge")
        if zero_edge:
            drop_edge = g.edge_index(i, j)
        fi, fj = int(fixed_val[i]), int(fixed_val[j])
        if fi and fj:
            if fi * fj != s:
                raise InfeasibleConstraint(
                    f"boundary fixes s_{i} s_{j} = {fi * fj}, constraint wants {s}")
        elif fi:
            fixed_val[j] = s * fi
        elif fj:
            fixed_val[i] = s * fj
        else:
            root[j] = i
            sign[j] = s

    if pin is not None:
        r = int(root[pin])
        if fixed_val[r] == 0:
            fixed_val[r] = sign[pin]  # makes the pinned vertex's spin +1

    free_mask = fixed_val[root] == 0
    is_root = root == np.arange(n)
    free = np.flatnonzero(free_mask & is_root).astype(np.int64)
    slot_of = np.full(n, -1, dtype=np.int64)
    slot_of[free] = np.arange(len(free))

    eu = g.edges[:, 0].astype(np.int64)
    ev = g.edges[:, 1].astype(np.int64)
    w_e = J.couplings.copy()
    keep = np.ones(g.n_edges, dtype=bool)
    if drop_edge >= 0:
        keep[drop_edge] = False
    eu, ev, w_e = eu[keep], ev[keep], w_e[keep]

    ru, rv = root[eu], root[ev]
    su = sign[eu].astype(np.float64)
    sv = sign[ev].astype(np.float64)
    vu = fixed_val[ru].astype(np.float64)
    vv = fixed_val[rv].astype(np.float64)
    wm = w_e * su * sv

    u_free = vu == 0
    v_free = vv == 0
    both_free = u_free & v_free & (ru != rv)
    self_free = u_free & v_free & (ru == rv)
    u_only = u_free & ~v_free
    v_only = v_free & ~u_free
    both_fixed = ~u_free & ~v_free

    const = float(-(wm[self_free]).sum() - (wm[both_fixed] * vu[both_fixed] * vv[both_fixed]).sum())

    m = len(free)
    h = np.zeros(m)
    if u_only.any():
        np.add.at(h, slot_of[ru[u_only]], wm[u_only] * vv[u_only])
    if v_only.any():
        np.add.at(h, slot_of[rv[v_only]], wm[v_only] * vu[v_only])

    a = slot_of[ru[both_free]]
    b = slot_of[rv[both_free]]
    ww = wm[both_free]
    src = np.concatenate([a, b])
    dst = np.concatenate([b, a])
    val = np.concatenate([ww, ww])
    order = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=m) if m else np.zeros(0, dtype=np.int64)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    nbr = dst[order].astype(np.int64)
    w = val[order].astype(np.float64)
    return _Reduced(g, free, slot_of, indptr, nbr, w, h, const,
                    root, sign, fixed_val, a.astype(np.int64), b.astype(np.int64), ww)


# -- exact solving ----------------------------------------------------------------


def _zero_edge_disorder(g: LatticeGraph, J: Disorder,
                        constraint: PairConstraint) -> Disorder:
    if not g.has_edge(constraint.i, constraint.j):
        raise ValueError(f"constraint pair ({constraint.i},{constraint.j}) is not an edge")
    values = J.couplings.copy()
    values[g.edge_index(constraint.i, constraint.j)] = 0.0
    return Disorder(values, (J.seed_tag[0], f"{J.seed_tag[1]}|zero_edge"))


def _direct_result(g, J, bc, red, method) -> SolveResult:
    config = canonicalize(g, bc, red.config_from_spins(np.ones(0, dtype=np.int8)))
    return SolveResult(config, energy(g, J, config), method, True, False,
                       free_spin_count(g, bc))


def solve_exact(g: LatticeGraph, J: Disorder, bc: BoundaryCondition | None = None, *,
                method: str = "auto", exhaustive_cap: int = 24,
                branch_bound_cap: int = 40,
                constraint: PairConstraint | None = None,
                zero_edge: bool = False) -> SolveResult:
    """Global minimizer by exhaustive enumeration or branch and bound.

    ``method`` is "auto", "exhaustive", or "branch_bound".  Auto picks
    exhaustive enumeration while the free-spin count fits ``exhaustive_cap``
    and branch and bound up to ``branch_bound_cap``; beyond that it raises
    :class:`TooLarge` (use :func:`solve_anneal`).

    ``tie_detected`` reports a second optimum within 1e-12 beyond the
    global-flip pair; the returned configuration is then the
    lexicographically smallest optimum (spin -1 sorting before +1).

    With a ``constraint`` and ``zero_edge`` the constrained edge's coupling
    is treated as zero, in the search and in the reported energy.
    """
    bc = bc or BoundaryCondition.free()
    if constraint is not None and zero_edge:
        J = _zero_edge_disorder(g, J, constraint)
    n_free = free_spin_count(g, bc)
    if method == "auto":
        if n_free <= exhaustive_cap:
            method = "exhaustive"
        elif n_free <= branch_bound_cap:
            method = "branch_bound"
        else:
            raise TooLarge(
                f"{n_free} free spins exceed the exact caps "
                f"({exhaustive_cap} exhaustive, {branch_bound_cap} branch and bound)")
    elif method == "exhaustive":
        if n_free > exhaustive_cap:
            raise TooLarge(f"{n_free} free spins exceed exhaustive cap {exhaustive_cap}")
    elif method == "branch_bound":
        if n_free > branch_bound_cap:
            raise TooLarge(f"{n_free} free spins exceed branch-and-bound cap {branch_bound_cap}")
    else:
        raise ValueError(f"unknown method {method!r}")

    pin = int(g.interior[0]) if bc.is_free else None
    red = _reduce(g, J, bc, constraint, zero_edge, pin)
    if red.m == 0:
        return _direct_result(g, J, bc, red, method)
    if red.m > 62:
        raise TooLarge(f"{red.m} reduced spins exceed the 62-bit mask limit")

    if method == "exhaustive":
        emin, mask0, approx = _kernels.gray_min(red.indptr, red.nbr, red.w, red.h,
                                                TIE_TOL)
        if approx <= 1:
            candidates = [int(mask0)]
            tie = False
        else:
            # The near-tie count can overshoot; settle it with an exact pass.
            count, lexmask = _kernels.gray_collect(
                red.indptr, red.nbr, red.w, red.h, emin, TIE_TOL)
            candidates = [int(lexmask), int(mask0)]
            tie = count > 1
    else:
        order, slack = red.bb_order_and_slack()
        best, cand_e, cand_m, n_cand, overflow = _kernels.branch_bound(
            red.indptr, red.nbr, red.w, red.h, order, slack, TIE_TOL)
        candidates = [int(cand_m[k]) for k in range(n_cand)
                      if cand_e[k] <= best + TIE_TOL]
        tie = len(candidates) > 1 or bool(overflow)

    configs = [red.config_from_mask(mk) for mk in candidates]
    config = min(configs, key=lambda c: tuple(c.tolist()))
    config = canonicalize(g, bc, config)
    return SolveResult(config, energy(g, J, config), method, True, tie, n_free)


def solve_constrained(g: LatticeGraph, J: Disorder, bc: BoundaryCondition | None,
                      constraint: PairConstraint, zero_edge: bool = False, *,
                      method: str = "auto", exhaustive_cap: int = 24,
                      branch_bound_cap: int = 40) -> SolveResult:
    """Exact minimum subject to ``s_i s_j = sign`` on an edge.

    With ``zero_edge`` the constrained edge's coupling is treated as zero;
    the minimizer is unaffected because that term is constant under the
    constraint, only the reported energy shifts.
    """
    return solve_exact(g, J, bc, method=method, exhaustive_cap=exhaustive_cap,
                       branch_bound_cap=branch_bound_cap,
                       constraint=constraint, zero_edge=zero_edge)


# -- annealing --------------------------------------------------------------------


def solve_anneal(g: LatticeGraph, J: Disorder, bc: BoundaryCondition | None = None,
                 schedule: tuple[float, float, int] = DEFAULT_SCHEDULE,
                 restarts: int = DEFAULT_RESTARTS, seed: int = 0, *,
                 stream: str = "anneal",
                 constraint: PairConstraint | None = None,
                 zero_edge: bool = False) -> SolveResult:
    """Simulated annealing with restarts and a zero-temperature quench.

    The temperature falls geometrically from ``T_init`` to ``T_final`` over
    the given number of sweeps; each restart draws its own initial state and
    acceptance stream from ``(seed, stream, restart index)``, so the result
    does not depend on evaluation order.  Restarts reduce by lowest energy,
    ties by lexicographically smaller configuration.
    """
    bc = bc or BoundaryCondition.free()
    if constraint is not None and zero_edge:
        J = _zero_edge_disorder(g, J, constraint)
    t_init, t_final, sweeps = schedule
    if restarts < 1:
        raise InvalidRestarts(f"need restarts >= 1, got {restarts}")
    if not (t_init > t_final > 0.0) or sweeps < 1:
        raise InvalidSchedule(f"bad schedule {schedule!r}")

    red = _reduce(g, J, bc, constraint, zero_edge, pin=None)
    if red.m == 0:
        result = _direct_result(g, J, bc, red, "anneal")
        return SolveResult(result.config, result.energy, "anneal", False, False,
                           result.free_spin_count)

    temps = t_init * (t_final / t_init) ** (np.arange(sweeps) / max(sweeps - 1, 1))
    best_key = None
    best = None
    for r in range(restarts):
        sig = streams.spins(seed, f"{stream}:init:{r}", red.m).copy()
        u = streams.uniforms(seed, f"{stream}:accept:{r}", sweeps * red.m)
        _kernels.anneal_quench(red.indptr, red.nbr, red.w, red.h, temps, u, sig)
        config = canonicalize(g, bc, red.config_from_spins(sig))
        e = energy(g, J, config)
        key = (e, tuple(config.tolist()))
        if best_key is None or key < best_key:
            best_key = key
            best = (config, e)
    config, e = best
    return SolveResult(config, e, "anneal", False, False, free_spin_count(g, bc))


# -- policy -----------------------------------------------------------------------


@dataclass(frozen=True)
class SolverPolicy:
    """How experiment runners obtain ground states.

    ``mode``:
      * "auto"   -- exhaustive enumeration when the instance fits the cap,
                    otherwise annealing (branch and bound is left to explicit
                    requests; its worst case is unpredictable on frustrated
                    instances),
      * "exact"  -- solve_exact with both caps, error when too large,
      * "anneal" -- always anneal.
    """

    mode: str = "auto"
    exhaustive_cap: int = 24
    branch_bound_cap: int = 40
    schedule: tuple[float, float, int] = DEFAULT_SCHEDULE
    restarts: int = DEFAULT_RESTARTS

    def solve(self, g: LatticeGraph, J: Disorder, bc: BoundaryCondition,
              seed: int = 0, stream: str = "solve",
              constraint: PairConstraint | None = None,
              zero_edge: bool = False) -> SolveResult:
        n_free = free_spin_count(g, bc)
        if self.mode == "exact" or (self.mode == "auto" and n_free <= self.exhaustive_cap):
            return solve_exact(g, J, bc, exhaustive_cap=self.exhaustive_cap,
                               branch_bound_cap=self.branch_bound_cap,
                               constraint=constraint, zero_edge=zero_edge)
        if self.mode in ("auto", "anneal"):
            return solve_anneal(g, J, bc, self.schedule, self.restarts, seed,
                                stream=stream, constraint=constraint,
                                zero_edge=zero_edge)
        raise ValueError(f"unknown solver mode {self.mode!r}")
