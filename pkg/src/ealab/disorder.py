"""Gaussian edge disorder and its two coupled perturbations.

A disorder assigns one standard normal coupling to every edge, sampled from
a named random stream so replicates are reproducible (see :mod:`.streams`).
Two perturbations, both driven by a parameter ``p`` in (0, 1), couple an
original environment ``J`` with a fresh independent copy ``J'``:

* ``rotation``: every coupling becomes ``(1-p) J_e + sqrt(2p - p^2) J_e'``,
  a rotation in Gaussian space that preserves the standard normal marginal
  and leaves correlation ``1 - p`` with the original.
* ``resample``: each coupling is independently replaced by ``J_e'`` with
  probability ``p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import streams
from .errors import LengthMismatch
from .lattice import LatticeGraph

__all__ = [
    "Disorder",
    "PerturbationSpec",
    "CoupledEnvironments",
    "sample_disorder",
    "perturb",
    "couple",
    "marginal_check",
    "write_disorder_csv",
    "read_disorder_csv",
]

KINDS = ("rotation", "resample")


@dataclass(frozen=True, eq=False)
class Disorder:
    """One real coupling per edge index, with stream provenance."""

    couplings: np.ndarray
    seed_tag: tuple[int, str] = (0, "unseeded")

    def __post_init__(self):
        arr = np.ascontiguousarray(self.couplings, dtype=np.float64)
        if not np.isfinite(arr).all():
            raise ValueError("couplings must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "couplings", arr)

    def __len__(self) -> int:
        return len(self.couplings)


@dataclass(frozen=True)
class PerturbationSpec:
    """Perturbation kind plus strength ``p`` in the open interval (0, 1)."""

    kind: str
    p: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not (0.0 < self.p < 1.0):
            raise ValueError(f"p must lie strictly inside (0, 1), got {self.p}")

    @property
    def t(self) -> float:
        """Equivalent time parameter ``-ln(1 - p)``."""
        return -math.log1p(-self.p)

    @property
    def rotation_coefficients(self) -> tuple[float, float]:
        """Weights of (original, fresh); their squares sum to one."""
        return 1.0 - self.p, math.sqrt(2.0 * self.p - self.p * self.p)


@dataclass(frozen=True, eq=False)
class CoupledEnvironments:
    """Original, fresh, and perturbed disorders tied by one perturbation."""

    original: Disorder
    fresh: Disorder
    perturbed: Disorder
    spec: PerturbationSpec
    resample_mask: np.ndarray | None = None


def sample_disorder(g: LatticeGraph, seed: int, stream: str = "J") -> Disorder:
    """i.i.d. standard Gaussian couplings, one per edge of ``g``.

    Identical ``(g, seed, stream)`` give bit-identical arrays.
    """
    values = streams.gaussians(seed, stream, g.n_edges)
    return Disorder(values, (int(seed), stream))


def perturb(J: Disorder, J_fresh: Disorder, spec: PerturbationSpec,
            mask_seed: int = 0, mask_stream: str = "mask") -> CoupledEnvironments:
    """Couple ``J`` with a perturbed environment built from ``J_fresh``."""
    if len(J) != len(J_fresh):
        raise LengthMismatch(f"{len(J)} vs {len(J_fresh)} couplings")
    tag = (J.seed_tag[0], f"{J.seed_tag[1]}|{spec.kind}(p={spec.p:.17g})")
    if spec.kind == "rotation":
        a, b = spec.rotation_coefficients
        mixed = a * J.couplings + b * J_fresh.couplings
        return CoupledEnvironments(J, J_fresh, Disorder(mixed, tag), spec, None)
    mask = streams.bernoulli(mask_seed, mask_stream, len(J), spec.p)
    mask.setflags(write=False)
    mixed = np.where(mask, J_fresh.couplings, J.couplings)
    return CoupledEnvironments(J, J_fresh, Disorder(mixed, tag), spec, mask)


def couple(g: LatticeGraph, seed: int, spec: PerturbationSpec,
           label: str = "") -> CoupledEnvironments:
    """Sample (J, J') from dedicated streams and apply ``spec``.

    The streams for the original couplings, the fresh couplings, and the
    resample mask are distinct labels under the same seed, so environments
    regenerate bit-exactly and independently of evaluation order.
    """
    J = sample_disorder(g, seed, f"{label}J")
    J_fresh = sample_disorder(g, seed, f"{label}J'")
    return perturb(J, J_fresh, spec, mask_seed=seed, mask_stream=f"{label}mask")


@dataclass(frozen=True)
class MomentReport:
    """Pooled marginal moments of a perturbed environment."""

    mean: float
    variance: float
    correlation: float
    n: int


def marginal_check(envs, n: int | None = None) -> MomentReport:
    """Pool edges over one or many coupled environments.

    Reports the mean and variance of the perturbed couplings and their
    correlation with the originals, over the first ``n`` pooled samples
    (all of them by default).  For the rotation kind the population
    correlation is ``1 - p``; the resample kind matches it in expectation
    (couplings are kept with probability ``1 - p``).
    """
    if isinstance(envs, CoupledEnvironments):
        envs = [envs]
    x = np.concatenate([e.original.couplings for e in envs])
    y = np.concatenate([e.perturbed.couplings for e in envs])
    if n is not None:
        x, y = x[:n], y[:n]
    corr = float(np.corrcoef(x, y)[0, 1])
    return MomentReport(float(y.mean()), float(y.var(ddof=1)), corr, len(y))


def write_disorder_csv(g: LatticeGraph, J: Disorder, path) -> None:
    """Rows ``edge_index,u,v,J`` with 17 significant digits."""
    if len(J) != g.n_edges:
        raise LengthMismatch(f"{len(J)} couplings for {g.n_edges} edges")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("edge_index,u,v,J\n")
        for k in range(g.n_edges):
            u, v = g.edges[k]
            fh.write(f"{k},{u},{v},{J.couplings[k]:.17g}\n")


def read_disorder_csv(path, g: LatticeGraph | None = None) -> Disorder:
    """Read couplings written by :func:`write_disorder_csv`.

    When ``g`` is supplied the edge list is checked against the graph.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "edge_index,u,v,J":
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            k, u, v, val = line.split(",")
            rows.append((int(k), int(u), int(v), float(val)))
    rows.sort()
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ValueError(f"{path}: edge indices are not 0..m-1")
    if g is not None:
        if len(rows) != g.n_edges:
            raise LengthMismatch(f"{len(rows)} rows for {g.n_edges} edges")
        for k, u, v, _ in rows:
            gu, gv = g.edges[k]
            if (u, v) != (int(gu), int(gv)):
                raise ValueError(f"{path}: edge {k} is ({u},{v}), graph has ({gu},{gv})")
    values = np.asarray([r[3] for r in rows])
    return Disorder(values, (0, f"csv:{path}"))
