"""Zero-temperature Edwards-Anderson spin-glass laboratory.

Ground states of Ising spin glasses on finite graphs with Gaussian couplings:
exact and heuristic solvers, coupled disorder perturbations, droplet and
interface observables, and a reproducible Monte Carlo experiment harness.
"""

from .disorder import (
    CoupledEnvironments,
    Disorder,
    PerturbationSpec,
    couple,
    marginal_check,
    perturb,
    read_disorder_csv,
    sample_disorder,
    write_disorder_csv,
)
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    load_config,
    run_chaos,
    run_critical,
    run_decay,
    run_experiment,
    run_fixed_region_tail,
    run_fractal,
    run_pair_correlation,
    run_valleys,
)
from .lattice import (
    LatticeGraph,
    Topology,
    build_cube,
    build_explicit,
    distance_to_boundary,
    edge_boundary,
    graph_distance,
    load_graph,
    save_graph,
)
from .observables import (
    CriticalDroplet,
    DropletReport,
    OverlapSample,
    boundary_dependence,
    boundary_dependence_batch,
    critical_droplet,
    droplet,
    flip_region,
    interface_energy,
    site_overlap,
    valley_statistic_exact,
    valley_upper_bound,
)
from .records import (
    Estimate,
    Record,
    aggregate,
    mean_estimate,
    proportion_estimate,
    read_records,
    write_records,
    write_table,
)
from .solver import (
    BoundaryCondition,
    PairConstraint,
    SolveResult,
    SolverPolicy,
    canonicalize,
    energy,
    solve_anneal,
    solve_constrained,
    solve_exact,
)
from .verify import CheckResult, run_verification

__version__ = "0.1.0"
