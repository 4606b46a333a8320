"""Command-line front end.

Subcommands::

    gen       write an instance (graph file plus coupling CSV)
    solve     solve one instance and print the result
    inspect   print a summary of a graph or instance
    chaos | paircorr | fractal | valleys | tail | critical | decay
              run an experiment, write records and an aggregate table
    verify    run the built-in invariant suite

Exit codes: 0 success, 1 usage error, 2 runtime error.  Outputs are written
atomically.  Seeds default to 0 and are always printed, never drawn from
entropy.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .disorder import sample_disorder, write_disorder_csv
from .errors import EaLabError, ParseError
from .experiments import ExperimentConfig, load_config, run_experiment
from .lattice import Topology, build_cube, load_graph, save_graph
from .records import write_records, write_table
from .solver import BoundaryCondition, solve_anneal, solve_exact
from .verify import run_verification

_EXPERIMENT_NAMES = {
    "chaos": "chaos",
    "paircorr": "pair_correlation",
    "fractal": "fractal",
    "valleys": "valleys",
    "tail": "fixed_region_tail",
    "critical": "critical",
    "decay": "decay",
}

_BC_NAMES = {
    "free": "free",
    "fixed-plus": "fixed_all_plus",
    "fixed-random": "fixed_random_once",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_instance_flags(p):
    p.add_argument("--d", type=int, default=None, help="dimension")
    p.add_argument("--L", type=str, default=None, help="side length(s), comma separated")
    p.add_argument("--topology", choices=("open", "free", "torus"), default=None)
    p.add_argument("--bc", choices=tuple(_BC_NAMES), default=None)
    p.add_argument("--seed", type=int, default=None)


def _add_experiment_flags(p):
    _add_instance_flags(p)
    p.add_argument("--config", type=str, default=None, help="JSON config file")
    p.add_argument("--kind", choices=("rotate", "resample"), default=None)
    p.add_argument("--p", type=str, default=None, help="perturbation levels, comma separated")
    p.add_argument("--K", type=float, default=None, help="sets p = K/L per size")
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--exact-cap", type=int, default=None, dest="exact_cap")
    p.add_argument("--anneal", type=str, default=None,
                   help="Tinit,Tfinal,sweeps,restarts")
    p.add_argument("--solver", choices=("auto", "exact", "anneal"), default=None)
    p.add_argument("--timing", action="store_true", default=None,
                   help="record measured wall times (breaks byte-identical reruns)")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--format", choices=("csv", "jsonl"), default=None)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ea-lab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write an instance to disk")
    _add_instance_flags(p)
    p.add_argument("--out", type=str, required=True, help="output path prefix")

    p = sub.add_parser("solve", help="solve one instance")
    _add_instance_flags(p)
    p.add_argument("--graph", type=str, default=None, help="explicit graph file")
    p.add_argument("--solver", choices=("auto", "exact", "anneal"), default="auto")
    p.add_argument("--exact-cap", type=int, default=24, dest="exact_cap")
    p.add_argument("--anneal", type=str, default=None)

    p = sub.add_parser("inspect", help="summarize a graph or instance")
    _add_instance_flags(p)
    p.add_argument("--graph", type=str, default=None, help="explicit graph file")

    for name in _EXPERIMENT_NAMES:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        _add_experiment_flags(p)

    p = sub.add_parser("verify", help="run the built-in invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0,
                   help="shrink batch sizes for a quick smoke run")
    return parser


def _parse_list(text, conv):
    return tuple(conv(tok) for tok in text.split(",") if tok)


def _topology_args(args, parser):
    d = args.d if args.d is not None else 2
    L_list = _parse_list(args.L, int) if args.L else (4,)
    bc_name = args.bc or ("free" if args.topology in ("free", "torus") else "fixed-plus")
    topo = args.topology or ("open" if bc_name.startswith("fixed") else "free")
    if bc_name.startswith("fixed") and topo != "open":
        parser.error(f"bc {bc_name} needs --topology open")
    return d, L_list, topo, bc_name


def _make_graph(args, parser):
    if getattr(args, "graph", None):
        return load_graph(args.graph), "free"
    d, L_list, topo, bc_name = _topology_args(args, parser)
    if len(L_list) != 1:
        parser.error("this command takes a single --L")
    return build_cube(Topology(topo, d, L_list[0])), bc_name


def _make_bc(g, bc_name, seed):
    if bc_name == "free":
        return BoundaryCondition.free()
    if bc_name == "fixed-plus":
        return BoundaryCondition.all_plus(g)
    return BoundaryCondition.random_once(g, seed)


def _config_overrides(args) -> dict:
    over = {
        "d": args.d,
        "L": _parse_list(args.L, int) if args.L else None,
        "topology": args.topology,
        "bc": _BC_NAMES[args.bc] if args.bc else None,
        "kind": {"rotate": "rotation", "resample": "resample"}.get(args.kind),
        "p": _parse_list(args.p, float) if args.p else None,
        "K": args.K,
        "replicates": args.replicates,
        "seed": args.seed,
        "threads": args.threads,
        "exact_cap": args.exact_cap,
        "anneal": _parse_list(args.anneal, float) if args.anneal else None,
        "solver": args.solver,
        "timing": args.timing,
        "out": args.out,
        "format": args.format,
    }
    return over


def _spin_string(config) -> str:
    return "".join("+" if s > 0 else "-" for s in config)


def _cmd_gen(args, parser) -> int:
    seed = args.seed if args.seed is not None else 0
    g, _ = _make_graph(args, parser)
    J = sample_disorder(g, seed)
    save_graph(g, args.out + ".graph")
    write_disorder_csv(g, J, args.out + ".csv")
    print(f"seed={seed} vertices={g.n_vertices} edges={g.n_edges} "
          f"boundary={len(g.boundary)}")
    print(f"wrote {args.out}.graph and {args.out}.csv")
    return 0


def _cmd_solve(args, parser) -> int:
    seed = args.seed if args.seed is not None else 0
    g, bc_name = _make_graph(args, parser)
    if args.bc:
        bc_name = args.bc
    bc = _make_bc(g, bc_name, seed)
    J = sample_disorder(g, seed)
    if args.solver == "anneal":
        schedule, restarts = (2.0, 0.05, 2000), 32
        if args.anneal:
            vals = _parse_list(args.anneal, float)
            schedule, restarts = tuple(vals[:3]), int(vals[3]) if len(vals) > 3 else 32
            schedule = (schedule[0], schedule[1], int(schedule[2]))
        res = solve_anneal(g, J, bc, schedule, restarts, seed)
    else:
        res = solve_exact(g, J, bc, exhaustive_cap=args.exact_cap)
    print(f"seed={seed} bc={bc_name}")
    print(f"energy={res.energy:.12f} method={res.method} "
          f"exact={str(res.exact).lower()} free_spins={res.free_spin_count} "
          f"tie={str(res.tie_detected).lower()}")
    print(f"config={_spin_string(res.config)}")
    return 0


def _cmd_inspect(args, parser) -> int:
    seed = args.seed if args.seed is not None else 0
    g, bc_name = _make_graph(args, parser)
    J = sample_disorder(g, seed)
    dists = g.boundary_distances()
    finite = dists[np.isfinite(dists)]
    print(f"topology={g.topology} vertices={g.n_vertices} edges={g.n_edges}")
    print(f"boundary={len(g.boundary)} interior={len(g.interior)} "
          f"max_degree={g.max_degree}")
    if finite.size:
        print(f"max_boundary_distance={int(finite.max())}")
    print(f"seed={seed} coupling_mean={J.couplings.mean():+.6f} "
          f"coupling_var={J.couplings.var(ddof=1):.6f}")
    return 0


def _cmd_experiment(args, parser, name) -> int:
    over = _config_overrides(args)
    over["experiment"] = _EXPERIMENT_NAMES[name]
    if args.threads is None and "EA_LAB_THREADS" in os.environ:
        over["threads"] = int(os.environ["EA_LAB_THREADS"])
    if args.config:
        cfg = load_config(args.config, over)
    else:
        cfg = load_config({k: v for k, v in over.items() if v is not None})
    print(f"experiment={cfg.experiment} seed={cfg.seed} replicates={cfg.replicates} "
          f"threads={cfg.threads}")
    result = run_experiment(cfg)
    if cfg.out:
        write_records(result.records, cfg.out, cfg.format)
        agg_path = os.path.splitext(cfg.out)[0] + ".agg.csv"
        write_table(result.aggregates, agg_path)
        print(f"wrote {len(result.records)} records to {cfg.out}")
        print(f"wrote {len(result.aggregates)} aggregate rows to {agg_path}")
    else:
        for row in result.aggregates:
            point = f" {row['point']}" if row.get("point") else ""
            print(f"L={row['L']} p={row['p']} {row['series']}{point}: "
                  f"mean={row['mean']:.6g} stderr={row['stderr']:.3g} n={row['n']}")
    return 0


def _cmd_verify(args) -> int:
    results = run_verification(args.seed, args.scale)
    worst = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name}: {res.total - res.failures}/{res.total}")
        if not res.passed:
            worst = 2
    print("verify: all checks passed" if worst == 0 else "verify: FAILURES")
    return worst


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return _cmd_gen(args, parser)
        if args.command == "solve":
            return _cmd_solve(args, parser)
        if args.command == "inspect":
            return _cmd_inspect(args, parser)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_experiment(args, parser, args.command)
    except ParseError as exc:
        print(f"ea-lab: error: {exc}", file=sys.stderr)
        return 1
    except EaLabError as exc:
        print(f"ea-lab: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ea-lab: io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
