"""Tour of the ground-state solvers on small spin-glass instances.

Solves the same disordered instances by exhaustive Gray-code enumeration,
branch and bound, and simulated annealing, and shows what frustration does
to the energy compared to the unfrustrated tree bound.
"""

import numpy as np

import ealab as ea

SEED = 7


def tree_vs_torus():
    print("== trees are unfrustrated, tori are not ==")
    rng = np.random.default_rng(SEED)
    tree = ea.build_explicit(10, [(int(rng.integers(0, v)), v) for v in range(1, 10)])
    J = ea.sample_disorder(tree, SEED)
    res = ea.solve_exact(tree, J)
    print(f"tree       energy {res.energy:+.4f}   sum|J| {-np.abs(J.couplings).sum():+.4f}")

    torus = ea.build_cube(ea.Topology.torus(2, 4))
    Jt = ea.sample_disorder(torus, SEED)
    rest = ea.solve_exact(torus, Jt)
    gap = rest.energy + np.abs(Jt.couplings).sum()
    print(f"4x4 torus  energy {rest.energy:+.4f}   frustration cost {gap:+.4f}")
    assert gap > 0.0


def three_solvers_agree():
    print("\n== three solvers, one optimum ==")
    g = ea.build_cube(ea.Topology.open_cube(2, 4))
    bc = ea.BoundaryCondition.all_plus(g)
    J = ea.sample_disorder(g, SEED + 1)
    exhaustive = ea.solve_exact(g, J, bc, method="exhaustive")
    branch = ea.solve_exact(g, J, bc, method="branch_bound")
    anneal = ea.solve_anneal(g, J, bc, seed=SEED)
    for res in (exhaustive, branch, anneal):
        print(f"{res.method:>12}: energy {res.energy:+.8f} exact={res.exact}")
    assert abs(exhaustive.energy - branch.energy) < 1e-12
    assert abs(exhaustive.energy - anneal.energy) < 1e-9


def boundary_conditions_matter():
    print("\n== the boundary condition reshapes the optimum ==")
    g = ea.build_cube(ea.Topology.open_cube(2, 3))
    J = ea.sample_disorder(g, SEED + 2)
    free = ea.solve_exact(g, J, ea.BoundaryCondition.free())
    plus = ea.solve_exact(g, J, ea.BoundaryCondition.all_plus(g))
    print(f"free bc    energy {free.energy:+.4f} over {free.free_spin_count} spins")
    print(f"plus bc    energy {plus.energy:+.4f} over {plus.free_spin_count} spins")
    assert plus.energy >= free.energy - 1e-12  # constraints only cost energy


def run():
    tree_vs_torus()
    three_solvers_agree()
    boundary_conditions_matter()
    print("\nall checks passed")


if __name__ == "__main__":
    run()
