"""Critical droplets: how much of the system one bond controls.

For an edge e = {i, j}, solve the two minimizers constrained to agree and
to disagree across e (with J_e zeroed).  Their disagreement set is the
critical droplet of e: the region that flips when J_e crosses the threshold
(H1 - H2) / 2.  On tori the droplets are large and their boundaries obey
the discrete isoperimetric inequality.
"""

import numpy as np

import ealab as ea
from ealab.experiments import ExperimentConfig

SEED = 31


def anatomy_of_one_droplet():
    print("== one droplet in detail (4x4 torus) ==")
    g = ea.build_cube(ea.Topology.torus(2, 4))
    J = ea.sample_disorder(g, SEED)
    edge = 5
    cd = ea.critical_droplet(g, J, None, edge, check_ground_state=True)
    i, j = g.edges[edge]
    print(f"  edge {edge} = ({i},{j}), J_e = {J.couplings[edge]:+.4f}")
    print(f"  constrained minima H1 = {cd.H1:+.4f}, H2 = {cd.H2:+.4f}")
    print(f"  threshold (H1-H2)/2 = {cd.threshold:+.4f}")
    side = "aligned" if J.couplings[edge] > cd.threshold else "opposed"
    print(f"  ground state has the pair {side}")
    print(f"  droplet: {cd.size} sites, boundary {cd.boundary_size} edges")


def droplets_grow_with_size():
    print("\n== droplets grow with the torus ==")
    cfg = ExperimentConfig(experiment="critical", bc="periodic", d=2,
                           L=(4, 6), solver="anneal", replicates=150,
                           seed=SEED, threads=4)
    result = ea.run_critical(cfg)
    for L in (4, 6):
        est = result.extras["mean_size"][L]
        print(f"  L={L}: mean droplet size {est.mean:.2f} +- {est.stderr:.2f}")
    print(f"  isoperimetry violations: {result.extras['iso_violations']}")
    assert result.extras["iso_violations"] == 0


def isoperimetry_profile():
    print("\n== every droplet sits above the isoperimetric curve ==")
    g = ea.build_cube(ea.Topology.torus(2, 5))
    rows = []
    for k in range(40):
        J = ea.sample_disorder(g, SEED + k, "iso")
        cd = ea.critical_droplet(g, J, None, k % g.n_edges)
        if cd.size:
            rows.append((cd.size, cd.boundary_size, 2 * np.sqrt(cd.size)))
    for size, boundary, floor in rows[:6]:
        print(f"  |D| = {size:2d}  |boundary| = {boundary:2d}  >=  {floor:.2f}")
    assert all(b >= f - 1e-9 for _, b, f in rows)


def run():
    anatomy_of_one_droplet()
    droplets_grow_with_size()
    isoperimetry_profile()
    print("\nall checks passed")


if __name__ == "__main__":
    run()
