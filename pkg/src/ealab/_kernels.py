"""Compiled inner loops: Gray-code enumeration, branch and bound, annealing.

All kernels operate on a reduced quadratic form over ``m`` free spins

    H(s) = -1/2 * sum_v s_v * sum_{t in adj(v)} w_t s_{nbr_t}  -  sum_v h_v s_v

given as CSR adjacency (``indptr``, ``nbr``, ``w``; every undirected edge
appears twice) plus a field vector ``h``.  Configurations are encoded as bit
masks: bit ``v`` set means ``s_v = -1``.

Enumeration walks configurations in binary-reflected Gray-code order so each
step flips a single spin and updates the energy in O(degree).
"""

from __future__ import annotations

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _ctz(k):
    """Index of the lowest set bit; k must be positive."""
    c = 0
    while not (k & 1):
        k >>= 1
        c += 1
    return c


@njit(**_JIT)
def _mask_seq_less(a, b):
    """Compare bit sets as ascending index sequences, lexicographically."""
    while True:
        if a == 0:
            return True
        if b == 0:
            return False
        la = a & (-a)
        lb = b & (-b)
        if la != lb:
            return la < lb
        a ^= la
        b ^= lb


@njit(**_JIT)
def _mask_lex_less(a, b, m):
    """True when mask ``a`` encodes the lexicographically smaller spin vector.

    Spin vectors compare elementwise with -1 < +1; a set bit means -1.
    """
    for v in range(m):
        ba = (a >> v) & 1
        bb = (b >> v) & 1
        if ba != bb:
            return ba == 1
    return False


@njit(**_JIT)
def gray_min(indptr, nbr, w, h, tol):
    """Scan all 2^m configurations; return (min energy, its mask, near-min count).

    The count is an upper bound on the number of configurations within
    ``tol`` of the final minimum (it may overcount transient near-ties), so
    ``count == 1`` certifies a unique optimum.
    """
    m = h.shape[0]
    sig = np.ones(m, dtype=np.int8)
    e = 0.0
    for v in range(m):
        acc = 0.0
        for t in range(indptr[v], indptr[v + 1]):
            acc += w[t]
        e -= 0.5 * acc + h[v]
    best = e
    best_mask = np.int64(0)
    count = 1
    mask = np.int64(0)
    total = np.int64(1) << m
    for k in range(1, total):
        v = _ctz(k)
        f = h[v]
        for t in range(indptr[v], indptr[v + 1]):
            f += w[t] * sig[nbr[t]]
        e += 2.0 * sig[v] * f
        sig[v] = -sig[v]
        mask ^= np.int64(1) << v
        if e < best - tol:
            best = e
            best_mask = mask
            count = 1
        elif e <= best + tol:
            count += 1
            if e < best:
                best = e
                best_mask = mask
    return best, best_mask, count


@njit(**_JIT)
def gray_collect(indptr, nbr, w, h, emin, tol):
    """Second pass: exact count of optima within tol of ``emin`` and the
    lexicographically smallest one."""
    m = h.shape[0]
    sig = np.ones(m, dtype=np.int8)
    e = 0.0
    for v in range(m):
        acc = 0.0
        for t in range(indptr[v], indptr[v + 1]):
            acc += w[t]
        e -= 0.5 * acc + h[v]
    count = 0
    lex_mask = np.int64(0)
    if abs(e - emin) <= tol:
        count = 1
    mask = np.int64(0)
    total = np.int64(1) << m
    for k in range(1, total):
        v = _ctz(k)
        f = h[v]
        for t in range(indptr[v], indptr[v + 1]):
            f += w[t] * sig[nbr[t]]
        e += 2.0 * sig[v] * f
        sig[v] = -sig[v]
        mask ^= np.int64(1) << v
        if abs(e - emin) <= tol:
            if count == 0:
                lex_mask = mask
            elif _mask_lex_less(mask, lex_mask, m):
                lex_mask = mask
            count += 1
    return count, lex_mask


@njit(**_JIT)
def branch_bound(indptr, nbr, w, h, order, slack, tol):
    """Depth-first branch and bound over spins in ``order``.

    ``slack[d]`` bounds how much the energy can still decrease once the
    first ``d`` spins of ``order`` are assigned (sum of |w| over edges that
    are not yet fully assigned plus |h| over unassigned spins).  Nodes whose
    partial energy minus remaining slack exceeds best + tol are pruned, so
    every optimum within ``tol`` of the minimum survives into the candidate
    buffer (up to its capacity of 64; ``overflow`` reports saturation).

    Returns (best energy, candidate energies, candidate masks, count, overflow).
    """
    m = order.shape[0]
    pos = np.empty(m, dtype=np.int64)
    for d in range(m):
        pos[order[d]] = d
    sig = np.zeros(m, dtype=np.int8)
    f_at = np.zeros(m)
    s_first = np.zeros(m, dtype=np.int8)
    state = np.zeros(m, dtype=np.int8)
    e_at = np.zeros(m)
    cand_e = np.zeros(64)
    cand_m = np.zeros(64, dtype=np.int64)
    n_cand = 0
    overflow = False
    best = np.inf
    d = 0
    state[0] = 0
    while d >= 0:
        if state[d] == 0:
            v = order[d]
            f = h[v]
            for t in range(indptr[v], indptr[v + 1]):
                u = nbr[t]
                if pos[u] < d:
                    f += w[t] * sig[u]
            f_at[d] = f
            s_first[d] = 1 if f >= 0.0 else -1
            s = s_first[d]
            state[d] = 1
        elif state[d] == 1:
            s = -s_first[d]
            state[d] = 2
        else:
            d -= 1
            continue
        e_parent = e_at[d - 1] if d > 0 else 0.0
        e_child = e_parent - s * f_at[d]
        if e_child - slack[d + 1] > best + tol:
            continue
        sig[order[d]] = s
        e_at[d] = e_child
        if d == m - 1:
            if e_child < best - tol:
                best = e_child
                kept = 0
                for c in range(n_cand):
                    if cand_e[c] <= best + tol:
                        cand_e[kept] = cand_e[c]
                        cand_m[kept] = cand_m[c]
                        kept += 1
                n_cand = kept
            elif e_child < best:
                best = e_child
            if e_child <= best + tol:
                if n_cand < 64:
                    mask = np.int64(0)
                    for q in range(m):
                        if sig[q] < 0:
                            mask |= np.int64(1) << q
                    cand_e[n_cand] = e_child
                    cand_m[n_cand] = mask
                    n_cand += 1
                else:
                    overflow = True
        else:
            d += 1
            state[d] = 0
    return best, cand_e, cand_m, n_cand, overflow


@njit(**_JIT)
def anneal_quench(indptr, nbr, w, h, temps, u, sig):
    """Metropolis single-spin-flip sweeps followed by a strict-descent quench.

    ``temps`` holds one temperature per sweep; ``u`` holds one uniform per
    (sweep, spin) in row-major order.  ``sig`` is updated in place; returns
    the exact final energy.
    """
    m = sig.shape[0]
    idx = 0
    for si in range(temps.shape[0]):
        temp = temps[si]
        for v in range(m):
            f = h[v]
            for t in range(indptr[v], indptr[v + 1]):
                f += w[t] * sig[nbr[t]]
            de = 2.0 * sig[v] * f
            if de <= 0.0 or u[idx] < np.exp(-de / temp):
                sig[v] = -sig[v]
            idx += 1
    improved = True
    while improved:
        improved = False
        for v in range(m):
            f = h[v]
            for t in range(indptr[v], indptr[v + 1]):
                f += w[t] * sig[nbr[t]]
            if 2.0 * sig[v] * f < -1e-15:
                sig[v] = -sig[v]
                improved = True
    e = 0.0
    for v in range(m):
        acc = 0.0
        for t in range(indptr[v], indptr[v + 1]):
            acc += w[t] * sig[nbr[t]]
        e -= sig[v] * (0.5 * acc + h[v])
    return e


@njit(**_JIT)
def valley_scan(n, interior, indptr, nbr, edge_u, edge_v, edge_q,
                quarter_lo_num, quarter_hi_num):
    """Minimize 2*sum_{boundary edges} q over admissible interior regions.

    ``edge_q`` carries J_e * s_u * s_v per edge for the ground state ``s``.
    A region A is admissible when ``quarter_lo_num <= 4|A| <= quarter_hi_num``
    (callers pass |interior| and 3|interior| for the central size window).
    Ratio is delta / |boundary edges|, defined 0 for an empty edge boundary.

    Membership and the boundary count update incrementally along the Gray
    walk, but the flip cost of each admissible region is re-summed over the
    edge list in index order, so equal regions (in particular a region and
    its complement, which share a boundary) give exactly equal values and
    ties resolve cleanly to the lexicographically smallest region.

    Returns (found, best ratio, best region mask over interior slots).
    """
    m = interior.shape[0]
    n_edges = edge_u.shape[0]
    in_a = np.zeros(n, dtype=np.uint8)
    bd = 0
    size = 0
    found = False
    best_ratio = np.inf
    best_mask = np.int64(0)
    mask = np.int64(0)
    total = np.int64(1) << m
    for k in range(1, total):
        slot = _ctz(k)
        vid = interior[slot]
        inside = in_a[vid]
        for t in range(indptr[vid], indptr[vid + 1]):
            if inside != in_a[nbr[t]]:
                bd -= 1
            else:
                bd += 1
        if inside:
            in_a[vid] = 0
            size -= 1
        else:
            in_a[vid] = 1
            size += 1
        mask ^= np.int64(1) << slot
        four = 4 * size
        if quarter_lo_num <= four <= quarter_hi_num:
            if bd == 0:
                ratio = 0.0
            else:
                delta = 0.0
                for e in range(n_edges):
                    if in_a[edge_u[e]] != in_a[edge_v[e]]:
                        delta += 2.0 * edge_q[e]
                ratio = delta / bd
            if (not found) or ratio < best_ratio:
                found = True
                best_ratio = ratio
                best_mask = mask
            elif ratio == best_ratio and _mask_seq_less(mask, best_mask):
                best_mask = mask
    return found, best_ratio, best_mask


@njit(**_JIT)
def ground_pair_products(indptr, nbr, w, h, pairs_a, pairs_b, tol):
    """Sign of s_a * s_b at the exhaustive minimum for each requested pair."""
    m = h.shape[0]
    emin, mask, _ = gray_min(indptr, nbr, w, h, tol)
    out = np.empty(pairs_a.shape[0], dtype=np.int8)
    for qq in range(pairs_a.shape[0]):
        bit = ((mask >> pairs_a[qq]) ^ (mask >> pairs_b[qq])) & 1
        out[qq] = -1 if bit else 1
    return out


@njit(**_JIT)
def boundary_dependence_events(int_indptr, int_nbr, int_w,
                               perim_slot, m_perim,
                               b_indptr, b_islot, b_w,
                               pairs_a, pairs_b, halve):
    """Whether each interior pair's spin product varies across boundary spins.

    The graph seen here is the interior subgraph (CSR over interior slots)
    plus couplings from "relevant" boundary spins onto interior slots
    (``b_*`` CSR over boundary slots).  Boundary spins without an interior
    neighbor cannot influence the minimizer and must be excluded by the
    caller.

    For speed, interior configurations are first folded into a table indexed
    by the pattern of spins adjacent to the boundary: ``M[pair, class, pat]``
    holds the minimal interior-only energy among configurations with that
    perimeter pattern whose pair product is +1 (class 0) or -1 (class 1).
    Each boundary assignment then only needs the pattern-resolved field
    energies ``F[pat]``, maintained incrementally along a Gray walk over the
    boundary spins.  When ``halve`` is set the first boundary spin is pinned
    to +1; the global spin flip makes the mirrored half redundant.

    Returns a uint8 event flag per pair.
    """
    m = perim_slot.shape[0]
    n_pat = np.int64(1) << m_perim
    n_pairs = pairs_a.shape[0]
    m_bnd = b_indptr.shape[0] - 1

    tables = np.full((n_pairs, 2, n_pat), np.inf)

    # Enumerate interior configurations once, recording per-pattern minima.
    sig = np.ones(m, dtype=np.int8)
    e = 0.0
    for v in range(m):
        acc = 0.0
        for t in range(int_indptr[v], int_indptr[v + 1]):
            acc += int_w[t]
        e -= 0.5 * acc
    pat = np.int64(0)
    mask = np.int64(0)
    for qq in range(n_pairs):
        if e < tables[qq, 0, 0]:
            tables[qq, 0, 0] = e
    total = np.int64(1) << m
    for k in range(1, total):
        v = _ctz(k)
        f = 0.0
        for t in range(int_indptr[v], int_indptr[v + 1]):
            f += int_w[t] * sig[int_nbr[t]]
        e += 2.0 * sig[v] * f
        sig[v] = -sig[v]
        mask ^= np.int64(1) << v
        ps = perim_slot[v]
        if ps >= 0:
            pat ^= np.int64(1) << ps
        for qq in range(n_pairs):
            cls = ((mask >> pairs_a[qq]) ^ (mask >> pairs_b[qq])) & 1
            if e < tables[qq, cls, pat]:
                tables[qq, cls, pat] = e

    # Field energy per perimeter pattern for the all-plus boundary.
    h_perim = np.zeros(m_perim)
    for b in range(m_bnd):
        for t in range(b_indptr[b], b_indptr[b + 1]):
            h_perim[perim_slot[b_islot[t]]] += b_w[t]
    field = np.zeros(n_pat)
    base = 0.0
    for ps in range(m_perim):
        base -= h_perim[ps]
    field[0] = base
    for p in range(1, n_pat):
        low = p & (-p)
        field[p] = field[p ^ low] + 2.0 * h_perim[_ctz(p)]

    gamma = np.ones(m_bnd, dtype=np.int8)
    first = np.zeros(n_pairs, dtype=np.int8)
    events = np.zeros(n_pairs, dtype=np.uint8)
    n_var = m_bnd - 1 if halve else m_bnd
    total_g = np.int64(1) << n_var
    for kg in range(total_g):
        if kg > 0:
            jb = _ctz(kg)
            b = jb + 1 if halve else jb
            old = gamma[b]
            gamma[b] = -old
            for t in range(b_indptr[b], b_indptr[b + 1]):
                ps = perim_slot[b_islot[t]]
                delta = -2.0 * old * b_w[t]
                bit = np.int64(1) << ps
                for p in range(n_pat):
                    if p & bit:
                        field[p] += delta
                    else:
                        field[p] -= delta
        all_done = True
        for qq in range(n_pairs):
            e0 = np.inf
            e1 = np.inf
            for p in range(n_pat):
                fv = field[p]
                a0 = tables[qq, 0, p] + fv
                if a0 < e0:
                    e0 = a0
                a1 = tables[qq, 1, p] + fv
                if a1 < e1:
                    e1 = a1
            prod = 1 if e0 <= e1 else -1
            if kg == 0:
                first[qq] = prod
            elif prod != first[qq]:
                events[qq] = 1
            if events[qq] == 0:
                all_done = False
        if kg > 0 and all_done:
            break
    return events
