"""Hot numeric kernels: numba fast path with a NumPy/pure-Python fallback.

The brute-force side of this package (static greedy recomputation,
domination ranks from scratch, masked degree scans, permutation census)
runs millions of times inside the verification suites, so these loops are
compiled with numba when available. Setting the environment variable
``DYNMIS_NO_NUMBA=1`` selects the fallback path; it is also chosen
automatically when numba cannot be imported. Both paths share signatures
and are asserted equal in the test suite; ``dynmis cli bench-kernels``
times them side by side.
"""

from __future__ import annotations

import itertools
import os

import numpy as np

_FLAG = os.environ.get("DYNMIS_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _FLAG in {"1", "true", "yes", "on"}

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled via DYNMIS_NO_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False
    njit = None


def backend_name() -> str:
    return "numba" if HAS_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# CSR construction


def _build_csr_py(n, us, vs):
    deg = np.bincount(us, minlength=n) + np.bincount(vs, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    ends = np.concatenate((us, vs))
    other = np.concatenate((vs, us))
    order = np.argsort(ends, kind="stable")
    return indptr, other[order].astype(np.int64)


def _build_csr_loop(n, us, vs):
    m = us.shape[0]
    deg = np.zeros(n, dtype=np.int64)
    for e in range(m):
        deg[us[e]] += 1
        deg[vs[e]] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + deg[v]
    fill = indptr[:n].copy()
    indices = np.empty(2 * m, dtype=np.int64)
    for e in range(m):
        u = us[e]
        v = vs[e]
        indices[fill[u]] = v
        fill[u] += 1
        indices[fill[v]] = u
        fill[v] += 1
    return indptr, indices


# ---------------------------------------------------------------------------
# Static greedy MIS over a CSR adjacency, scanning vertices in rank order


def _greedy_mis_py(n, indptr, indices, order):
    in_mis = np.zeros(n, dtype=np.uint8)
    dominated = np.zeros(n, dtype=np.bool_)
    for v in order.tolist():
        if not dominated[v]:
            in_mis[v] = 1
            dominated[v] = True
            dominated[indices[indptr[v] : indptr[v + 1]]] = True
    return in_mis


def _greedy_mis_loop(n, indptr, indices, order):
    in_mis = np.zeros(n, dtype=np.uint8)
    dominated = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        v = order[i]
        if not dominated[v]:
            in_mis[v] = 1
            dominated[v] = True
            for j in range(indptr[v], indptr[v + 1]):
                dominated[indices[j]] = True
    return in_mis


# ---------------------------------------------------------------------------
# Domination ranks recomputed from scratch given edges and MIS membership


def _dom_ranks_py(n, us, vs, rank, in_mis, inf):
    dom = np.where(in_mis.astype(np.bool_), rank, np.int64(inf)).astype(np.int64)
    if us.shape[0]:
        take = in_mis[vs].astype(np.bool_)
        np.minimum.at(dom, us[take], rank[vs[take]])
        take = in_mis[us].astype(np.bool_)
        np.minimum.at(dom, vs[take], rank[us[take]])
    return dom


def _dom_ranks_loop(n, us, vs, rank, in_mis, inf):
    dom = np.empty(n, dtype=np.int64)
    for v in range(n):
        dom[v] = rank[v] if in_mis[v] else inf
    for e in range(us.shape[0]):
        u = us[e]
        v = vs[e]
        if in_mis[v] and rank[v] < dom[u]:
            dom[u] = rank[v]
        if in_mis[u] and rank[u] < dom[v]:
            dom[v] = rank[u]
    return dom


# ---------------------------------------------------------------------------
# Maximum degree of the subgraph induced by a vertex mask


def _max_degree_masked_py(n, us, vs, keep):
    if us.shape[0] == 0:
        return 0
    sel = keep[us] & keep[vs]
    if not sel.any():
        return 0
    deg = np.bincount(us[sel], minlength=n) + np.bincount(vs[sel], minlength=n)
    return int(deg.max())


def _max_degree_masked_loop(n, us, vs, keep):
    deg = np.zeros(n, dtype=np.int64)
    best = 0
    for e in range(us.shape[0]):
        u = us[e]
        v = vs[e]
        if keep[u] and keep[v]:
            deg[u] += 1
            deg[v] += 1
            if deg[u] > best:
                best = deg[u]
            if deg[v] > best:
                best = deg[v]
    return best


# ---------------------------------------------------------------------------
# Exhaustive permutation census of affected-set sizes.
#
# For one fixed edge update between u and v, enumerate every permutation of
# [0, n) and accumulate |S| (the definitional affected set of v) into a
# table indexed by (rank of u, rank of v). Conditional expectations over
# any rank condition are exact integer ratios of table entries.


def _census_eval(n, adj_old, adj_new, u, v, perm, pos_of, lower):
    # greedy MIS on the old graph under this permutation
    mis = 0
    dominated = 0
    seen = 0
    for pos in range(n):
        vt = perm[pos]
        pos_of[vt] = pos
        lower[vt] = seen
        seen |= 1 << vt
        if not (dominated >> vt) & 1:
            mis |= 1 << vt
            dominated |= adj_old[vt] | (1 << vt)
    # does v break the greedy constraint on the updated graph?
    pred_mis = adj_new[v] & lower[v] & mis
    if (mis >> v) & 1:
        violated = pred_mis != 0
    else:
        violated = pred_mis == 0
    if not violated:
        return 0
    # iterate the closure: prev layer drives MIS members, the union
    # of all layers drives non-members
    prev = 1 << v
    union = 1 << v
    for _ in range(n + 1):
        cur = 0
        for w in range(n):
            iw = adj_new[w] & lower[w]
            if (mis >> w) & 1:
                if iw & prev:
                    cur |= 1 << w
            else:
                if iw & mis & ~union == 0:
                    cur |= 1 << w
        if cur & ~union == 0:
            break
        union |= cur
        prev = cur
    count = 0
    x = union
    while x:
        count += x & 1
        x >>= 1
    return count


def _influence_census_py(n, adj_old, u, v, is_insert):
    adj_old = [int(x) for x in adj_old]
    adj_new = list(adj_old)
    if is_insert:
        adj_new[u] |= 1 << v
        adj_new[v] |= 1 << u
    else:
        adj_new[u] &= ~(1 << v)
        adj_new[v] &= ~(1 << u)
    sums = np.zeros((n + 1, n + 1), dtype=np.int64)
    pos_of = [0] * n
    lower = [0] * n
    for perm in itertools.permutations(range(n)):
        size = _census_eval(n, adj_old, adj_new, u, v, perm, pos_of, lower)
        sums[pos_of[u] + 1, pos_of[v] + 1] += size
    return sums


def _influence_census_loop(n, adj_old, u, v, is_insert):
    adj_new = adj_old.copy()
    if is_insert:
        adj_new[u] |= np.int64(1) << v
        adj_new[v] |= np.int64(1) << u
    else:
        adj_new[u] &= ~(np.int64(1) << v)
        adj_new[v] &= ~(np.int64(1) << u)
    sums = np.zeros((n + 1, n + 1), dtype=np.int64)
    perm = np.arange(n, dtype=np.int64)
    pos_of = np.zeros(n, dtype=np.int64)
    lower = np.zeros(n, dtype=np.int64)
    one = np.int64(1)
    while True:
        # evaluate this permutation
        mis = np.int64(0)
        dominated = np.int64(0)
        seen = np.int64(0)
        for pos in range(n):
            vt = perm[pos]
            pos_of[vt] = pos
            lower[vt] = seen
            seen |= one << vt
            if not (dominated >> vt) & one:
                mis |= one << vt
                dominated |= adj_old[vt] | (one << vt)
        pred_mis = adj_new[v] & lower[v] & mis
        if (mis >> v) & one:
            violated = pred_mis != 0
        else:
            violated = pred_mis == 0
        if violated:
            prev = one << v
            union = one << v
            for _ in range(n + 1):
                cur = np.int64(0)
                for w in range(n):
                    iw = adj_new[w] & lower[w]
                    if (mis >> w) & one:
                        if iw & prev:
                            cur |= one << w
                    else:
                        if iw & mis & ~union == 0:
                            cur |= one << w
                if cur & ~union == 0:
                    break
                union |= cur
                prev = cur
            count = 0
            x = union
            while x:
                count += x & one
                x >>= one
            sums[pos_of[u] + 1, pos_of[v] + 1] += count
        # advance to the next permutation in lexicographic order
        i = n - 2
        while i >= 0 and perm[i] >= perm[i + 1]:
            i -= 1
        if i < 0:
            break
        j = n - 1
        while perm[j] <= perm[i]:
            j -= 1
        perm[i], perm[j] = perm[j], perm[i]
        lo = i + 1
        hi = n - 1
        while lo < hi:
            perm[lo], perm[hi] = perm[hi], perm[lo]
            lo += 1
            hi -= 1
    return sums


# ---------------------------------------------------------------------------
# Backend selection

if HAS_NUMBA:
    build_csr = njit(cache=True)(_build_csr_loop)
    greedy_mis_csr = njit(cache=True)(_greedy_mis_loop)
    dom_ranks = njit(cache=True)(_dom_ranks_loop)
    max_degree_masked = njit(cache=True)(_max_degree_masked_loop)
    influence_census = njit(cache=True)(_influence_census_loop)
else:
    build_csr = _build_csr_py
    greedy_mis_csr = _greedy_mis_py
    dom_ranks = _dom_ranks_py
    max_degree_masked = _max_degree_masked_py
    influence_census = _influence_census_py

PY_KERNELS = {
    "build_csr": _build_csr_py,
    "greedy_mis_csr": _greedy_mis_py,
    "dom_ranks": _dom_ranks_py,
    "max_degree_masked": _max_degree_masked_py,
    "influence_census": _influence_census_py,
}

ACTIVE_KERNELS = {
    "build_csr": build_csr,
    "greedy_mis_csr": greedy_mis_csr,
    "dom_ranks": dom_ranks,
    "max_degree_masked": max_degree_masked,
    "influence_census": influence_census,
}


def edge_arrays(edges) -> tuple[np.ndarray, np.ndarray]:
    """Split an iterable of (u, v) pairs into two int64 endpoint arrays."""
    pairs = list(edges)
    if not pairs:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy()
    arr = np.asarray(pairs, dtype=np.int64)
    return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])
