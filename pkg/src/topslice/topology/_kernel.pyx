# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Union-find persistence kernel (compiled hot path).

Mirrors ``_kernel_py.persistence_pairs`` exactly; see there for semantics.
"""

import numpy as np


def persistence_pairs(values, edge_u, edge_v, edge_w):
    values_arr = np.ascontiguousarray(values, dtype=np.float64)
    eu_arr = np.ascontiguousarray(edge_u, dtype=np.int64)
    ev_arr = np.ascontiguousarray(edge_v, dtype=np.int64)
    ew_arr = np.ascontiguousarray(edge_w, dtype=np.float64)

    cdef Py_ssize_t n = values_arr.shape[0]
    cdef Py_ssize_t m = ew_arr.shape[0]

    parent_arr = np.arange(n, dtype=np.int64)
    bval_arr = values_arr.copy()
    bidx_arr = np.arange(n, dtype=np.int64)
    out_b = np.empty(m, dtype=np.float64)
    out_d = np.empty(m, dtype=np.float64)

    cdef long long[::1] parent = parent_arr
    cdef double[::1] bval = bval_arr
    cdef long long[::1] bidx = bidx_arr
    cdef long long[::1] eu = eu_arr
    cdef long long[::1] ev = ev_arr
    cdef double[::1] ew = ew_arr
    cdef double[::1] ob = out_b
    cdef double[::1] od = out_d

    cdef Py_ssize_t t
    cdef Py_ssize_t k = 0
    cdef long long u, v, swap
    for t in range(m):
        u = eu[t]
        v = ev[t]
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        if u == v:
            continue
        if bval[v] < bval[u] or (bval[v] == bval[u] and bidx[v] < bidx[u]):
            swap = u
            u = v
            v = swap
        ob[k] = bval[v]
        od[k] = ew[t]
        k += 1
        parent[v] = u

    pairs = np.stack([out_b[:k], out_d[:k]], axis=1) if k else np.empty((0, 2))
    roots = parent_arr == np.arange(n, dtype=np.int64)
    essential = np.sort(bval_arr[roots])
    return pairs, essential
