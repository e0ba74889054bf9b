"""Pure-Python union-find persistence kernel (fallback backend).

Same contract as the compiled extension ``_kernel``: edges must arrive
sorted by nondecreasing value (ties in insertion order).
"""

import numpy as np


def persistence_pairs(values, edge_u, edge_v, edge_w):
    """Elder-rule 0-dim persistence of a sublevel-filtered weighted graph.

    Every vertex starts as its own component born at its value.  Each edge
    that joins two components kills the younger one (larger birth value,
    ties broken by larger founding-vertex index) at the edge value.

    Returns ``(pairs, essential_births)``: an (k, 2) float64 array of
    (birth, death) in merge order, and the sorted births of the components
    that never die.
    """
    n = len(values)
    parent = list(range(n))
    bval = [float(v) for v in values]
    bidx = list(range(n))
    births, deaths = [], []
    for t in range(len(edge_w)):
        u = int(edge_u[t])
        v = int(edge_v[t])
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        if u == v:
            continue
        if bval[v] < bval[u] or (bval[v] == bval[u] and bidx[v] < bidx[u]):
            u, v = v, u
        births.append(bval[v])
        deaths.append(float(edge_w[t]))
        parent[v] = u
    pairs = np.array([births, deaths], dtype=np.float64).T.reshape(-1, 2)
    essential = np.sort(
        np.array([bval[i] for i in range(n) if parent[i] == i], dtype=np.float64)
    )
    return pairs, essential
