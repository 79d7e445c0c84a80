"""Pure-Python kernels: GF(2) column reduction and union-find.

Columns are Python ints used as bitsets; XOR on them runs in C, which keeps
this fallback usable on grids up to a few thousand cells per dimension.
"""
import numpy as np

BACKEND = "python"


def gf2_rank(faces, nrows):
    """Rank over GF(2) of the matrix whose column j has ones at rows faces[j]."""
    faces = np.asarray(faces)
    if faces.size == 0 or nrows == 0:
        return 0
    pivots = {}
    rank = 0
    for col in faces.tolist():
        v = 0
        for r in col:
            v ^= 1 << r
        while v:
            low = v.bit_length() - 1
            p = pivots.get(low)
            if p is None:
                pivots[low] = v
                rank += 1
                break
            v ^= p
    return rank


def uf_merge_count(n, edges):
    """Number of successful unions when joining the endpoint pairs in ``edges``."""
    parent = list(range(n))
    size = [1] * n
    merges = 0
    for u, v in np.asarray(edges).reshape(-1, 2).tolist():
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        if u == v:
            continue
        if size[u] < size[v]:
            u, v = v, u
        parent[v] = u
        size[u] += size[v]
        merges += 1
    return merges
