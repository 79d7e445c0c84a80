# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled kernels, same contracts as _pykernels."""
import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector

BACKEND = "compiled"


cdef void _xor_into(vector[int]& acc, const vector[int]& other, vector[int]& tmp) nogil:
    # symmetric difference of two ascending index lists
    cdef size_t i = 0, j = 0
    cdef size_t na = acc.size(), nb = other.size()
    tmp.clear()
    while i < na and j < nb:
        if acc[i] < other[j]:
            tmp.push_back(acc[i]); i += 1
        elif acc[i] > other[j]:
            tmp.push_back(other[j]); j += 1
        else:
            i += 1; j += 1
    while i < na:
        tmp.push_back(acc[i]); i += 1
    while j < nb:
        tmp.push_back(other[j]); j += 1
    acc.swap(tmp)


def gf2_rank(faces, Py_ssize_t nrows):
    cdef cnp.int64_t[:, :] f = np.ascontiguousarray(faces, dtype=np.int64).reshape(len(faces), -1)
    cdef Py_ssize_t ncols = f.shape[0], width = f.shape[1]
    if ncols == 0 or nrows == 0 or width == 0:
        return 0
    cdef vector[vector[int]] stored
    cdef vector[int] pivot_of = vector[int](nrows, -1)
    cdef vector[int] col, tmp
    cdef Py_ssize_t j, k, a, b
    cdef int low, p, t
    cdef Py_ssize_t rank = 0
    with nogil:
        for j in range(ncols):
            col.clear()
            for k in range(width):
                col.push_back(<int>f[j, k])
            # insertion sort; width is at most 6
            for a in range(1, width):
                t = col[a]
                b = a - 1
                while b >= 0 and col[b] > t:
                    col[b + 1] = col[b]
                    b -= 1
                col[b + 1] = t
            while col.size() > 0:
                low = col.back()
                p = pivot_of[low]
                if p < 0:
                    pivot_of[low] = <int>stored.size()
                    stored.push_back(col)
                    rank += 1
                    break
                _xor_into(col, stored[p], tmp)
    return rank


cdef inline Py_ssize_t _find(Py_ssize_t[:] parent, Py_ssize_t x) nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def uf_merge_count(Py_ssize_t n, edges):
    cdef cnp.int64_t[:, :] e = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
    parent_arr = np.arange(n, dtype=np.intp)
    size_arr = np.ones(n, dtype=np.intp)
    cdef Py_ssize_t[:] parent = parent_arr
    cdef Py_ssize_t[:] size = size_arr
    cdef Py_ssize_t i, u, v, merges = 0
    with nogil:
        for i in range(e.shape[0]):
            u = _find(parent, e[i, 0])
            v = _find(parent, e[i, 1])
            if u == v:
                continue
            if size[u] < size[v]:
                u, v = v, u
            parent[v] = u
            size[u] += size[v]
            merges += 1
    return merges
