"""Cubical complexes on a regular vertex grid.

A cell is a lower-corner grid position plus the set of axes it spans.  For
each axis set S the complex stores a boolean array whose extent is n - 1
along the axes in S and n along the rest.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np


def _shift(a: np.ndarray, axis: int, upper: bool) -> np.ndarray:
    idx = [slice(None)] * a.ndim
    idx[axis] = slice(1, None) if upper else slice(None, -1)
    return a[tuple(idx)]


class CubicalComplex:
    def __init__(self, shape, cells: dict):
        self.shape = tuple(int(s) for s in shape)
        self.dim = len(self.shape)
        self.cells = {}
        for k in range(self.dim + 1):
            for axes in combinations(range(self.dim), k):
                expected = tuple(n - 1 if i in axes else n for i, n in enumerate(self.shape))
                mask = cells.get(axes)
                if mask is None:
                    mask = np.zeros(expected, dtype=bool)
                mask = np.asarray(mask, dtype=bool)
                if mask.shape != expected:
                    raise ValueError(f"cells spanning {axes}: shape {mask.shape}, expected {expected}")
                self.cells[axes] = mask

    @classmethod
    def from_vertex_mask(cls, mask) -> "CubicalComplex":
        """Full-corner rule: a cell is present iff all of its corner vertices are."""
        mask = np.asarray(mask, dtype=bool)
        cells = {(): mask}
        for k in range(1, mask.ndim + 1):
            for axes in combinations(range(mask.ndim), k):
                lower = cells[axes[:-1]]
                a = axes[-1]
                cells[axes] = _shift(lower, a, False) & _shift(lower, a, True)
        return cls(mask.shape, cells)

    def axis_sets(self, k: int):
        return list(combinations(range(self.dim), k))

    def count(self, k: int) -> int:
        if k < 0 or k > self.dim:
            return 0
        return int(sum(int(self.cells[s].sum()) for s in self.axis_sets(k)))

    def cell_counts(self) -> tuple[int, ...]:
        return tuple(self.count(k) for k in range(self.dim + 1))

    @property
    def is_empty(self) -> bool:
        return not self.cells[()].any()

    def euler(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.cell_counts()))

    def _id_arrays(self, k: int) -> dict:
        ids, offset = {}, 0
        for s in self.axis_sets(k):
            mask = self.cells[s]
            arr = np.full(mask.shape, -1, dtype=np.int64)
            n = int(mask.sum())
            arr[mask] = np.arange(offset, offset + n)
            ids[s] = arr
            offset += n
        return ids

    def boundary_faces(self, k: int) -> tuple[np.ndarray, int]:
        """Boundary of the k-cells as an (n_k, 2k) array of (k-1)-cell ids.

        Cell ids follow the enumeration order: axis sets lexicographically,
        then C-order grid position.  Returns the array and n_{k-1}.
        """
        if not 1 <= k <= self.dim:
            raise ValueError(f"boundary dimension must be in 1..{self.dim}, got {k}")
        lower = self._id_arrays(k - 1)
        blocks = []
        for s in self.axis_sets(k):
            mask = self.cells[s]
            cols = []
            for a in s:
                face = lower[tuple(i for i in s if i != a)]
                cols.append(_shift(face, a, False)[mask])
                cols.append(_shift(face, a, True)[mask])
            blocks.append(np.stack(cols, axis=1))
        faces = np.concatenate(blocks, axis=0) if blocks else np.zeros((0, 2 * k), np.int64)
        return faces, self.count(k - 1)

    def closure_violations(self) -> list[tuple]:
        """(axis set, dropped axis) pairs where a present cell has a missing face."""
        bad = []
        for k in range(1, self.dim + 1):
            for s in self.axis_sets(k):
                mask = self.cells[s]
                for a in s:
                    face = self.cells[tuple(i for i in s if i != a)]
                    ok = _shift(face, a, False) & _shift(face, a, True)
                    if np.any(mask & ~ok):
                        bad.append((s, a))
        return bad

    def check_closure(self) -> None:
        bad = self.closure_violations()
        if bad:
            raise ValueError(f"complex is not closed under faces: {bad[:5]}")

    def is_subcomplex_of(self, other: "CubicalComplex") -> bool:
        if self.shape != other.shape:
            return False
        return all(not np.any(self.cells[s] & ~other.cells[s]) for s in self.cells)


def sublevel_complex(field, c: float) -> CubicalComplex:
    """Cubical complex of grid nodes with value <= c (ties included)."""
    if not np.isfinite(c):
        raise ValueError(f"threshold must be finite, got {c}")
    values = field.values if hasattr(field, "values") else np.asarray(field)
    return CubicalComplex.from_vertex_mask(np.asarray(values) <= c)
