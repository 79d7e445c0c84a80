"""Betti numbers of cubical complexes over GF(2)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .cubical import CubicalComplex, sublevel_complex


@dataclass(frozen=True)
class BettiVector:
    b: tuple[int, ...]
    euler: int
    cell_counts: tuple[int, ...]
    empty: bool = False

    @property
    def total(self) -> int:
        return sum(self.b)

    def alternating_sum(self) -> int:
        return sum((-1) ** k * v for k, v in enumerate(self.b))

    def padded(self, n: int = 3) -> tuple[int, ...]:
        return tuple(self.b[:n]) + (0,) * max(0, n - len(self.b))


def boundary_ranks(cx: CubicalComplex, rank=None) -> list[int]:
    """[rank d_1, ..., rank d_dim] of the boundary maps."""
    rank = rank or kernels.gf2_rank
    ranks = []
    for k in range(1, cx.dim + 1):
        faces, nrows = cx.boundary_faces(k)
        ranks.append(rank(faces, nrows) if len(faces) else 0)
    return ranks


def betti_gf2(cx: CubicalComplex, rank=None) -> BettiVector:
    """b_k = n_k - rank d_k - rank d_{k+1}, by sparse elimination."""
    cx.check_closure()
    counts = cx.cell_counts()
    ranks = [0] + boundary_ranks(cx, rank) + [0]
    b = tuple(counts[k] - ranks[k] - ranks[k + 1] for k in range(cx.dim + 1))
    return BettiVector(b, cx.euler(), counts, cx.is_empty)


def betti_fast2d(cx: CubicalComplex, merge_count=None) -> BettiVector:
    """Planar shortcut: b0 by union-find over edges, b1 = b0 - chi."""
    if cx.dim != 2:
        raise ValueError(f"betti_fast2d needs a 2-axis complex, got {cx.dim} axes")
    counts = cx.cell_counts()
    if cx.is_empty:
        return BettiVector((0, 0, 0), 0, counts, True)
    merge_count = merge_count or kernels.uf_merge_count
    shape = cx.shape
    flat = np.arange(int(np.prod(shape))).reshape(shape)
    edges = [
        np.stack([flat[:-1, :][cx.cells[(0,)]], flat[1:, :][cx.cells[(0,)]]], axis=1),
        np.stack([flat[:, :-1][cx.cells[(1,)]], flat[:, 1:][cx.cells[(1,)]]], axis=1),
    ]
    b0 = counts[0] - merge_count(flat.size, np.concatenate(edges))
    chi = cx.euler()
    return BettiVector((b0, b0 - chi, 0), chi, counts)


def betti(cx: CubicalComplex, method: str = "auto") -> BettiVector:
    if method == "auto":
        method = "fast" if cx.dim == 2 else "gf2"
    if method == "fast":
        return betti_fast2d(cx)
    if method == "gf2":
        return betti_gf2(cx)
    raise ValueError(f"unknown homology method {method!r}")


def sweep_betti(field, thresholds, method: str = "auto") -> list[tuple[float, BettiVector]]:
    thresholds = [float(c) for c in thresholds]
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be sorted ascending")
    return [(c, betti(sublevel_complex(field, c), method)) for c in thresholds]
