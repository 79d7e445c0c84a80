"""Loss values on 2- or 3-parameter grid slices, plus the field file format."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..network import DatasetSmall, loss_batch
from ..pfaffian import Architecture, LossSpec


@dataclass(frozen=True)
class ParameterSlice:
    varied_indices: tuple[int, ...]
    ranges: tuple[tuple[float, float], ...]
    resolution: tuple[int, ...]
    base_point: np.ndarray

    def __post_init__(self):
        idx = tuple(int(i) for i in self.varied_indices)
        ranges = tuple((float(lo), float(hi)) for lo, hi in self.ranges)
        res = tuple(int(r) for r in self.resolution)
        base = np.asarray(self.base_point, dtype=np.float64).reshape(-1)
        if len(idx) not in (2, 3):
            raise ValueError(f"a slice varies 2 or 3 parameters, got {len(idx)}")
        if len(set(idx)) != len(idx):
            raise ValueError(f"varied indices must be distinct: {idx}")
        if any(i < 0 or i >= base.size for i in idx):
            raise ValueError(f"varied indices {idx} out of range for {base.size} parameters")
        if not len(ranges) == len(res) == len(idx):
            raise ValueError("need one range and one resolution per varied index")
        if any(r < 2 for r in res):
            raise ValueError(f"resolution must be >= 2 per axis, got {res}")
        if any(not (np.isfinite(lo) and np.isfinite(hi) and lo < hi) for lo, hi in ranges):
            raise ValueError(f"ranges must be finite with min < max: {ranges}")
        object.__setattr__(self, "varied_indices", idx)
        object.__setattr__(self, "ranges", ranges)
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "base_point", base)

    @property
    def dim(self) -> int:
        return len(self.varied_indices)

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, n) for (lo, hi), n in zip(self.ranges, self.resolution)]

    def node_params(self, flat_index: int) -> np.ndarray:
        pos = np.unravel_index(flat_index, self.resolution)
        theta = self.base_point.copy()
        for i, ax, p in zip(self.varied_indices, self.axes(), pos):
            theta[i] = ax[p]
        return theta

    def points(self) -> np.ndarray:
        """All grid nodes as full parameter vectors, row-major with axis 0 slowest."""
        grids = np.meshgrid(*self.axes(), indexing="ij")
        thetas = np.tile(self.base_point, (grids[0].size, 1))
        for i, g in zip(self.varied_indices, grids):
            thetas[:, i] = g.reshape(-1)
        return thetas


@dataclass(frozen=True)
class ScalarField:
    slice: ParameterSlice
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(self.slice.resolution)
        object.__setattr__(self, "values", values)


def default_base_point(n_params: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-0.5, 0.5, n_params)


def sample_field(arch: Architecture, data: DatasetSmall, loss: LossSpec, slc: ParameterSlice,
                 workers: int = 1, chunk: int = 8192) -> ScalarField:
    thetas = slc.points()
    chunks = [thetas[i:i + chunk] for i in range(0, len(thetas), chunk)]
    # overflow shows up as inf and is reported below with the node
    with np.errstate(over="ignore", invalid="ignore"):
        if workers > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(lambda t: loss_batch(arch, t, data, loss), chunks))
        else:
            parts = [loss_batch(arch, t, data, loss) for t in chunks]
    values = np.concatenate(parts)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        node = tuple(int(p) for p in np.unravel_index(bad[0], slc.resolution))
        raise ValueError(f"non-finite loss {values[bad[0]]} at grid node {node}, "
                         f"parameters {slc.node_params(bad[0]).tolist()}")
    return ScalarField(slc, values)


def default_thresholds(field: ScalarField, quantiles: int = 16, extra=()) -> list[float]:
    levels = np.quantile(field.values, np.linspace(0.0, 1.0, quantiles)) if quantiles else []
    return sorted(set(float(c) for c in levels) | set(float(c) for c in extra))


def write_field(path, field: ScalarField) -> None:
    slc = field.slice
    header = {
        "axes": [{"index": i, "min": lo, "max": hi, "count": n}
                 for i, (lo, hi), n in zip(slc.varied_indices, slc.ranges, slc.resolution)],
        "base_point": [float(v) for v in slc.base_point],
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines.extend(repr(float(v)) for v in field.values.reshape(-1))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field(path) -> ScalarField:
    with open(path) as fh:
        header = json.loads(fh.readline())
        values = np.array([float(line) for line in fh if line.strip()])
    axes = header["axes"]
    slc = ParameterSlice(
        tuple(a["index"] for a in axes),
        tuple((a["min"], a["max"]) for a in axes),
        tuple(a["count"] for a in axes),
        np.asarray(header["base_point"], dtype=np.float64),
    )
    expected = int(np.prod(slc.resolution))
    if values.size != expected:
        raise ValueError(f"{path}: {values.size} values, header implies {expected}")
    return ScalarField(slc, values)
