"""Exact evaluation and backpropagation for tiny single-output MLPs.

Parameters are a flat float64 vector: the augmented matrices W^l = [b^l, W~^l]
flattened row-major, layer 1 first.  With ``arch.biases`` off the bias
column is omitted from the vector and held at zero.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .pfaffian import Architecture, LossSpec, check_loss_architecture, total_params

BCE_CLAMP = 1e-12
# outputs further than this outside [0, 1] are an error, not a rounding artifact
BCE_RANGE_TOL = 1e-9


@dataclass(frozen=True)
class DatasetSmall:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} inputs but {y.shape[0]} targets")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.y.shape[0]

    @property
    def n0(self) -> int:
        return self.X.shape[1]

    def is_binary(self) -> bool:
        return bool(np.all((self.y == 0.0) | (self.y == 1.0)))


def read_dataset_csv(path) -> DatasetSmall:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if not header or header[-1] != "y":
            raise ValueError(f"{path}: last column must be 'y', got header {header}")
        expected = [f"x_{i}" for i in range(1, len(header))]
        if header[:-1] != expected:
            raise ValueError(f"{path}: expected columns {expected + ['y']}, got {header}")
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.asarray(rows, dtype=np.float64).reshape(-1, len(header))
    return DatasetSmall(data[:, :-1], data[:, -1])


def write_dataset_csv(path, data: DatasetSmall) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x_{i}" for i in range(1, data.n0 + 1)] + ["y"])
        for x, y in zip(data.X, data.y):
            writer.writerow([repr(float(v)) for v in x] + [repr(float(y))])


def read_params_json(path) -> np.ndarray:
    values = json.loads(Path(path).read_text())
    if not isinstance(values, list):
        raise ValueError(f"{path}: parameter file must hold a JSON array")
    return np.asarray(values, dtype=np.float64)


def write_params_json(path, params) -> None:
    Path(path).write_text(json.dumps([float(v) for v in params]) + "\n")


def layer_shapes(arch: Architecture) -> list[tuple[int, int]]:
    """(rows, cols) of each augmented matrix W^l, bias column included."""
    w = arch.widths
    return [(w[l], w[l - 1] + 1) for l in range(1, len(w))]


def unpack(arch: Architecture, params) -> list[np.ndarray]:
    params = np.asarray(params, dtype=np.float64)
    n = total_params(arch)
    if params.shape != (n,):
        raise ValueError(f"expected {n} parameters, got shape {params.shape}")
    mats, pos = [], 0
    for rows, cols in layer_shapes(arch):
        if arch.biases:
            W = params[pos:pos + rows * cols].reshape(rows, cols)
            pos += rows * cols
        else:
            W = np.zeros((rows, cols))
            W[:, 1:] = params[pos:pos + rows * (cols - 1)].reshape(rows, cols - 1)
            pos += rows * (cols - 1)
        mats.append(W)
    return mats


def pack(arch: Architecture, mats: Sequence[np.ndarray]) -> np.ndarray:
    parts = [W.reshape(-1) if arch.biases else W[:, 1:].reshape(-1) for W in mats]
    return np.concatenate(parts)


def weight_mask(arch: Architecture) -> np.ndarray:
    """True at every non-bias entry of the flat parameter vector."""
    mats = [np.ones(shape) for shape in layer_shapes(arch)]
    for W in mats:
        W[:, 0] = 0.0
    return pack(arch, mats).astype(bool)


@dataclass
class ForwardTrace:
    a: list[np.ndarray]   # a^1 .. a^L
    z: list[np.ndarray]   # z^0 .. z^{L-1}, each with the leading 1
    output: float


def _has_skip(arch: Architecture, layer: int) -> bool:
    return arch.skip_connections and 2 <= layer <= arch.L - 1


def forward(arch: Architecture, params, x) -> ForwardTrace:
    mats = unpack(arch, params)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != arch.n0:
        raise ValueError(f"input has length {x.shape[0]}, network expects {arch.n0}")
    z = np.concatenate(([1.0], x))
    a_list, z_list = [], [z]
    sigma = arch.activation.eval
    for layer, W in enumerate(mats[:-1], start=1):
        a = W @ z
        s = sigma(a)
        if _has_skip(arch, layer):
            s = s + z[1:]
        z = np.concatenate(([1.0], s))
        a_list.append(a)
        z_list.append(z)
    a_out = mats[-1] @ z
    a_list.append(a_out)
    out = a_out[0] if arch.output is None else arch.output.eval(a_out)[0]
    return ForwardTrace(a_list, z_list, float(out))


def _bce_checked(f):
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < -BCE_RANGE_TOL) or np.any(f > 1.0 + BCE_RANGE_TOL):
        raise ValueError("BCE needs network outputs in [0, 1]; use a sigmoid last layer")
    return np.clip(f, BCE_CLAMP, 1.0 - BCE_CLAMP)


def _regularizer(arch: Architecture, params, lam: float) -> float:
    if lam <= 0:
        return 0.0
    w = np.asarray(params, dtype=np.float64)[weight_mask(arch)]
    return lam * 0.5 * float(np.dot(w, w))


def loss_eval(arch: Architecture, params, data: DatasetSmall, loss: LossSpec) -> float:
    check_loss_architecture(loss, arch)
    outs = np.array([forward(arch, params, x).output for x in data.X])
    if loss.kind == "MSE":
        r2 = (data.y - outs) ** 2
        value = 0.5 * r2.sum() if loss.mse_convention == "half_sum" else r2.sum() / data.m
    else:
        f = _bce_checked(outs)
        value = float(np.sum(-data.y * np.log(f) - (1.0 - data.y) * np.log(1.0 - f)))
    return float(value) + _regularizer(arch, params, loss.l2_lambda)


def output_delta(arch: Architecture, loss: LossSpec, a_out: float, y: float, m: int,
                 simplified: bool = True) -> float:
    """d loss_i / d a^L for one sample.

    For BCE with a logistic output the factor g'/(g(1-g)) is identically 1,
    so ``simplified`` uses g(a^L) - y directly.
    """
    if arch.output is None:
        g, dg = a_out, 1.0
    else:
        g = float(arch.output.eval(a_out))
        dg = float(arch.output.deriv(a_out))
    if loss.kind == "MSE":
        scale = 1.0 if loss.mse_convention == "half_sum" else 2.0 / m
        return scale * (g - y) * dg
    if simplified and arch.output is not None and arch.output.name == "logsig":
        return g - y
    f = float(_bce_checked(g))
    return dg * (-y / f + (1.0 - y) / (1.0 - f))


def backprop_grad(arch: Architecture, params, data: DatasetSmall, loss: LossSpec) -> np.ndarray:
    check_loss_architecture(loss, arch)
    mats = unpack(arch, params)
    grads = [np.zeros_like(W) for W in mats]
    dsigma = arch.activation.deriv
    L = arch.L
    for x, y in zip(data.X, data.y):
        tr = forward(arch, params, x)
        delta = np.array([output_delta(arch, loss, tr.a[-1][0], y, data.m)])
        grads[L - 1] += np.outer(delta, tr.z[L - 1])
        upstream = mats[L - 1][:, 1:].T @ delta          # dL/dz~^{L-1}
        for layer in range(L - 1, 0, -1):
            delta = upstream * dsigma(tr.a[layer - 1])
            grads[layer - 1] += np.outer(delta, tr.z[layer - 1])
            if layer == 1:
                break
            carry = upstream if _has_skip(arch, layer) else 0.0
            upstream = mats[layer - 1][:, 1:].T @ delta + carry
    flat = pack(arch, grads)
    if loss.l2_lambda > 0:
        p = np.asarray(params, dtype=np.float64)
        flat = flat + loss.l2_lambda * np.where(weight_mask(arch), p, 0.0)
    return flat


def finite_diff_grad(arch: Architecture, params, data: DatasetSmall, loss: LossSpec,
                     step: float = 1e-5) -> np.ndarray:
    if not step > 0:
        raise ValueError(f"finite-difference step must be positive, got {step}")
    theta = np.asarray(params, dtype=np.float64)
    out = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = step
        out[i] = (loss_eval(arch, theta + e, data, loss)
                  - loss_eval(arch, theta - e, data, loss)) / (2 * step)
    return out


def loss_batch(arch: Architecture, thetas, data: DatasetSmall, loss: LossSpec) -> np.ndarray:
    """Loss at each row of an (N, n_params) parameter array, vectorized over N."""
    check_loss_architecture(loss, arch)
    thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
    N = thetas.shape[0]
    mats = [unpack_rows(arch, thetas, l) for l in range(arch.L)]
    sigma = arch.activation.eval
    outs = np.empty((data.m, N))
    for i, x in enumerate(data.X):
        z = np.broadcast_to(np.concatenate(([1.0], x)), (N, arch.n0 + 1))
        for layer, W in enumerate(mats[:-1], start=1):
            s = sigma(np.einsum("nij,nj->ni", W, z))
            if _has_skip(arch, layer):
                s = s + z[:, 1:]
            z = np.concatenate((np.ones((N, 1)), s), axis=1)
        a_out = np.einsum("nij,nj->ni", mats[-1], z)[:, 0]
        outs[i] = a_out if arch.output is None else arch.output.eval(a_out)
    y = data.y[:, None]
    if loss.kind == "MSE":
        r2 = ((y - outs) ** 2).sum(axis=0)
        values = 0.5 * r2 if loss.mse_convention == "half_sum" else r2 / data.m
    else:
        f = _bce_checked(outs)
        values = np.sum(-y * np.log(f) - (1.0 - y) * np.log(1.0 - f), axis=0)
    if loss.l2_lambda > 0:
        w = thetas[:, weight_mask(arch)]
        values = values + loss.l2_lambda * 0.5 * np.einsum("ni,ni->n", w, w)
    return values


def unpack_rows(arch: Architecture, thetas: np.ndarray, layer_index: int) -> np.ndarray:
    """Augmented matrix of one layer for every row of ``thetas``: shape (N, rows, cols)."""
    shapes = layer_shapes(arch)
    N = thetas.shape[0]
    pos = 0
    for rows, cols in shapes[:layer_index]:
        pos += rows * (cols if arch.biases else cols - 1)
    rows, cols = shapes[layer_index]
    if arch.biases:
        return thetas[:, pos:pos + rows * cols].reshape(N, rows, cols)
    W = np.zeros((N, rows, cols))
    W[:, :, 1:] = thetas[:, pos:pos + rows * (cols - 1)].reshape(N, rows, cols - 1)
    return W
