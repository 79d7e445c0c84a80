"""Pfaffian format calculus for MSE/BCE losses of feedforward networks.

Formats are triples ``(alpha, beta, ell)``: the degree of the chain, the
degree of the function as a polynomial over the chain, and the chain length.
Only degrees are tracked; no polynomial is ever built symbolically.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class DependenceCase(enum.IntEnum):
    """Whether the chain polynomials of an activation reference the raw input."""

    CASE1 = 1
    CASE2 = 2


@dataclass(frozen=True)
class PfaffianFormat:
    alpha: int
    beta: int
    ell: int

    def __post_init__(self):
        for name in ("alpha", "beta", "ell"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            if value < 0:
                raise ValueError(f"{name} must be nonnegative, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def is_proper_chain(self) -> bool:
        """True when a nonempty chain carries alpha >= 1 and beta >= 1."""
        return self.ell == 0 or (self.alpha >= 1 and self.beta >= 1)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.alpha, self.beta, self.ell)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "ell": self.ell}

    @classmethod
    def from_dict(cls, data: dict) -> "PfaffianFormat":
        extra = set(data) - {"alpha", "beta", "ell"}
        if extra:
            raise ValueError(f"unknown format keys: {sorted(extra)}")
        return cls(data["alpha"], data["beta"], data["ell"])


def _logsig(x):
    # tanh form avoids overflow of exp for large |x|
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=np.float64)))


def _logsig_deriv(x):
    s = _logsig(x)
    return s * (1.0 - s)


def _tanh_deriv(x):
    t = np.tanh(np.asarray(x, dtype=np.float64))
    return 1.0 - t * t


def _arctan_deriv(x):
    x = np.asarray(x, dtype=np.float64)
    return 1.0 / (1.0 + x * x)


@dataclass(frozen=True)
class ActivationSpec:
    name: str
    format: PfaffianFormat
    dependence_case: DependenceCase
    eval: Callable = field(repr=False, compare=False)
    deriv: Callable = field(repr=False, compare=False)


# arctan sits on the chain ((1+x^2)^-1, arctan x); d/dx (1+x^2)^-1 = -2x (1+x^2)^-2
# is a degree-3 polynomial in (x, f1) that references x directly.
ACTIVATIONS: dict[str, ActivationSpec] = {
    "tanh": ActivationSpec("tanh", PfaffianFormat(2, 1, 1), DependenceCase.CASE1,
                           np.tanh, _tanh_deriv),
    "logsig": ActivationSpec("logsig", PfaffianFormat(2, 1, 1), DependenceCase.CASE1,
                             _logsig, _logsig_deriv),
    "arctan": ActivationSpec("arctan", PfaffianFormat(3, 1, 2), DependenceCase.CASE2,
                             np.arctan, _arctan_deriv),
}

_ALIASES = {"sigmoid": "logsig", "logistic": "logsig"}


def get_activation(name: str) -> ActivationSpec:
    key = _ALIASES.get(name, name)
    try:
        return ACTIVATIONS[key]
    except KeyError:
        raise KeyError(f"unknown activation {name!r}; known: {sorted(ACTIVATIONS)}") from None


@dataclass(frozen=True)
class Architecture:
    """Single-output feedforward network.

    ``hidden_widths`` lists n_1..n_{L-1}; ``output`` is the last-layer
    nonlinearity g, or None for a linear last layer.  With ``biases=False``
    every bias is pinned to zero and is not a trainable parameter.
    """

    n0: int
    hidden_widths: tuple[int, ...]
    activation: ActivationSpec = field(default_factory=lambda: ACTIVATIONS["tanh"])
    output: Optional[ActivationSpec] = None
    skip_connections: bool = False
    biases: bool = True

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(int(w) for w in self.hidden_widths))
        if self.n0 < 1:
            raise ValueError("n0 must be positive")
        if any(w < 1 for w in self.hidden_widths):
            raise ValueError("hidden widths must be positive")
        if self.skip_connections:
            hw = self.hidden_widths
            if any(a != b for a, b in zip(hw, hw[1:])):
                raise ValueError(
                    f"skip connections need equal consecutive hidden widths, got {hw}")

    @property
    def L(self) -> int:
        return len(self.hidden_widths) + 1

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.n0, *self.hidden_widths, 1)

    @property
    def is_linear_output(self) -> bool:
        return self.output is None

    def uniform_width(self) -> int:
        hw = set(self.hidden_widths)
        if len(hw) != 1:
            raise ValueError(f"hidden widths are not uniform: {self.hidden_widths}")
        return hw.pop()


@dataclass(frozen=True)
class LossSpec:
    kind: str = "MSE"
    l2_lambda: float = 0.0
    # "mean": (1/m) sum (y - f)^2 ; "half_sum": 1/2 sum (y - f)^2
    mse_convention: str = "mean"

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in ("MSE", "BCE"):
            raise ValueError(f"loss kind must be MSE or BCE, got {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not self.l2_lambda >= 0:
            raise ValueError("l2_lambda must be nonnegative")
        if self.mse_convention not in ("mean", "half_sum"):
            raise ValueError(f"unknown MSE convention {self.mse_convention!r}")


def check_loss_architecture(loss: LossSpec, arch: Architecture) -> None:
    if loss.kind == "BCE" and arch.is_linear_output:
        raise ValueError("BCE loss requires a nonlinear last layer")


def derivative_degree(fmt: PfaffianFormat, case: DependenceCase) -> int:
    """Degree of an activation's derivative as a polynomial over its chain."""
    if fmt.ell == 0:
        raise ValueError("degenerate chain (ell = 0): derivative degree undefined")
    if fmt.alpha < 1 or fmt.beta < 1:
        raise ValueError(f"derivative degree needs alpha >= 1 and beta >= 1, got {fmt}")
    base = fmt.beta + fmt.alpha - 1
    if DependenceCase(case) is DependenceCase.CASE1:
        return base
    return base + fmt.alpha * (fmt.beta + 1)


def _hidden_degree(arch: Architecture, d_sigma: int) -> int:
    return (d_sigma + 1) * (arch.L - 2) + d_sigma


def _require_depth(arch: Architecture, m: int) -> None:
    if arch.L < 2:
        raise ValueError(f"format theorems need L >= 2, got L = {arch.L}")
    if m < 1:
        raise ValueError(f"sample count must be >= 1, got {m}")


def loss_format_mse(arch: Architecture, sigma: ActivationSpec, m: int) -> PfaffianFormat:
    _require_depth(arch, m)
    d_sigma = derivative_degree(sigma.format, sigma.dependence_case)
    chain = sigma.format.ell * sum(arch.hidden_widths)
    alpha = _hidden_degree(arch, d_sigma)
    if arch.is_linear_output:
        return PfaffianFormat(alpha, 2 * (sigma.format.beta + 1), m * chain)
    g = arch.output
    d_g = derivative_degree(g.format, g.dependence_case)
    return PfaffianFormat(alpha + d_g + 1, 2 * g.format.beta, m * (chain + g.format.ell))


def loss_format_bce(arch: Architecture, sigma: ActivationSpec, m: int) -> PfaffianFormat:
    if arch.is_linear_output:
        raise ValueError("BCE format is only defined for a nonlinear last layer")
    _require_depth(arch, m)
    d_sigma = derivative_degree(sigma.format, sigma.dependence_case)
    chain = sigma.format.ell * sum(arch.hidden_widths)
    alpha = _hidden_degree(arch, d_sigma)
    g = arch.output
    if g.name == "logsig":
        # loss and sigma(f) join the chain; the sigmoid derivative has degree 2
        return PfaffianFormat(alpha + 3, 1, m * (chain + 1) + 1)
    d_g = derivative_degree(g.format, g.dependence_case)
    return PfaffianFormat(alpha + d_g + 3, 1, m * (chain + g.format.ell + 4))


def loss_format(arch: Architecture, loss: LossSpec, m: int,
                sigma: Optional[ActivationSpec] = None) -> PfaffianFormat:
    """Theorem-mode format of the (possibly regularized) loss."""
    check_loss_architecture(loss, arch)
    sigma = sigma or arch.activation
    if loss.kind == "MSE":
        fmt = loss_format_mse(arch, sigma, m)
    else:
        fmt = loss_format_bce(arch, sigma, m)
    if arch.skip_connections:
        fmt = apply_skip_connections(fmt)
    if loss.l2_lambda > 0:
        fmt = apply_l2(fmt)
    return fmt


COROLLARY_PAIRS = (("MSE", "linear"), ("MSE", "logsig"), ("BCE", "logsig"), ("BCE", "tanh"))


def _last_name(last) -> str:
    if last is None:
        return "linear"
    if isinstance(last, ActivationSpec):
        return last.name
    return _ALIASES.get(last, last)


def corollary_published_format(loss, last, L: int, h: int, m: int) -> PfaffianFormat:
    """The uniform-width tuples for tanh/logsig hidden layers, as tabulated.

    ``loss`` is a LossSpec or a kind string; ``last`` is "linear", an
    activation name, or an ActivationSpec.  The MSE/linear tuple carries
    alpha = 3(L-2), two less than the general theorem gives.
    """
    kind = loss.kind if isinstance(loss, LossSpec) else str(loss).upper()
    last = _last_name(last)
    if L < 2 or h < 1 or m < 1:
        raise ValueError(f"need L >= 2, h >= 1, m >= 1; got L={L}, h={h}, m={m}")
    if (kind, last) == ("MSE", "linear"):
        return PfaffianFormat(3 * (L - 2), 4, m * (L - 1) * h)
    if (kind, last) == ("MSE", "logsig"):
        return PfaffianFormat(3 * (L - 2) + 5, 2, m * (h * (L - 1) + 1))
    if (kind, last) == ("BCE", "logsig"):
        return PfaffianFormat(3 * (L - 2) + 5, 1, m * ((L - 1) * h + 1) + 1)
    if (kind, last) == ("BCE", "tanh"):
        return PfaffianFormat(3 * (L - 2) + 7, 1, m * ((L - 1) * h + 5))
    raise ValueError(f"no tabulated corollary for loss={kind}, last layer={last}")


def corollary_format(arch: Architecture, loss: LossSpec, m: int) -> PfaffianFormat:
    """Corollary-mode format for an architecture: uniform width, tanh/logsig hidden."""
    check_loss_architecture(loss, arch)
    if arch.activation.name not in ("tanh", "logsig"):
        raise ValueError(
            f"corollary mode needs tanh or logsig hidden activation, got {arch.activation.name}")
    fmt = corollary_published_format(loss, arch.output, arch.L, arch.uniform_width(), m)
    if arch.skip_connections:
        fmt = apply_skip_connections(fmt)
    if loss.l2_lambda > 0:
        fmt = apply_l2(fmt)
    return fmt


def apply_l2(fmt: PfaffianFormat) -> PfaffianFormat:
    """An l2 term adds a degree-2 monomial in the weights: only beta can move."""
    return PfaffianFormat(fmt.alpha, max(fmt.beta, 2), fmt.ell)


def apply_skip_connections(fmt: PfaffianFormat) -> PfaffianFormat:
    # additive skips keep chain length and derivative degrees
    return PfaffianFormat(fmt.alpha, fmt.beta, fmt.ell)


def total_params(arch: Architecture) -> int:
    widths = arch.widths
    extra = 1 if arch.biases else 0
    return sum(widths[l] * (widths[l - 1] + extra) for l in range(1, len(widths)))


def total_params_uniform(n0: int, h: int, L: int) -> int:
    """Closed form h^2 (L-2) + h (n0 + L) + 1 for uniform hidden width h."""
    return h * h * (L - 2) + h * (n0 + L) + 1
