"""Betti-number upper bounds for sublevel sets of Pfaffian losses.

The bound on the sum of Betti numbers of a semi-Pfaffian set cut out by a
single sign condition is

    2^(ell (ell - 1) / 2) * (n beta + min(n, ell) alpha)^(n + ell)

up to an unstated multiplicative constant, which is fixed to 1 here.  Exact
values are Python integers; very large ones are left in log2 form only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .pfaffian import (
    ACTIVATIONS,
    COROLLARY_PAIRS,
    Architecture,
    LossSpec,
    PfaffianFormat,
    _last_name,
    corollary_published_format,
    loss_format,
    total_params_uniform,
)

try:
    import gmpy2
except ImportError:  # pragma: no cover
    gmpy2 = None

DEFAULT_EXACT_BIT_CAP = 10_000_000

ASSUMPTIONS = {
    "s": 1,
    "n_prime": "n_params",
    "big_O_constant": 1,
    "note": "upper bound up to the theorem's unstated constant; s = 1 sign condition",
}


@dataclass(frozen=True)
class BoundResult:
    exact: Optional[int]
    log2_value: float
    base: int
    exponent: int
    two_power_exponent: int
    n_params: int
    suppressed: bool = False
    assumptions: dict = field(default_factory=lambda: dict(ASSUMPTIONS), compare=False)

    def exceeds_or_equals(self, value: int) -> bool:
        """True when this bound is >= a measured nonnegative integer."""
        if self.exact is not None:
            return self.exact >= value
        if value <= 0:
            return True
        return self.log2_value >= math.log2(value)

    def to_dict(self) -> dict:
        assumptions = dict(self.assumptions)
        assumptions["n_prime"] = self.n_params
        return {
            "exact": None if self.exact is None else int_to_decimal(self.exact),
            "log2": self.log2_value,
            "base": self.base,
            "exponent": self.exponent,
            "two_power_exponent": self.two_power_exponent,
            "exact_suppressed": self.suppressed,
            "assumptions": assumptions,
        }


def int_to_decimal(value: int) -> str:
    # str() on huge ints trips the interpreter's digit limit
    if gmpy2 is not None:
        return gmpy2.mpz(value).digits(10)
    return str(value)


def _big_pow(base: int, exponent: int) -> int:
    if gmpy2 is not None:
        return int(gmpy2.mpz(base) ** exponent)
    return base ** exponent


def bound_from_parts(two_power_exponent: int, base: int, exponent: int, n_params: int,
                     exact_bit_cap: int = DEFAULT_EXACT_BIT_CAP) -> BoundResult:
    """Evaluate 2^T * base^E, materializing the integer only under the bit cap."""
    if exact_bit_cap < 1:
        raise ValueError("exact_bit_cap must be positive")
    if base == 0:
        return BoundResult(0, -math.inf, 0, exponent, two_power_exponent, n_params)
    log2_value = two_power_exponent + exponent * math.log2(base)
    exact = None
    suppressed = True
    if log2_value < exact_bit_cap:
        exact = _big_pow(base, exponent) << two_power_exponent
        suppressed = exact.bit_length() > exact_bit_cap
        if suppressed:
            exact = None
    return BoundResult(exact, log2_value, base, exponent, two_power_exponent, n_params,
                       suppressed)


def zell_bound(fmt: PfaffianFormat, n_params: int,
               exact_bit_cap: int = DEFAULT_EXACT_BIT_CAP) -> BoundResult:
    if n_params < 1:
        raise ValueError(f"n_params must be >= 1, got {n_params}")
    base = n_params * fmt.beta + min(n_params, fmt.ell) * fmt.alpha
    return bound_from_parts(fmt.ell * (fmt.ell - 1) // 2, base, n_params + fmt.ell,
                            n_params, exact_bit_cap)


APPENDIX_PAIRS = (("MSE", "linear"), ("MSE", "logsig"), ("BCE", "logsig"))


def appendix_explicit_bound(loss, last, n0: int, h: int, L: int, m: int,
                            exact_bit_cap: int = DEFAULT_EXACT_BIT_CAP,
                            literal: bool = False) -> BoundResult:
    """Closed-form bounds in (n0, h, L, m) for the uniform-width tanh/logsig setting.

    For MSE with a sigmoid last layer the closed-form expressions disagree with
    the general bound applied to the corollary format (the 2-exponent uses
    ell (ell + 1), the outer exponent ends in +2 instead of + m + 1, and the
    shallow form uses ell = 2mh with a base of 9(h(2 + n0) + 1)).  By default
    that pair keeps the closed-form base g but takes the exponents implied by its
    own chain length; ``literal=True`` returns them unchanged.
    """
    kind = loss.kind if isinstance(loss, LossSpec) else str(loss).upper()
    last = _last_name(last)
    if (kind, last) not in APPENDIX_PAIRS:
        raise ValueError(f"no explicit appendix bound for loss={kind}, last layer={last}")
    if m < 1 or h < 1 or n0 < 1 or L < 2:
        raise ValueError(f"need m, h, n0 >= 1 and L >= 2; got m={m}, h={h}, n0={n0}, L={L}")

    n = h * h * (L - 2) + h * (L + n0) + 1
    shallow = L == 2

    if (kind, last) == ("MSE", "linear"):
        if shallow:
            t = m * h * (m * h - 1) // 2
            base = 4 * h * (2 + n0) + 4
            exponent = h * (2 + n0 + m) + 1
        else:
            ell = m * (L - 1) * h
            t = ell * (ell - 1) // 2
            base = 4 * n + 3 * (L - 2) * min(n, ell)
            exponent = h * h * (L - 2) + h * (L + n0 + m * (L - 1)) + 1
    elif (kind, last) == ("BCE", "logsig"):
        if shallow:
            k = m * (h + 1)
            t = (k + 1) * k // 2
            base = h * (n0 + 2) + 1 + 5 * min(h * (n0 + 2) + 1, k + 1)
            exponent = h * (m + n0 + 2) + m + 2
        else:
            k = m * ((L - 1) * h + 1)
            t = (k + 1) * k // 2
            base = n + (3 * (L - 2) + 5) * min(n, k + 1)
            exponent = h * (m * (L - 1) + n0 + 2 + (h + 1) * (L - 2)) + m + 2
    else:
        k = m * (h * (L - 1) + 1)
        if literal and shallow:
            t = 2 * m * h * (2 * m * h - 1) // 2
            base = 9 * h * (2 + n0) + 9
            exponent = h * (2 + n0 + 2 * m) + 1
        elif literal:
            t = k * (k + 1) // 2
            base = 2 * n + (3 * (L - 2) + 5) * min(n, k)
            exponent = h * h * (L - 2) + h * (L + n0 + m * (L - 1)) + 2
        else:
            t = k * (k - 1) // 2
            base = 2 * n + (3 * (L - 2) + 5) * min(n, k)
            exponent = h * h * (L - 2) + h * (L + n0 + m * (L - 1)) + m + 1
    return bound_from_parts(t, base, exponent, n, exact_bit_cap)


@dataclass(frozen=True)
class RegimeLabel:
    variable: str
    depth_class: str
    asymptotic_class: str
    constant: Optional[str] = None


def regime_summary(h: int, L: int, m: int) -> list[RegimeLabel]:
    """Asymptotic growth classes of the bound, by variable, for this depth."""
    if L < 2:
        raise ValueError(f"need L >= 2, got {L}")
    if L >= 3:
        return [
            RegimeLabel("m", "Deep", "κ^{O(m²)}", "κ1 > 2"),
            RegimeLabel("h", "Deep", "O(h²)^{O(h²)}"),
            RegimeLabel("L", "Deep", "2^{O(L²)}O(L²)^{O(L)}"),
        ]
    return [
        RegimeLabel("m", "Shallow", "κ^{O(m²)}", "κ2 > 2"),
        RegimeLabel("h", "Shallow", "O(h)^{O(h)}"),
    ]


SWEEP_COLUMNS = ("m", "h", "L", "n0", "loss", "last", "mode", "alpha", "beta", "ell",
                 "n_params", "log2_bound")


def sweep_rows(ms: Iterable[int], hs: Iterable[int], Ls: Iterable[int], n0s: Iterable[int],
               pairs: Iterable[tuple[str, str]] = COROLLARY_PAIRS, mode: str = "corollary",
               hidden: str = "tanh") -> list[dict]:
    """One row per (m, h, L, n0, loss, last) with the log2 bound (no big integers)."""
    if mode not in ("corollary", "theorem"):
        raise ValueError(f"mode must be corollary or theorem, got {mode!r}")
    rows = []
    for kind, last in pairs:
        for L in Ls:
            for h in hs:
                for n0 in n0s:
                    n = total_params_uniform(n0, h, L)
                    for m in ms:
                        if mode == "corollary":
                            fmt = corollary_published_format(kind, last, L, h, m)
                        else:
                            arch = Architecture(
                                n0, (h,) * (L - 1), ACTIVATIONS[hidden],
                                None if last == "linear" else ACTIVATIONS[last])
                            fmt = loss_format(arch, LossSpec(kind), m)
                        res = zell_bound(fmt, n, exact_bit_cap=1)
                        rows.append({
                            "m": m, "h": h, "L": L, "n0": n0, "loss": kind, "last": last,
                            "mode": mode, "alpha": fmt.alpha, "beta": fmt.beta,
                            "ell": fmt.ell, "n_params": n, "log2_bound": res.log2_value,
                        })
    return rows
