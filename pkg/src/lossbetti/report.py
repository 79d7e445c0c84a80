"""Format -> bound -> sampling -> homology pipeline and its serialized report."""
from __future__ import annotations

import csv
import io
import json
import platform
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import ASSUMPTIONS, regime_summary, zell_bound
from .config import ExperimentConfig
from .pfaffian import (
    LossSpec,
    apply_l2,
    apply_skip_connections,
    corollary_format,
    loss_format,
    total_params,
)
from .topology import kernels
from .topology.homology import sweep_betti
from .topology.slices import (
    ParameterSlice,
    default_base_point,
    default_thresholds,
    sample_field,
)

HOLDS, FAILS, NOT_APPLICABLE = "holds", "fails", "not-applicable"


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: Exception):
        self.stage = stage
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")


@dataclass
class VerificationReport:
    formats: dict
    n_params: int
    bound: dict
    scope: str
    betti: list[dict]
    inequality: list[dict]
    invariance: dict
    regime: list[dict]
    provenance: dict
    assumptions: dict = field(default_factory=lambda: dict(ASSUMPTIONS))

    def verdicts(self) -> list[str]:
        out = [v["verdict"] for v in self.inequality]
        out += [v["verdict"] for v in self.invariance.values()]
        return out

    @property
    def all_hold(self) -> bool:
        return all(v in (HOLDS, NOT_APPLICABLE) for v in self.verdicts())

    def to_dict(self) -> dict:
        return {
            "formats": self.formats,
            "n_params": self.n_params,
            "bound": self.bound,
            "scope": self.scope,
            "betti": self.betti,
            "inequality": self.inequality,
            "invariance": self.invariance,
            "regime": self.regime,
            "provenance": self.provenance,
            "assumptions": self.assumptions,
            "overall": HOLDS if self.all_hold else FAILS,
        }


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:
        raise StageError(name, exc) from exc


def _formats(cfg: ExperimentConfig, loss: LossSpec, arch=None) -> dict:
    arch = arch or cfg.arch
    m = cfg.dataset.m
    theorem = loss_format(arch, loss, m)
    try:
        corollary = corollary_format(arch, loss, m)
    except ValueError:
        corollary = None
    return {"theorem": theorem, "corollary": corollary}


def _selected(cfg: ExperimentConfig, formats: dict):
    fmt = formats[cfg.mode]
    if fmt is None:
        raise ValueError("corollary mode needs uniform hidden width, tanh/logsig hidden "
                         "activation and a tabulated (loss, last layer) pair")
    return fmt


def _invariance(cfg: ExperimentConfig, n: int) -> dict:
    base_loss = replace(cfg.loss, l2_lambda=0.0)
    plain_arch = replace(cfg.arch, skip_connections=False)
    plain = _selected(cfg, _formats(cfg, base_loss, plain_arch))
    cap = cfg.exact_bit_cap
    b_plain = zell_bound(plain, n, cap)

    l2_fmt = apply_l2(plain)
    b_l2 = zell_bound(l2_fmt, n, cap)
    same = l2_fmt == plain and b_l2 == b_plain
    l2 = {
        "format_without": plain.to_dict(),
        "format_with": l2_fmt.to_dict(),
        "log2_without": b_plain.log2_value,
        "log2_with": b_l2.log2_value,
        "exact_equal": same,
    }
    if cfg.loss.kind == "MSE":
        l2["verdict"] = HOLDS if same else FAILS
    else:
        l2["verdict"] = NOT_APPLICABLE
        l2["note"] = ("BCE: l2 raises beta from 1 to 2 and changes the exact bound; "
                      "the invariance claim is read as asymptotic only")

    skip_fmt = apply_skip_connections(plain)
    skip_arch = replace(cfg.arch, skip_connections=True) if _skip_possible(cfg) else None
    skip = {
        "format_without": plain.to_dict(),
        "format_with": skip_fmt.to_dict(),
        "transform": "identity",
    }
    ok = skip_fmt == plain and zell_bound(skip_fmt, n, cap) == b_plain
    if skip_arch is not None:
        with_skip = _selected(cfg, _formats(cfg, base_loss, skip_arch))
        skip["architecture_format_with"] = with_skip.to_dict()
        ok = ok and with_skip == plain
    skip["verdict"] = HOLDS if ok else FAILS
    return {"l2": l2, "skip": skip}


def _skip_possible(cfg: ExperimentConfig) -> bool:
    hw = cfg.arch.hidden_widths
    return all(a == b for a, b in zip(hw, hw[1:]))


def build_slice(cfg: ExperimentConfig, n: int) -> ParameterSlice:
    if cfg.base_point is not None:
        base = np.asarray(cfg.base_point, dtype=np.float64)
        if base.size != n:
            raise ValueError(f"base_point has {base.size} entries, network has {n} parameters")
    else:
        base = default_base_point(n, cfg.seed)
    return ParameterSlice(
        tuple(a["index"] for a in cfg.axes),
        tuple((a["min"], a["max"]) for a in cfg.axes),
        tuple(a["count"] for a in cfg.axes),
        base,
    )


def run_verify(cfg: ExperimentConfig) -> VerificationReport:
    formats = _stage("format", _formats, cfg, cfg.loss)
    fmt = _stage("format", _selected, cfg, formats)
    n = total_params(cfg.arch)
    bound = _stage("bound", zell_bound, fmt, n, cfg.exact_bit_cap)

    slc = _stage("sampling", build_slice, cfg, n)
    field_ = _stage("sampling", sample_field, cfg.arch, cfg.dataset, cfg.loss, slc, cfg.workers)
    thresholds = default_thresholds(field_, cfg.quantiles, cfg.extra_thresholds)
    sweep = _stage("homology", sweep_betti, field_, thresholds, cfg.homology)

    betti_rows, inequality = [], []
    for c, bv in sweep:
        b = bv.padded(3)
        betti_rows.append({
            "c": c, "b0": b[0], "b1": b[1], "b2": b[2], "chi": bv.euler,
            "cell_counts": list(bv.cell_counts), "empty": bv.empty,
        })
        holds = bound.exceeds_or_equals(bv.total)
        inequality.append({
            "c": c, "measured": bv.total, "bound_log2": bound.log2_value,
            "verdict": HOLDS if holds else FAILS,
        })
    invariance = _stage("invariance", _invariance, cfg, n)

    regime = [
        {"variable": r.variable, "depth_class": r.depth_class,
         "asymptotic_class": r.asymptotic_class, "constant": r.constant}
        for r in regime_summary(max(cfg.arch.hidden_widths), cfg.arch.L, cfg.dataset.m)
    ]
    provenance = {
        "seed": cfg.seed,
        "base_point_source": "config" if cfg.base_point is not None else "seeded-uniform[-0.5,0.5]",
        "grid": {
            "axes": [dict(a) for a in cfg.axes],
            "base_point": [float(v) for v in slc.base_point],
        },
        "dataset": {"source": cfg.dataset_source, "m": cfg.dataset.m},
        "thresholds": {"quantiles": cfg.quantiles, "extra": list(cfg.extra_thresholds)},
        "mode": cfg.mode,
        "homology": cfg.homology,
        "transforms": {"skip_connections": "identity" if cfg.arch.skip_connections else None,
                       "l2": "beta -> max(beta, 2)" if cfg.loss.l2_lambda > 0 else None},
        "versions": {
            "lossbetti": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "kernel_backend": kernels.BACKEND,
        },
    }
    return VerificationReport(
        formats={k: (None if v is None else v.to_dict()) for k, v in formats.items()},
        n_params=n,
        bound=bound.to_dict(),
        scope="direct" if slc.dim >= n else "sectional",
        betti=betti_rows,
        inequality=inequality,
        invariance=invariance,
        regime=regime,
        provenance=provenance,
    )


CSV_COLUMNS = ("row", "c", "b0", "b1", "b2", "chi", "cells_0", "cells_1", "cells_2",
               "cells_3", "betti_sum", "bound_log2", "verdict")


def report_json(report: VerificationReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def report_csv(report: VerificationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row, ineq in zip(report.betti, report.inequality):
        cells = (row["cell_counts"] + [0, 0, 0, 0])[:4]
        writer.writerow(["threshold", repr(row["c"]), row["b0"], row["b1"], row["b2"],
                         row["chi"], *cells, ineq["measured"], repr(ineq["bound_log2"]),
                         ineq["verdict"]])
    worst = max((v["measured"] for v in report.inequality), default=0)
    writer.writerow(["summary", "", "", "", "", "", "", "", "", "", worst,
                     repr(report.bound["log2"]), HOLDS if report.all_hold else FAILS])
    return buf.getvalue()


def emit_report(report: VerificationReport, fmt: str, out_dir) -> Path:
    if fmt not in ("json", "csv"):
        raise ValueError(f"report format must be json or csv, got {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"report.{fmt}"
    text = report_json(report) if fmt == "json" else report_csv(report)
    path.write_text(text)
    return path
