"""Command-line front end.

Exit codes: 0 success (all verdicts hold or are not applicable), 1 a verdict
failed, 2 usage or configuration error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

from .bounds import (
    APPENDIX_PAIRS,
    DEFAULT_EXACT_BIT_CAP,
    SWEEP_COLUMNS,
    appendix_explicit_bound,
    sweep_rows,
    zell_bound,
)
from .config import ConfigError, parse_config
from .pfaffian import (
    COROLLARY_PAIRS,
    Architecture,
    LossSpec,
    PfaffianFormat,
    corollary_format,
    get_activation,
    loss_format,
    total_params,
)
from .report import StageError, build_slice, emit_report, run_verify
from .topology.homology import sweep_betti
from .topology.slices import default_thresholds, read_field, sample_field, write_field

EXIT_OK, EXIT_VERDICT, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    """'1,2,5' or '1-4' or '1-10:3' (start-stop:step) -> ints."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            span, _, step = part.partition(":")
            lo, hi = span.split("-")
            out.extend(range(int(lo), int(hi) + 1, int(step or 1)))
        elif part:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _pairs(text: str) -> list[tuple[str, str]]:
    pairs = []
    for item in text.split(","):
        kind, _, last = item.partition(":")
        pairs.append((kind.strip().upper(), last.strip() or "linear"))
    return pairs


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="experiment config (JSON)")
    p.add_argument("--out", help="output directory (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), dest="out_format")
    p.add_argument("--exact-bit-cap", type=int)
    p.add_argument("--mode", choices=("theorem", "corollary"))


def _add_network_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("network (used when --config is absent)")
    g.add_argument("--n0", type=int, default=1)
    g.add_argument("--widths", default="2", help="hidden widths n_1..n_{L-1}, e.g. 2,2")
    g.add_argument("--activation", default="tanh")
    g.add_argument("--last", default="linear", help="linear or an activation name")
    g.add_argument("--loss", default="MSE", choices=("MSE", "BCE"))
    g.add_argument("--l2", type=float, default=0.0)
    g.add_argument("--skip", action="store_true")
    g.add_argument("--m", type=int, default=1, help="sample count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lossbetti",
        description="Pfaffian formats, Betti bounds and measured Betti numbers of loss landscapes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("format", help="Pfaffian format of a loss")
    _add_common(p)
    _add_network_flags(p)

    p = sub.add_parser("bound", help="Betti-number bound for a format or network")
    _add_common(p)
    _add_network_flags(p)
    p.add_argument("--alpha", type=int)
    p.add_argument("--beta", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--n-params", type=int)

    p = sub.add_parser("landscape", help="sample the loss on the config's slice")
    _add_common(p)

    p = sub.add_parser("betti", help="Betti numbers of a field file's sublevel sets")
    _add_common(p)
    p.add_argument("--field", required=True, help="field file written by `landscape`")
    p.add_argument("--thresholds", help="comma-separated levels (default: quantiles)")
    p.add_argument("--quantiles", type=int, default=16)
    p.add_argument("--method", choices=("auto", "fast", "gf2"), default="auto")

    p = sub.add_parser("verify", help="full pipeline with verdicts")
    _add_common(p)

    p = sub.add_parser("sweep", help="log2 bound over a grid of (m, h, L, n0)")
    _add_common(p)
    p.add_argument("--m", default="1-10", dest="ms")
    p.add_argument("--h", default="1-4", dest="hs")
    p.add_argument("--L", default="2-5", dest="Ls")
    p.add_argument("--n0", default="1", dest="n0s")
    p.add_argument("--pairs", default=",".join(f"{k}:{l}" for k, l in COROLLARY_PAIRS))
    return parser


def _write(args, name: str, text: str) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _network_from(args):
    """(arch, loss, m, mode, cap) from --config if given, else from flags."""
    if args.config:
        cfg = parse_config(args.config)
        arch, loss, m = cfg.arch, cfg.loss, cfg.dataset.m
        mode, cap = cfg.mode, cfg.exact_bit_cap
    else:
        try:
            arch = Architecture(
                args.n0, tuple(_int_list(args.widths)), get_activation(args.activation),
                None if args.last == "linear" else get_activation(args.last),
                skip_connections=args.skip)
            loss = LossSpec(args.loss, args.l2)
        except (KeyError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        m, mode, cap = args.m, "theorem", DEFAULT_EXACT_BIT_CAP
    return arch, loss, m, args.mode or mode, args.exact_bit_cap or cap


def _formats(arch, loss, m):
    try:
        theorem = loss_format(arch, loss, m)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        corollary = corollary_format(arch, loss, m)
    except ValueError:
        corollary = None
    return theorem, corollary


def cmd_format(args) -> int:
    arch, loss, m, mode, _ = _network_from(args)
    theorem, corollary = _formats(arch, loss, m)
    _write(args, "format.json", _json({
        "theorem": theorem.to_dict(),
        "corollary": None if corollary is None else corollary.to_dict(),
        "n_params": total_params(arch),
        "mode": mode,
    }))
    return EXIT_OK


def cmd_bound(args) -> int:
    direct = [args.alpha, args.beta, args.ell, args.n_params]
    if any(v is not None for v in direct):
        if any(v is None for v in direct):
            raise UsageError("--alpha, --beta, --ell and --n-params go together")
        fmt = PfaffianFormat(args.alpha, args.beta, args.ell)
        res = zell_bound(fmt, args.n_params, args.exact_bit_cap or DEFAULT_EXACT_BIT_CAP)
        _write(args, "bound.json", _json({"format": fmt.to_dict(), "n_params": args.n_params,
                                          "bound": res.to_dict()}))
        return EXIT_OK
    arch, loss, m, mode, cap = _network_from(args)
    theorem, corollary = _formats(arch, loss, m)
    fmt = theorem if mode == "theorem" else corollary
    if fmt is None:
        raise UsageError("no tabulated corollary format for this network/loss")
    n = total_params(arch)
    doc = {"format": fmt.to_dict(), "mode": mode, "n_params": n,
           "bound": zell_bound(fmt, n, cap).to_dict(), "appendix": None}
    last = "linear" if arch.output is None else arch.output.name
    if (corollary is not None and arch.biases and loss.l2_lambda == 0
            and not arch.skip_connections and (loss.kind, last) in APPENDIX_PAIRS):
        doc["appendix"] = appendix_explicit_bound(
            loss, last, arch.n0, arch.uniform_width(), arch.L, m, cap).to_dict()
    _write(args, "bound.json", _json(doc))
    return EXIT_OK


def _need_config(args):
    if not args.config:
        raise UsageError(f"`{args.command}` needs --config")
    return parse_config(args.config)


def cmd_landscape(args) -> int:
    cfg = _need_config(args)
    n = total_params(cfg.arch)
    try:
        slc = build_slice(cfg, n)
        field = sample_field(cfg.arch, cfg.dataset, cfg.loss, slc, cfg.workers)
    except ValueError as exc:
        raise StageError("sampling", exc) from exc
    out = Path(args.out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_field(out / "field.txt", field)
    return EXIT_OK


def betti_csv(sweep) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["c", "b0", "b1", "b2", "chi", "cells_0", "cells_1", "cells_2", "cells_3"])
    for c, bv in sweep:
        cells = (list(bv.cell_counts) + [0, 0, 0, 0])[:4]
        w.writerow([repr(c), *bv.padded(3), bv.euler, *cells])
    return buf.getvalue()


def cmd_betti(args) -> int:
    field = read_field(args.field)
    if args.thresholds:
        thresholds = sorted(_float_list(args.thresholds))
    else:
        thresholds = default_thresholds(field, args.quantiles)
    _write(args, "betti.csv", betti_csv(sweep_betti(field, thresholds, args.method)))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _need_config(args)
    if args.mode:
        cfg = replace(cfg, mode=args.mode)
    if args.exact_bit_cap:
        cfg = replace(cfg, exact_bit_cap=args.exact_bit_cap)
    report = run_verify(cfg)
    emit_report(report, args.out_format or cfg.out_format, args.out or cfg.out_dir)
    return EXIT_OK if report.all_hold else EXIT_VERDICT


def cmd_sweep(args) -> int:
    try:
        rows = sweep_rows(_int_list(args.ms), _int_list(args.hs), _int_list(args.Ls),
                          _int_list(args.n0s), _pairs(args.pairs), args.mode or "corollary")
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({**row, "log2_bound": repr(row["log2_bound"])})
    _write(args, "sweep.csv", buf.getvalue())
    return EXIT_OK


COMMANDS = {
    "format": cmd_format, "bound": cmd_bound, "landscape": cmd_landscape,
    "betti": cmd_betti, "verify": cmd_verify, "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
