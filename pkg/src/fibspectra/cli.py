"""Command-line surface: computation dispatch and artifact serialization.

Every command writes one data file (CSV by default, JSON mirror on
request) plus a `<output>.meta.json` sidecar recording the command, all
parameters, precision bits, library version, and wall time. Data files
are deterministic: identical configurations produce byte-identical
bytes, with reals rendered at ceil(bits*log10(2)) significant digits.
Exit codes: 0 success, 2 bad flags, 3 precondition violation, 4 search
found nothing in range, 5 internal assertion failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from .approximant_spectra import band_spectrum, sigma_cover, sturmian_band_spectrum
from .bounds_reference import bound_curve, transport_lower
from .errors import NotFoundError, PreconditionError, SpectraError
from .ids_analysis import gap_labels, holder_exclusion, holder_scan, ids_value
from .interval_sets import denseness_estimate, dim_estimate, thickness
from .precision import DOUBLE_BITS, PrecisionContext, format_real
from .sumset_analysis import (
    DEFAULT_SCAN_STEP,
    DEFAULT_TOL,
    count_components,
    cubic_spectrum,
    square_spectrum,
    thickness_threshold,
    transition_scan,
)
from .trace_dynamics import ContinuedFraction, TransferParams, escape_index, fib_trace_seq

EXIT_OK = 0
EXIT_BAD_FLAGS = 2
EXIT_PRECONDITION = 3
EXIT_NOT_FOUND = 4
EXIT_INTERNAL = 5

ENV_BITS = "FIBSPECTRA_BITS"


@dataclass
class RunConfig:
    """Validated run parameters plus the collected output rows."""

    command: str
    params: dict
    bits: int
    fmt: str
    output_path: str
    header: tuple = ()
    rows: list = field(default_factory=list)
    extra_meta: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK
    message: str = ""


def _parse_grid(text: str) -> list[float]:
    """Grid syntax: comma list, lin:lo:hi:n, or geom:lo:hi:n."""
    if text.startswith(("lin:", "geom:")):
        kind, lo_s, hi_s, n_s = text.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
        if n < 1:
            raise PreconditionError("grid needs at least one point")
        if n == 1:
            return [lo]
        if kind == "lin":
            step = (hi - lo) / (n - 1)
            return [lo + i * step for i in range(n)]
        if lo <= 0 or hi <= 0:
            raise PreconditionError("geometric grids need positive endpoints")
        ratio = (hi / lo) ** (1.0 / (n - 1))
        return [lo * ratio ** i for i in range(n)]
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _fmt(x, bits: int) -> str:
    if x is None:
        return ""
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    if isinstance(x, str):
        return x
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format_real(x, bits)


def _write_outputs(cfg: RunConfig, wall_time: float) -> None:
    rendered = [[_fmt(v, cfg.bits) for v in row] for row in cfg.rows]
    if cfg.fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cfg.header)
        writer.writerows(rendered)
        data = buf.getvalue()
    else:
        records = [dict(zip(cfg.header, row)) for row in rendered]
        data = json.dumps(records, indent=1, sort_keys=True) + "\n"
    with open(cfg.output_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(data)
    meta = {
        "command": cfg.command,
        "parameters": cfg.params,
        "precision_bits": cfg.bits,
        "version": __version__,
        "wall_time_seconds": round(wall_time, 6),
        "rows": len(cfg.rows),
    }
    meta.update(cfg.extra_meta)
    with open(cfg.output_path + ".meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _interval_rows(intervals) -> list:
    return [(lo, hi) for lo, hi in intervals]


# ---- per-command runners; each fills cfg.header/rows/extra_meta ----

def _run_trace(args, ctx: PrecisionContext, cfg: RunConfig) -> None:
    params = TransferParams(energy=args.energy, coupling=args.coupling)
    seq = fib_trace_seq(params, args.k, ctx)
    cfg.header = ("k", "half_trace")
    for k in range(-1, seq.max_index() + 1):
        cfg.rows.append((k, seq.x(k)))
    cfg.extra_meta["escape_index"] = escape_index(params, args.k, ctx)
    if seq.overflow_index is not None:
        cfg.extra_meta["overflow_index"] = seq.overflow_index


def _run_spectrum(args, ctx: PrecisionContext, cfg: RunConfig) -> None:
    cover = sigma_cover(args.k, args.coupling, ctx, method=args.method)
    lower = band_spectrum(args.k, args.coupling, ctx, method=args.method)
    upper = band_spectrum(args.k + 1, args.coupling, ctx, method=args.method)
    cfg.header = ("component_lo", "component_hi")
    cfg.rows = _interval_rows(cover)
    cfg.extra_meta.update(
        {
            "k": args.k,
            "components": len(cover),
            "band_counts": [lower.count, upper.count],
            "max_edge_residual": max(lower.max_residual(), upper.max_residual()),
            "method": [lower.method, upper.method],
        }
    )


def _run_sturmian(args, ctx: PrecisionContext, cfg: RunConfig) -> None:
    cf = ContinuedFraction(tuple(int(t) for t in args.quotients.split(",")))
    bs = sturmian_band_spectrum(cf, args.level, args.coupling, ctx)
    cfg.header = ("band_lo", "band_hi")
    cfg.rows = _interval_rows(bs.bands)
    cfg.extra_meta.update(
        {
            "level": args.level,
            "bands": bs.count,
            "max_edge_residual": bs.max_residual(),
        }
    )


def _run_sumset(args, ctx: PrecisionContext, cfg: RunConfig) -> None:
    if args.dim == 2:
        lam2 = args.coupling if args.coupling2 is None else args.coupling2
        s = square_spectrum(args.k, args.coupling, lam2, ctx)
    else:
        if args.coupling2 is not None:
            raise PreconditionError("--lambda2 applies only to --dim 2")
        s = cubic_spectrum(args.k, args.coupling, ctx)
    cfg.header = ("component_lo", "component_hi")
    cfg.rows = _interval_rows(s)
    cfg.extra_meta.update({"k": args.k, "dim": args.dim, "components": len(s)})


def _run_ids(args, ctx: PrecisionContext, cfg: RunConfig) -> None:
    grid = _parse_grid(args.energy_grid)
    cfg.header = ("energy", "ids")
    for e in grid:
        cfg.rows.append((e, ids_value(args.n, args.coupling, e)))


def _run_holder(args, ctx: PrecisionContext, cfg: RunConfig) -> None:
    value = holder_scan(args.n, args.coupling, args.delta)
    cfg.header = ("coupling", "exponent")
    cfg.rows = [(args.coupling, value)]
    cfg.extra_meta["exclusion_threshold"] = holder_exclusion(args.coupling)


def _run_dims(args, ctx: PrecisionContext, cfg: RunConfig) -> None:
    cover = sigma_cover(args.k, args.coupling, ctx, method=args.method)
    est = dim_estimate(cover, [float(e) for e in _parse_grid(args.eps_grid)])
    cfg.header = ("eps", "box_count", "dim_value")
    cfg.rows = [tuple(r) for r in est.rows]
    cfg.extra_meta.update(
        {
            "k": args.k,
            "dim_infimum": est.value,
            "argmin_eps": float(est.argmin_eps),
            "components": len(cover),
        }
    )


def _run_thickness(args, ctx: PrecisionContext, cfg: RunConfig) -> None:
    if (args.coupling is None) == (args.lambda_range is None):
        raise PreconditionError("pass exactly one of --lambda or --lambda-range")
    if args.coupling is not None:
        cover = sigma_cover(args.k, args.coupling, ctx)
        with ctx.activate():
            tau = float(thickness(cover))
            theta = float(denseness_estimate(cover))
        cfg.header = ("coupling", "thickness", "denseness_estimate")
        cfg.rows = [(args.coupling, tau, theta)]
        cfg.extra_meta["denseness_note"] = (
            "denseness is a finite-level estimate, not a certified bound"
        )
        return
    lo, hi = args.lambda_range
    lam = thickness_threshold(args.k, (lo, hi), args.tol, ctx)
    cfg.header = ("k", "lambda_star")
    cfg.rows = [(args.k, lam)]


def _run_transitions(args, ctx: PrecisionContext, cfg: RunConfig) -> None:
    res = transition_scan(
        args.k, args.dim, args.m, tuple(args.lambda_range),
        scan_step=args.scan_step, tol=args.tol, ctx=ctx,
    )
    cfg.extra_meta["trace"] = [
        [_fmt(l, cfg.bits), c] for l, c in res.trace
    ]
    cfg.header = (
        "k", "dim", "m", "lambda_star", "bracket_lo", "bracket_hi",
        "count_left", "count_right",
    )
    if not res.found:
        # keep the scan trace in the sidecar even when nothing crossed
        cfg.exit_code = EXIT_NOT_FOUND
        cfg.message = (
            f"no count transition past m={args.m} in {args.lambda_range}"
        )
        return
    cfg.rows = [
        (args.k, args.dim, args.m, res.lambda_star, res.bracket[0],
         res.bracket[1], res.count_left, res.count_right)
    ]


def _run_labels(args, ctx: PrecisionContext, cfg: RunConfig) -> None:
    labels = gap_labels(args.k, args.coupling, args.m_cap, ctx)
    cfg.header = ("gap_lo", "gap_hi", "ids", "m", "residual")
    for g in labels:
        m = "" if g.m is None else g.m
        cfg.rows.append((g.gap[0], g.gap[1], g.ids_value, m, g.residual))


def _run_bounds(args, ctx: PrecisionContext, cfg: RunConfig) -> None:
    if args.name == "transport_lower":
        if args.D is None:
            raise PreconditionError(
                "--D is required for transport_lower; the growth constant is "
                "not specified by theory and is never defaulted"
            )
        grid = _parse_grid(args.lambda_grid)
        cfg.header = ("coupling", "p", "value")
        for lam in grid:
            for p in _parse_grid(args.p_grid):
                cfg.rows.append((lam, p, transport_lower(lam, p, args.D)))
        return
    curve = bound_curve(args.name, _parse_grid(args.lambda_grid))
    cfg.header = ("coupling", "value")
    cfg.rows = list(curve.values)


def _sweep_counts(args, ctx: PrecisionContext):
    def one(lam: float):
        if args.dim == 1:
            return (lam, len(sigma_cover(args.k, lam, ctx)))
        return (lam, count_components(args.k, args.dim, lam, ctx))

    return ("coupling", "components"), one, _parse_grid(args.lambda_grid)


def _sweep_transitions(args, ctx: PrecisionContext):
    ks = [int(k) for k in args.k_list.split(",")]
    ms = [int(m) for m in args.m_list.split(",")]

    def one(km):
        k, m = km
        res = transition_scan(
            k, args.dim, m, tuple(args.lambda_range),
            scan_step=args.scan_step, tol=args.tol, ctx=ctx,
        )
        return (k, m, res.lambda_star)

    return ("k", "m", "lambda_star"), one, [(k, m) for k in ks for m in ms]


def _run_sweep(args, ctx: PrecisionContext, cfg: RunConfig) -> None:
    if args.task == "counts":
        header, fn, grid = _sweep_counts(args, ctx)
    else:
        header, fn, grid = _sweep_transitions(args, ctx)
    cfg.header = header + ("error",)
    if not grid:
        return

    def safe(point):
        try:
            return fn(point) + ("",)
        except SpectraError as exc:
            pad = (point,) if not isinstance(point, tuple) else point
            return pad + (None,) * (len(header) - len(pad)) + (str(exc),)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            cfg.rows = list(pool.map(safe, grid))
    else:
        cfg.rows = [safe(p) for p in grid]
    failures = sum(1 for r in cfg.rows if r[-1])
    cfg.extra_meta.update({"grid_points": len(grid), "failed_points": failures})


_RUNNERS = {
    "trace": _run_trace,
    "spectrum": _run_spectrum,
    "sturmian": _run_sturmian,
    "sumset": _run_sumset,
    "ids": _run_ids,
    "holder": _run_holder,
    "dims": _run_dims,
    "thickness": _run_thickness,
    "transitions": _run_transitions,
    "labels": _run_labels,
    "bounds": _run_bounds,
    "sweep": _run_sweep,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--precision-bits", type=int,
                   default=int(os.environ.get(ENV_BITS, DOUBLE_BITS)),
                   help="working precision; 53 = native doubles")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output-path", required=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fibspectra",
        description="Spectra and fractal statistics of Fibonacci/Sturmian "
                    "Schrödinger operators",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="half-trace orbit at one energy")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lambda", dest="coupling", type=float, required=True)
    p.add_argument("--energy", type=float, required=True)
    _add_common(p)

    p = sub.add_parser("spectrum", help="level-k cover of the 1D spectrum")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lambda", dest="coupling", type=float, required=True)
    p.add_argument("--method", choices=("auto", "dense", "hierarchical"),
                   default="auto")
    _add_common(p)

    p = sub.add_parser("sturmian", help="bands of a Sturmian convergent")
    p.add_argument("--quotients", required=True,
                   help="comma-separated continued-fraction coefficients")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--lambda", dest="coupling", type=float, required=True)
    _add_common(p)

    p = sub.add_parser("sumset", help="square/cubic sum-set spectrum")
    p.add_argument("--dim", type=int, choices=(2, 3), required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lambda", dest="coupling", type=float, required=True)
    p.add_argument("--lambda2", dest="coupling2", type=float, default=None)
    _add_common(p)

    p = sub.add_parser("ids", help="integrated density of states on a grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambda", dest="coupling", type=float, required=True)
    p.add_argument("--energy-grid", required=True,
                   help="comma list, lin:lo:hi:n, or geom:lo:hi:n")
    _add_common(p)

    p = sub.add_parser("holder", help="Hölder-exponent scan of the IDS")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambda", dest="coupling", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.025)
    _add_common(p)

    p = sub.add_parser("dims", help="box-count dimension estimate of a cover")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lambda", dest="coupling", type=float, required=True)
    p.add_argument("--eps-grid", default="geom:1e-2:1e-5:25")
    p.add_argument("--method", choices=("auto", "dense", "hierarchical"),
                   default="auto")
    _add_common(p)

    p = sub.add_parser("thickness", help="cover thickness or threshold search")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lambda", dest="coupling", type=float, default=None)
    p.add_argument("--lambda-range", type=float, nargs=2, default=None)
    p.add_argument("--tol", type=float, default=1e-7)
    _add_common(p)

    p = sub.add_parser("transitions", help="component-count transition search")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--dim", type=int, choices=(2, 3), required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--lambda-range", type=float, nargs=2, required=True)
    p.add_argument("--scan-step", type=float, default=DEFAULT_SCAN_STEP)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    _add_common(p)

    p = sub.add_parser("labels", help="gap labeling of a level-k spectrum")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lambda", dest="coupling", type=float, required=True)
    p.add_argument("--m-cap", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("bounds", help="closed-form bound curves")
    p.add_argument("--name", required=True)
    p.add_argument("--lambda-grid", required=True)
    p.add_argument("--p-grid", default="1,2,5,10",
                   help="moment grid, transport_lower only")
    p.add_argument("--D", type=float, default=None,
                   help="universal growth constant, transport_lower only")
    _add_common(p)

    p = sub.add_parser("sweep", help="parallel grid sweep")
    p.add_argument("--task", choices=("counts", "transitions"), required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--dim", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--lambda-grid", default=None)
    p.add_argument("--k-list", default=None)
    p.add_argument("--m-list", default=None)
    p.add_argument("--lambda-range", type=float, nargs=2, default=None)
    p.add_argument("--scan-step", type=float, default=DEFAULT_SCAN_STEP)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--threads", type=int, default=1)
    _add_common(p)

    return ap


def _effective_bits(args) -> int:
    bits = args.precision_bits
    if args.command in ("transitions", "thickness") and args.k > 12:
        # double precision visibly fails for deep levels here
        bits = max(bits, 128)
    return bits


def _validate_sweep(args) -> None:
    if args.task == "counts":
        if args.k is None or args.lambda_grid is None:
            raise PreconditionError("sweep counts needs --k and --lambda-grid")
    else:
        if not (args.k_list and args.m_list and args.lambda_range):
            raise PreconditionError(
                "sweep transitions needs --k-list, --m-list, --lambda-range"
            )
        if args.dim == 1:
            raise PreconditionError("sweep transitions needs --dim 2 or 3")
    if args.threads < 1:
        raise PreconditionError("threads must be >= 1")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            _validate_sweep(args)
        bits = _effective_bits(args)
        ctx = PrecisionContext(bits=bits)
        params = {
            k: v for k, v in sorted(vars(args).items())
            if k not in ("command",) and v is not None
        }
        cfg = RunConfig(
            command=args.command, params=params, bits=bits,
            fmt=args.format, output_path=args.output_path,
        )
        start = time.monotonic()
        _RUNNERS[args.command](args, ctx, cfg)
        _write_outputs(cfg, time.monotonic() - start)
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NotFoundError as exc:
        print(f"not found: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except SpectraError as exc:
        print(f"internal assertion failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if cfg.message:
        print(cfg.message, file=sys.stderr)
    return cfg.exit_code


if __name__ == "__main__":
    sys.exit(main())
