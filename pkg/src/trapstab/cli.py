"""Command-line front end: ``trapstab {sweep,boundaries,hill,trace,replay}``.

Every run writes its outputs plus a ``key=value`` manifest holding the
exact argument vector, so ``trapstab replay MANIFEST`` reproduces the
CSV files byte for byte.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import io
from .core import ParameterError
from .floquet import TOL_DEGENERATE, TOL_UNIT, trace_eigenvalues
from .hill import DEFAULT_ORDER, CurveTruncatedWarning, hill_boundary
from .integrator import IntegratorConfig, set_threads
from .multiscale import coupled_boundaries, decoupled_boundaries
from .sweep import GridSpec, sweep_grid

log = logging.getLogger("trapstab")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2

# flags whose values may begin with '-' (e.g. "--a -1:1.5")
_VALUE_FLAGS = {"--q", "--a", "--bracket", "--theta", "--alpha"}


def parse_range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
    try:
        lo_f, hi_f = float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if not lo_f < hi_f:
        raise argparse.ArgumentTypeError(f"range {text!r} must satisfy lo < hi")
    return lo_f, hi_f


def _join_values(argv: list[str]) -> list[str]:
    out = []
    it = iter(range(len(argv)))
    for i in it:
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            next(it, None)
        else:
            out.append(tok)
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, required=True, help="DC anisotropy ratio (> 0)")
    p.add_argument("--theta", type=float, default=0.0, help="RF/DC axis angle in degrees")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--prefix", default=None, help="output file stem (default: command name)")


def _integration(p: argparse.ArgumentParser) -> None:
    p.add_argument("--steps-per-period", type=int, default=2048)
    p.add_argument("--tol-unit", type=float, default=TOL_UNIT)
    p.add_argument("--tol-degenerate", type=float, default=TOL_DEGENERATE)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trapstab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"trapstab {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="classified (q, a) stability raster")
    _common(p)
    _integration(p)
    p.add_argument("--q", type=parse_range, default=(0.0, 2.0), metavar="LO:HI")
    p.add_argument("--a", type=parse_range, default=(-1.0, 1.5), metavar="LO:HI")
    p.add_argument("--nq", type=int, default=400)
    p.add_argument("--na", type=int, default=400)

    p = sub.add_parser("boundaries", help="multi-scale boundary curves")
    _common(p)
    p.add_argument("--q", type=parse_range, default=(0.0, 2.0), metavar="LO:HI")
    p.add_argument("--nq", type=int, default=201, help="number of q samples")
    p.add_argument("--decoupled", action="store_true", help="also emit the decoupled overlay")

    p = sub.add_parser("hill", help="natural-resonance boundaries from the Hill determinant")
    _common(p)
    p.add_argument("--nu", type=int, choices=(0, 1), required=True)
    p.add_argument("--order", type=int, default=DEFAULT_ORDER)
    p.add_argument("--bracket", type=parse_range, default=(-3.0, 2.0), metavar="LO:HI")
    p.add_argument("--q", type=parse_range, default=(0.0, 2.0), metavar="LO:HI")
    p.add_argument("--nq", type=int, default=201)
    p.add_argument("--scan-step", type=float, default=1e-3)

    p = sub.add_parser("trace", help="multiplier trajectories along a fixed-q line")
    _common(p)
    _integration(p)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--a", type=parse_range, required=True, metavar="LO:HI")
    p.add_argument("--steps", type=int, default=400)

    p = sub.add_parser("replay", help="rerun the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="output directory (default: as recorded)")
    return parser


def _q_samples(lo, hi, n):
    if n < 2:
        raise ParameterError("--nq must be >= 2")
    return np.linspace(lo, hi, n)


def _cfg(args) -> IntegratorConfig:
    return IntegratorConfig(steps_per_period=args.steps_per_period)


def run_sweep(args, out: Path, stem: str) -> tuple[dict, list[str], int]:
    spec = GridSpec(args.q[0], args.q[1], args.a[0], args.a[1], args.nq, args.na)
    cfg = _cfg(args)
    grid = sweep_grid(args.alpha, args.theta, spec, cfg, args.tol_unit, args.tol_degenerate)
    files = [out / f"{stem}.csv", out / f"{stem}.pgm"]
    io.write_grid_csv(files[0], grid)
    io.write_grid_pgm(files[1], grid)
    info = {"cell_errors": grid.n_errors, "steps_per_period": cfg.steps_per_period, "method": cfg.method.value}
    if grid.n_errors:
        log.warning("%d cells could not be classified", grid.n_errors)
    return info, [str(f) for f in files], EXIT_PARTIAL if grid.n_errors else EXIT_OK


def run_boundaries(args, out: Path, stem: str):
    qs = _q_samples(args.q[0], args.q[1], args.nq)
    curves = coupled_boundaries(args.alpha, args.theta, qs)
    if args.decoupled:
        curves += decoupled_boundaries(args.alpha, qs)
    path = out / f"{stem}.csv"
    io.write_curves_csv(path, curves)
    return {"curves": len(curves)}, [str(path)], EXIT_OK


def run_hill(args, out: Path, stem: str):
    qs = _q_samples(args.q[0], args.q[1], args.nq)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CurveTruncatedWarning)
        curves = hill_boundary(args.nu, args.alpha, args.theta, qs, args.order, args.bracket, args.scan_step)
    notes = [str(w.message) for w in caught if issubclass(w.category, CurveTruncatedWarning)]
    for n in notes:
        print(f"warning: {n}", file=sys.stderr)
    path = out / f"{stem}.csv"
    io.write_curves_csv(path, curves)
    info = {"curves": len(curves), "truncated": notes}
    return info, [str(path)], EXIT_PARTIAL if notes else EXIT_OK


def run_trace(args, out: Path, stem: str):
    cfg = _cfg(args)
    trace = trace_eigenvalues(args.alpha, args.theta, args.q, args.a, args.steps, cfg,
                              args.tol_unit, args.tol_degenerate)
    files = [out / f"{stem}.csv", out / f"{stem}_collisions.csv"]
    io.write_trace_csv(files[0], trace)
    io.write_collisions_csv(files[1], trace)
    info = {"collisions": len(trace.collisions), "steps_per_period": cfg.steps_per_period,
            "method": cfg.method.value}
    return info, [str(f) for f in files], EXIT_OK


RUNNERS = {"sweep": run_sweep, "boundaries": run_boundaries, "hill": run_hill, "trace": run_trace}


def _execute(argv: list[str], out_override: str | None = None) -> int:
    args = build_parser().parse_args(_join_values(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.command == "replay":
        manifest = io.read_manifest(args.manifest)
        recorded = json.loads(manifest["argv"])
        return _execute(recorded, out_override=args.out or manifest.get("out"))
    if out_override is not None:
        args.out = out_override
    threads = set_threads(int(os.environ.get("TRAPSTAB_THREADS", "0") or 0))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = args.prefix or args.command
    t0 = time.perf_counter()
    info, files, code = RUNNERS[args.command](args, out, stem)
    wall = time.perf_counter() - t0
    manifest_path = out / f"{stem}.manifest"
    params = {k: v for k, v in vars(args).items() if k not in ("out", "prefix", "verbose", "command")}
    entries = {
        "command": args.command,
        "tool": "trapstab",
        "version": __version__,
        "argv": json.dumps(argv),
        "out": str(out),
        **{f"param.{k}": v for k, v in params.items()},
        **{f"info.{k}": v for k, v in info.items()},
        "threads": threads,
        "wall_time_s": round(wall, 3),
        "outputs": ",".join(files),
        "exit_code": code,
    }
    io.write_manifest(manifest_path, entries)
    log.info("wrote %s", ", ".join(files + [str(manifest_path)]))
    return code


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return _execute(argv)
    except (ParameterError, ValueError, OSError, ArithmeticError) as exc:
        print(f"trapstab: error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
