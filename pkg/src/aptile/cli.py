"""Command-line entry point.

Exit status: 0 on success, 1 on a domain error (bad geometry, failed
verification, unreadable input), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys

import numpy as np

from . import __version__
from .cutproject import cp_points_1d, cp_points_octa, phys_array
from .diffraction import DEFAULT_THRESHOLD, numeric_intensity, peaks_1d, peaks_2d, peaks_to_csv
from .random_tiling import FlipError, mc_run, rtiling_from_patch
from .render_io import DocumentSpec, ParseError, export, import_, to_svg
from .robinson import HierarchyError, RobGrid, detect_hierarchy, search_grid, verify_grid
from .substitution import (
    AB, PENROSE, SEEDS, PatchError, fixed_point_1d, inflate_n,
)

SYSTEM_NAMES = {"silver1d": "silver1d", "ab": AB, "penrose": PENROSE}


class DomainError(Exception):
    pass


def _echo(cmd: str, **params) -> None:
    """Print the resolved parameters so that runs are reproducible from logs."""
    items = " ".join(f"{k}={v}" for k, v in params.items())
    print(f"aptile {cmd}: {items}", file=sys.stderr)


def _write(path: str | None, data: bytes | str) -> None:
    if isinstance(data, str):
        data = data.encode()
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def _read(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror}") from None
    return import_(raw)


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        env = os.environ.get("APTILE_THREADS")
        try:
            n = int(env) if env else 1
        except ValueError:
            raise DomainError(f"APTILE_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise DomainError("thread count must be at least 1")
    return n


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_inflate(args) -> int:
    system = SYSTEM_NAMES[args.system]
    if system == "silver1d":
        _echo("inflate", system=args.system, steps=args.steps)
        _write(args.out, export(fixed_point_1d(args.steps)))
        return 0
    seeds = {AB: ("square", "star"), PENROSE: ("sun",)}[system]
    seed = args.seed or seeds[0]
    if seed not in seeds:
        raise DomainError(f"seed {seed!r} is not available for {args.system}; choose from {seeds}")
    _echo("inflate", system=args.system, steps=args.steps, seed=seed)
    p = inflate_n(SEEDS[seed](), args.steps)
    if args.strip:
        p = p.strip_decorations()
    _write(args.out, export(p))
    return 0


def cmd_cutproject(args) -> int:
    if args.system == "silver1d":
        lo, hi = args.range if args.range else (-10.0, 10.0)
        _echo("cutproject", system="silver1d", range=f"{lo},{hi}")
        _write(args.out, export(cp_points_1d(lo, hi)))
        return 0
    radius = args.radius if args.radius is not None else 6.0
    _echo("cutproject", system="ab", radius=radius)
    _write(args.out, export(cp_points_octa(radius)))
    return 0


def _numeric_points(args):
    if args.points:
        pts = _read(args.points)
        if args.system == "silver1d":
            return np.array([float(q) for q, _ in pts])
        return phys_array(pts.as_array())
    if args.system == "silver1d":
        word = fixed_point_1d(args.n)
        return np.array([float(t.left) for t in word])
    return phys_array(cp_points_octa(args.radius).as_array())


def cmd_diffract(args) -> int:
    _echo("diffract", mode=args.mode, system=args.system, kmax=args.kmax, threshold=args.threshold,
          points=args.points or ("inflation n=%d" % args.n if args.system == "silver1d"
                                 else "cut-project radius=%g" % args.radius))
    if args.system == "silver1d":
        peaks = peaks_1d(args.kmax, args.threshold)
    else:
        peaks = peaks_2d(args.kmax, args.threshold)
    if args.mode == "analytic":
        _write(args.out, peaks_to_csv(peaks))
        return 0
    pts = _numeric_points(args)
    items = peaks.peaks if args.system == "ab" else peaks
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.system == "silver1d":
        idx = ["m", "n"]
        keys = [(p.m, p.n) for p in items]
        ks = [p.k_phys for p in items]
    else:
        idx = ["m1", "m2", "m3", "m4"]
        keys = [p.m for p in items]
        ks = [p.k_phys for p in items]
    if args.mode == "numeric":
        w.writerow([*idx, "intensity"])
        for key, k in zip(keys, ks):
            w.writerow([*key, f"{numeric_intensity(pts, k):.9g}"])
    else:
        w.writerow([*idx, "analytic", "numeric", "rel_error"])
        for key, k, p in zip(keys, ks, items):
            num = numeric_intensity(pts, k)
            w.writerow([*key, f"{p.intensity:.9g}", f"{num:.9g}", f"{abs(num - p.intensity) / p.intensity:.3g}"])
    _write(args.out, buf.getvalue())
    return 0


def cmd_flip_mc(args) -> int:
    if args.input:
        t = _read(args.input)
        src = args.input
    else:
        t = rtiling_from_patch(inflate_n(SEEDS["square"](), args.n).strip_decorations())
        src = f"stripped square inflation n={args.n}"
    _echo("flip-mc", steps=args.steps, seed=args.seed, input=src, sample_every=args.sample_every)
    out, stats = mc_run(t, args.steps, args.seed, sample_every=args.sample_every)
    if args.stats_out:
        _write(args.stats_out, stats.to_jsonl())
    _write(args.out, export(out))
    return 0


def cmd_robinson(args) -> int:
    if args.action == "search":
        _echo("robinson", action="search", width=args.width, height=args.height, order_seed=args.order_seed)
        res = search_grid(args.width, args.height, args.order_seed)
        if not res.found:
            raise DomainError(f"no legal {args.width}x{args.height} grid (nodes={res.nodes})")
        _write(args.out, export(res.grid))
        return 0
    if not args.input:
        raise DomainError(f"robinson {args.action} needs --in")
    _echo("robinson", action=args.action, input=args.input)
    g = _read(args.input)
    if not isinstance(g, RobGrid):
        raise DomainError("input is not a Robinson grid")
    if args.action == "verify":
        rep = verify_grid(g)
        lines = [f"{v.kind} {v.where}" for v in rep.violations]
        _write(args.out, ("ok\n" if rep.ok else "") + "".join(l + "\n" for l in lines))
        return 0 if rep.ok else 1
    squares = detect_hierarchy(g)
    out = "row,col,side\n" + "".join(f"{s.row0},{s.col0},{s.side}\n" for s in squares)
    _write(args.out, out)
    return 0


STYLES = {
    "plain": {},
    "decorated": {"show_arrows": True, "show_marks": True, "show_lines": True},
}


def cmd_render(args) -> int:
    _echo("render", input=args.input, style=args.style, unit=args.unit)
    x = _read(args.input)
    spec = DocumentSpec(unit_px=args.unit, **STYLES[args.style])
    _write(args.out, to_svg(x, spec))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aptile", description="Aperiodic tilings, point sets and diffraction.")
    ap.add_argument("--version", action="version", version=f"aptile {__version__}")
    ap.add_argument("--threads", type=int, default=None,
                    help="cap on worker threads (default: $APTILE_THREADS or 1)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inflate", help="iterate a substitution from a seed patch")
    p.add_argument("--system", choices=sorted(SYSTEM_NAMES), required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", help="seed patch: square or star (ab), sun (penrose)")
    p.add_argument("--strip", action="store_true", help="drop decorations from the result")
    p.add_argument("--out")
    p.set_defaults(func=cmd_inflate)

    p = sub.add_parser("cutproject", help="cut-and-project point sets")
    p.add_argument("--system", choices=["silver1d", "ab"], required=True)
    p.add_argument("--range", type=float, nargs=2, metavar=("XMIN", "XMAX"))
    p.add_argument("--radius", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cutproject)

    p = sub.add_parser("diffract", help="Bragg peaks, analytic or from finite sums")
    p.add_argument("--mode", choices=["analytic", "numeric", "compare"], default="analytic")
    p.add_argument("--system", choices=["silver1d", "ab"], required=True)
    p.add_argument("--kmax", type=float, required=True)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--points", help="aptile-v1 point set for numeric sums")
    p.add_argument("--n", type=int, default=9, help="inflation steps for the default 1D point set")
    p.add_argument("--radius", type=float, default=30.0, help="radius of the default 2D point set")
    p.add_argument("--out")
    p.set_defaults(func=cmd_diffract)

    p = sub.add_parser("flip-mc", help="simpleton-flip Monte Carlo")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--in", dest="input", help="aptile-v1 rtiling (default: stripped AB square inflation)")
    p.add_argument("--n", type=int, default=3, help="inflation steps for the default tiling")
    p.add_argument("--sample-every", type=int, default=1000)
    p.add_argument("--stats-out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_flip_mc)

    p = sub.add_parser("robinson", help="Robinson tile grids")
    p.add_argument("action", choices=["verify", "search", "hierarchy"])
    p.add_argument("--in", dest="input")
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--height", type=int, default=8)
    p.add_argument("--order-seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_robinson)

    p = sub.add_parser("render", help="SVG from an aptile-v1 document")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--style", choices=sorted(STYLES), default="plain")
    p.add_argument("--unit", type=float, default=40.0, help="pixels per unit edge")
    p.add_argument("--out")
    p.set_defaults(func=cmd_render)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.threads = _threads(args)
        if getattr(args, "steps", 0) is not None and getattr(args, "steps", 0) < 0:
            raise DomainError("--steps must be non-negative")
        return args.func(args)
    except (DomainError, ParseError, PatchError, FlipError, HierarchyError, ValueError) as exc:
        print(f"aptile: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
