"""Command-line entry point.

Exit codes: 0 success, 2 usage/config, 3 input parse, 4 precondition, 5 I/O.
Every command prints a ``config_hash=<sha256>`` line first.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from fibspec.config import Config, ConfigError, load_config
from fibspec.dft import NAIVE_LIMIT, dft_fast, dft_naive, read_spectrum, write_spectrum
from fibspec.errors import DomainError, ParseError, SingularFitError
from fibspec.fibchain import (
    PHI,
    SymbolWord,
    fibonacci_number,
    fmt17,
    read_chain_file,
    realize,
    word_by_floor_formula,
    word_by_substitution,
    write_chain_csv,
    write_chain_file,
)
from fibspec.fractal import DimensionParams, cloud_stats, pointwise_dimension
from fibspec.render import (
    MANDELBROT_WINDOW,
    cardioid_alignment,
    mandelbrot_mask,
    render_mask,
    render_overlay,
    render_scatter,
    spectrum_points,
)

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_PRECONDITION, EXIT_IO = 0, 2, 3, 4, 5


def _echo_hash(cfg: Config, args: argparse.Namespace) -> None:
    # global flags are already folded into cfg
    skip = {"func", "config", "seed", "workers", "verbose"}
    extra = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k not in skip}
    print(f"config_hash={cfg.hash(**extra)}")


def _load_points(path) -> np.ndarray:
    """Off-DC points of a spectrum file, or raw ``x,y`` CSV points."""
    path = Path(path)
    head = path.read_bytes()[:16]
    if head.startswith(b"x,y"):
        try:
            return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except ValueError as exc:
            raise ParseError(f"{path}: malformed x,y CSV") from exc
    spec = read_spectrum(path)
    if spec.n < 2:
        return np.empty((0, 2))
    return spectrum_points(spec)


def _word_for(args) -> SymbolWord:
    if args.iteration is not None:
        if args.method == "floor":
            return word_by_floor_formula(fibonacci_number(args.iteration))
        return word_by_substitution(args.iteration)
    n = args.length
    if args.method == "floor":
        return word_by_floor_formula(n)
    if n < 1:
        raise DomainError("length must be >= 1")
    m = 1
    while fibonacci_number(m) < n:
        m += 1
    word = word_by_substitution(max(m, 2))
    return SymbolWord(word.symbols[:n], word.iteration if len(word) == n else None)


def cmd_generate(args, cfg: Config) -> int:
    word = _word_for(args)
    write_chain_file(args.out, word, args.L, args.S)
    if args.csv:
        write_chain_csv(args.csv, realize(word, args.L, args.S))
    print(f"length={len(word)} L={word.count('L')} S={word.count('S')}")
    return EXIT_OK


def cmd_transform(args, cfg: Config) -> int:
    word, L, S = read_chain_file(args.chain_file)
    try:
        chain = realize(word, L, S)
    except DomainError as exc:
        raise ParseError(f"{args.chain_file}: {exc}") from exc
    spec = dft_naive(chain) if args.naive else dft_fast(chain)
    write_spectrum(args.out, spec)
    energy = float(np.sum(chain.values**2))
    residual = abs(float(np.sum(np.abs(spec.coefficients) ** 2)) - energy) / energy
    print(f"n={spec.n} parseval_residual={fmt17(residual)}")
    if args.check:
        if spec.n > NAIVE_LIMIT:
            raise DomainError(f"--check needs n <= {NAIVE_LIMIT}")
        other = dft_fast(chain) if args.naive else dft_naive(chain)
        dev = float(np.max(np.abs(spec.coefficients - other.coefficients)))
        bound = 1e-9 * float(np.sum(np.abs(chain.values)))
        print(f"max_abs_fast_minus_naive={fmt17(dev)} bound={fmt17(bound)} ok={dev <= bound}")
    return EXIT_OK


def cmd_dimension(args, cfg: Config) -> int:
    pts = _load_points(args.file)
    params = DimensionParams(
        references=args.references or cfg.dim_references,
        radii=args.radii or cfg.dim_radii,
        quantile_lo=args.quantile_lo or cfg.dim_quantile_lo,
        quantile_hi=args.quantile_hi or cfg.dim_quantile_hi,
        seed=cfg.seed,
    )
    est = pointwise_dimension(pts, params, workers=cfg.workers)
    print(est.to_json())
    return EXIT_OK


def cmd_stats(args, cfg: Config) -> int:
    stats = cloud_stats(_load_points(args.file), args.quantile or cfg.stats_quantile)
    print(json.dumps(stats.to_dict(), indent=2))
    return EXIT_OK


def cmd_render(args, cfg: Config) -> int:
    spec_in = read_spectrum(args.file)
    include_dc = args.include_dc or cfg.include_dc
    pts = spectrum_points(spec_in, include_dc)
    xr, yr = args.xrange, args.yrange
    if xr is None and yr is None and cfg.plot_frame == "cardioid" and len(pts) >= 2:
        from fibspec.experiments import frame_ranges

        xr, yr = frame_ranges(pts, cfg)
    c = cfg.with_overrides(plot_width=args.width, plot_height=args.height, point_radius=args.point_radius,
                           include_dc=include_dc)
    render_scatter(pts, c.plot_spec(tuple(xr) if xr else None, tuple(yr) if yr else None), args.out)
    print(f"wrote {args.out} points={len(pts)}")
    return EXIT_OK


def cmd_mandelbrot(args, cfg: Config) -> int:
    xr = tuple(args.xrange or MANDELBROT_WINDOW[0])
    yr = tuple(args.yrange or MANDELBROT_WINDOW[1])
    c = cfg.with_overrides(plot_width=args.width, plot_height=args.height)
    spec = c.plot_spec(xr, yr)
    mask = mandelbrot_mask(xr, yr, spec.width_px, spec.height_px, args.max_iter)
    if args.overlay:
        pts = _load_points(args.overlay)
        if args.align:
            alignment = tuple(args.align)
        else:
            alignment = cardioid_alignment(pts)
        render_overlay(pts, mask, spec, args.out, alignment)
        print(f"wrote {args.out} alignment={' '.join(fmt17(v) for v in alignment)}")
    else:
        render_mask(mask, spec, args.out)
        print(f"wrote {args.out} members={int(mask.sum())}")
    return EXIT_OK


def cmd_suite(args, cfg: Config) -> int:
    from fibspec.experiments import run_figure4_suite

    manifest = run_figure4_suite(args.outdir, cfg=cfg)
    for p in manifest.panels:
        print(f"panel {p.panel_id} {p.perturbation} n={p.chain_length} "
              f"distance={fmt17(p.spectral_distance_to_baseline)}")
    print(f"manifest {Path(args.outdir) / 'manifest.json'}")
    return EXIT_OK


def cmd_sweep(args, cfg: Config) -> int:
    from fibspec.experiments import run_iteration_sweep

    rows = run_iteration_sweep(args.m_start, args.m_end, args.outdir, cfg)
    for r in rows:
        print(f"m={r.m} n={r.fib_m} scale={r.scale} ratio={r.scale_ratio} "
              f"orientation={r.orientation} dimension={r.dimension}")
    print(f"table {Path(args.outdir) / 'sweep.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    # accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=argparse.SUPPRESS, help="key = value config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="global seed (overrides config and FIBSPEC_SEED)")
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    ap = argparse.ArgumentParser(prog="fibspec", description=__doc__.splitlines()[0], parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    g = sub.add_parser("generate", help="write a Fibonacci chain file")
    which = g.add_mutually_exclusive_group(required=True)
    which.add_argument("--iteration", "-m", type=int)
    which.add_argument("--length", "-n", type=int)
    g.add_argument("--method", choices=("subst", "floor"), default="subst")
    g.add_argument("--L", type=float, default=PHI)
    g.add_argument("--S", type=float, default=1.0)
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--csv", type=Path, help="also export index,value CSV")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("transform", help="chain file -> spectrum (.csv or .bin)")
    t.add_argument("chain_file", type=Path)
    t.add_argument("--out", type=Path, required=True)
    t.add_argument("--naive", action="store_true", help="direct summation (n <= 5000)")
    t.add_argument("--check", action="store_true", help="compare fast and naive transforms")
    t.set_defaults(func=cmd_transform)

    d = sub.add_parser("dimension", help="pointwise dimension of a spectrum or x,y cloud")
    d.add_argument("file", type=Path)
    d.add_argument("--references", type=int)
    d.add_argument("--radii", type=int)
    d.add_argument("--quantile-lo", type=float)
    d.add_argument("--quantile-hi", type=float)
    d.set_defaults(func=cmd_dimension)

    s = sub.add_parser("stats", help="cloud scale and orientation")
    s.add_argument("file", type=Path)
    s.add_argument("--quantile", type=float)
    s.set_defaults(func=cmd_stats)

    r = sub.add_parser("render", help="scatter plot of a spectrum (.svg or .ppm)")
    r.add_argument("file", type=Path)
    r.add_argument("--out", type=Path, required=True)
    r.add_argument("--width", type=int)
    r.add_argument("--height", type=int)
    r.add_argument("--point-radius", type=float)
    r.add_argument("--xrange", type=float, nargs=2)
    r.add_argument("--yrange", type=float, nargs=2)
    r.add_argument("--include-dc", action="store_true")
    r.set_defaults(func=cmd_render)

    mb = sub.add_parser("mandelbrot", help="Mandelbrot mask, optionally overlaid with a spectrum")
    mb.add_argument("--out", type=Path, required=True)
    mb.add_argument("--xrange", type=float, nargs=2)
    mb.add_argument("--yrange", type=float, nargs=2)
    mb.add_argument("--width", type=int)
    mb.add_argument("--height", type=int)
    mb.add_argument("--max-iter", type=int, default=100)
    mb.add_argument("--overlay", type=Path, help="spectrum or x,y file drawn on top")
    mb.add_argument("--align", type=float, nargs=3, metavar=("SCALE", "TX", "TY"))
    mb.set_defaults(func=cmd_mandelbrot)

    su = sub.add_parser("suite", help="eighteen-panel perturbation suite")
    su.add_argument("--outdir", type=Path, default=None)
    su.set_defaults(func=cmd_suite)

    sw = sub.add_parser("sweep", help="iteration sweep")
    sw.add_argument("m_start", type=int)
    sw.add_argument("m_end", type=int)
    sw.add_argument("--outdir", type=Path, default=None)
    sw.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    for name, default in (("config", None), ("seed", None), ("workers", None), ("verbose", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config).with_overrides(seed=args.seed, workers=args.workers)
        if getattr(args, "outdir", "unset") is None:
            args.outdir = Path(cfg.output_dir)
        _echo_hash(cfg, args)
        return args.func(args, cfg)
    except ConfigError as exc:
        code, msg = EXIT_USAGE, str(exc)
    except ParseError as exc:
        code, msg = EXIT_PARSE, str(exc)
    except (DomainError, SingularFitError) as exc:
        code, msg = EXIT_PRECONDITION, str(exc)
    except OSError as exc:
        code, msg = EXIT_IO, str(exc)
    print(f"error: {msg}", file=sys.stderr)
    return code

if __name__ == "__main__":
    sys.exit(main())
