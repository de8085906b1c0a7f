"""Iteration sweep: scale, scale ratio, orientation and dimension per iteration."""

import argparse
import logging

from fibspec.config import load_config
from fibspec.experiments import run_iteration_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("m_start", type=int, nargs="?", default=20)
    ap.add_argument("m_end", type=int, nargs="?", default=26)
    ap.add_argument("--outdir", default="out/sweep")
    ap.add_argument("--config")
    ap.add_argument("--dimension-max", type=int, default=26, help="skip the dimension fit above this iteration")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    rows = run_iteration_sweep(args.m_start, args.m_end, args.outdir, load_config(args.config),
                               dimension_max_iteration=args.dimension_max)
    fmt = lambda v: "" if v is None else f"{v:.4f}"  # noqa: E731
    print(f"{'m':>3} {'F(m)':>9} {'scale':>8} {'ratio':>7} {'skew':>8} {'dim':>7}")
    for r in rows:
        print(f"{r.m:>3} {r.fib_m:>9} {fmt(r.scale):>8} {fmt(r.scale_ratio):>7} "
              f"{fmt(r.orientation):>8} {fmt(r.dimension):>7}")


if __name__ == "__main__":
    main()
