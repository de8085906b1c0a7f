"""Local scaling of neighbour counts in the off-DC cloud, window by window.

For each radius window the script reports two slopes of log N(eps) against
log eps: the median over random references (what the estimator reports) and
the slope for the origin, around which the cloud's self-similar core sits.
"""

import argparse

import numpy as np

from fibspec import PHI, dft_fast, realize, word_by_substitution
from fibspec.fractal import DimensionParams, pointwise_dimension
from fibspec.render import spectrum_points

WINDOWS = [(1e-4, 1e-3), (1e-3, 1e-2), (1e-2, 1e-1), (3e-2, 3e-1)]


def origin_slope(pts, lo, hi, k=12):
    d = np.sort(np.hypot(pts[:, 0], pts[:, 1]))
    eps = np.geomspace(lo, hi, k)
    n = np.searchsorted(d, eps, side="right")
    keep = n > 0
    if keep.sum() < 3:
        return float("nan")
    return float(np.polyfit(np.log(eps[keep]), np.log(n[keep]), 1)[0])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iterations", type=int, nargs="+", default=[20, 22, 24, 25, 26])
    ap.add_argument("--references", type=int, default=100)
    args = ap.parse_args()

    print(f"{'m':>3} {'window':>18} {'origin':>8} {'quantile-fit':>13}")
    for m in args.iterations:
        pts = spectrum_points(dft_fast(realize(word_by_substitution(m), PHI, 1.0)))
        for lo, hi in WINDOWS:
            print(f"{m:>3} {f'[{lo:.0e}, {hi:.0e}]':>18} {origin_slope(pts, lo, hi):>8.3f}")
        est = pointwise_dimension(pts, DimensionParams(references=args.references))
        r0, r1 = est.radius_range
        print(f"{m:>3} {f'[{r0:.1e}, {r1:.1e}]':>18} {'':>8} {est.dimension:>13.3f}")


if __name__ == "__main__":
    main()
