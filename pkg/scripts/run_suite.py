"""Run the eighteen-panel perturbation suite and print the distance table."""

import argparse
import logging
import time

from fibspec.config import load_config
from fibspec.experiments import run_figure4_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="out/suite")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--config")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    t0 = time.perf_counter()
    manifest = run_figure4_suite(args.outdir, seed=args.seed, cfg=load_config(args.config))
    print(f"{'panel':<6}{'perturbation':<40}{'n':>8}  distance")
    for p in manifest.panels:
        extra = f"  (ratio-normalized {p.ratio_normalized_distance:.3e})" if p.ratio_normalized_distance is not None else ""
        print(f"{p.panel_id:<6}{p.perturbation:<40}{p.chain_length:>8}  {p.spectral_distance_to_baseline:.4e}{extra}")
    print(f"done in {time.perf_counter() - t0:.1f}s -> {args.outdir}/manifest.json")


if __name__ == "__main__":
    main()
