"""Iteration sweep and the eighteen-panel perturbation suite, written to disk."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from fibspec.config import Config
from fibspec.errors import DomainError
from fibspec.dft import Spectrum, dft_fast, write_spectrum_csv
from fibspec.fibchain import PHI, Chain, Perturbation, fibonacci_number, fmt17, perturb, realize, word_by_substitution
from fibspec.fractal import cloud_stats, pointwise_dimension, spectral_distance
from fibspec.render import PlotSpec, render_scatter, spectrum_points

log = logging.getLogger(__name__)

MANIFEST_SCHEMA = "fibspec.suite-manifest"
MANIFEST_VERSION = 1
PANEL_IDS = tuple("abcdefghijklmnopqr")


def panel_seed(seed: int, panel_id: str) -> int:
    """Per-panel 64-bit seed: first 8 bytes (little-endian) of sha256("<seed>:<panel_id>")."""
    digest = hashlib.sha256(f"{seed}:{panel_id}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")


def suite_perturbations(seed: int) -> dict[str, Perturbation]:
    P = Perturbation
    return {
        "a": P.truncate_head(1),
        "b": P.truncate_head(2),
        "c": P.truncate_head(3),
        "d": P.truncate_head(6),
        "e": P.truncate_head(7),
        "f": P.zero_first(),
        "g": P.identity(),
        "h": P.truncate_tail(1),
        "i": P.truncate_tail(2),
        "j": P.truncate_tail(46367),
        "k": P.truncate_tail(46368),
        "l": P.replace_first_l(),
        "m": P.flip_last_two(),
        "n": P.scramble_tail(5, panel_seed(seed, "n")),
        "o": P.scramble_tail(10, panel_seed(seed, "o")),
        "p": P.scramble_tail(100, panel_seed(seed, "p")),
        "q": P.identity(),
        "r": P.set_ratio(2.0),
    }


def ratio_factor(chain: Chain, base: Chain) -> float:
    """Off-DC scaling between two realizations of one word: (L'-S')/(L-S)."""
    return (chain.long_length - chain.short_length) / (base.long_length - base.short_length)


def created_at() -> str:
    """SOURCE_DATE_EPOCH when set, else the Unix epoch, so manifests stay byte-stable."""
    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    return _dt.datetime.fromtimestamp(epoch, tz=_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def frame_ranges(points: np.ndarray, cfg: Config):
    if cfg.plot_frame == "full":
        return None, None
    c = points.mean(axis=0)
    half = 1.05 * cloud_stats(points, cfg.frame_quantile).scale
    return (c[0] - half, c[0] + half), (c[1] - half, c[1] + half)


@dataclass
class PanelRecord:
    panel_id: str
    perturbation: str
    chain_length: int
    spectrum_file: str
    image_file: str
    spectral_distance_to_baseline: float
    ratio_normalized_distance: float | None = None
    dimension: float | None = None


@dataclass
class SuiteManifest:
    created_at: str
    config_hash: str
    panels: list[PanelRecord] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "schema": MANIFEST_SCHEMA,
            "version": MANIFEST_VERSION,
            "created_at": self.created_at,
            "config_hash": self.config_hash,
            "config": self.config,
            "panels": [asdict(p) for p in sorted(self.panels, key=lambda p: p.panel_id)],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _panel(pid, p, baseline, base_spec, outdir, spec: PlotSpec, cfg: Config) -> PanelRecord:
    try:
        chain = perturb(baseline, p)
        z = dft_fast(chain)
        pdir = outdir / f"panel_{pid}"
        pdir.mkdir(parents=True, exist_ok=True)
        write_spectrum_csv(pdir / "spectrum.csv", z)
        render_scatter(spectrum_points(z, spec.include_dc), spec, pdir / "plot.svg")
    except OSError as exc:
        raise OSError(exc.errno, f"panel {pid}: {exc.strerror or exc}", exc.filename) from exc

    rec = PanelRecord(
        panel_id=pid,
        perturbation=p.describe(),
        chain_length=len(chain),
        spectrum_file=f"panel_{pid}/spectrum.csv",
        image_file=f"panel_{pid}/plot.svg",
        spectral_distance_to_baseline=spectral_distance(base_spec, z),
    )
    if p.kind == "SetRatio":
        factor = ratio_factor(chain, baseline)
        rec.ratio_normalized_distance = spectral_distance(base_spec, Spectrum(z.coefficients / factor))
    if pid in cfg.dimension_panels.split(","):
        rec.dimension = pointwise_dimension(spectrum_points(z), cfg.dimension_params()).dimension
    return rec


def run_figure4_suite(outdir, seed: int | None = None, cfg: Config | None = None) -> SuiteManifest:
    """Baseline W_m (m = cfg.iteration, 26 by default) plus the seventeen captioned variants."""
    cfg = cfg or Config()
    if seed is not None:
        cfg = cfg.with_overrides(seed=seed)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    baseline = realize(word_by_substitution(cfg.iteration), PHI, 1.0)
    base_spec = dft_fast(baseline)
    xr, yr = frame_ranges(spectrum_points(base_spec), cfg)
    spec = cfg.plot_spec(xr, yr)
    perts = suite_perturbations(cfg.seed)

    t0 = time.perf_counter()
    job = lambda item: _panel(item[0], item[1], baseline, base_spec, outdir, spec, cfg)  # noqa: E731
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(job, perts.items()))
    else:
        records = [job(item) for item in perts.items()]
    log.info("suite: %d panels in %.1fs", len(records), time.perf_counter() - t0)

    manifest = SuiteManifest(
        created_at=created_at(),
        config_hash=cfg.hash(command="suite"),
        panels=sorted(records, key=lambda r: r.panel_id),
        config=cfg.to_dict(),
    )
    (outdir / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return manifest


@dataclass
class SweepRow:
    m: int
    fib_m: int
    scale: float | None
    scale_ratio: float | None
    orientation: float | None
    dimension: float | None
    image_file: str | None


SWEEP_COLUMNS = ("m", "fib_m", "scale", "scale_ratio", "orientation", "dimension")


def _cell(v) -> str:
    if v is None:
        return ""
    return str(v) if isinstance(v, int) else fmt17(v)


def write_sweep_csv(path, rows: list[SweepRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_cell(getattr(row, c)) for c in SWEEP_COLUMNS) + "\n")


def sweep_iteration(m: int, outdir: Path, cfg: Config, with_dimension: bool) -> SweepRow:
    n = fibonacci_number(m)
    z = dft_fast(realize(word_by_substitution(m), PHI, 1.0))
    pts = spectrum_points(z)
    row = SweepRow(m, n, None, None, None, None, None)
    if len(pts) >= 2:
        stats = cloud_stats(pts, cfg.stats_quantile)
        row.scale, row.orientation = stats.scale, stats.orientation
    if with_dimension and len(pts) >= 1000:
        row.dimension = pointwise_dimension(pts, cfg.dimension_params()).dimension
    if len(pts) >= 1:
        ext = "svg" if len(pts) <= cfg.svg_max_points else "ppm"
        xr, yr = frame_ranges(pts, cfg) if len(pts) >= 2 else (None, None)
        idir = outdir / f"iter_{m}"
        idir.mkdir(parents=True, exist_ok=True)
        render_scatter(pts, cfg.plot_spec(xr, yr), idir / f"plot.{ext}")
        row.image_file = f"iter_{m}/plot.{ext}"
    return row


def run_iteration_sweep(m_start: int, m_end: int, outdir, cfg: Config | None = None,
                        dimension_max_iteration: int = 26) -> list[SweepRow]:
    if not 2 <= m_start <= m_end <= 34:
        raise DomainError("need 2 <= m_start <= m_end <= 34")
    cfg = cfg or Config()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows: list[SweepRow] = []
    for m in range(m_start, m_end + 1):
        t0 = time.perf_counter()
        row = sweep_iteration(m, outdir, cfg, with_dimension=m <= dimension_max_iteration)
        if rows and rows[-1].scale and row.scale:
            row.scale_ratio = row.scale / rows[-1].scale
        rows.append(row)
        log.info("sweep m=%d n=%d %.1fs", m, row.fib_m, time.perf_counter() - t0)
    write_sweep_csv(outdir / "sweep.csv", rows)
    return rows
