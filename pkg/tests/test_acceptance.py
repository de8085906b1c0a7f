"""One test per acceptance criterion, each at its stated tolerance and time budget.

A summary line per criterion is printed at the end of the run (see conftest).
"""

import json
import subprocess
import sys
import textwrap
import time

import numpy as np
import pytest

from conftest import golden_chain, golden_spectrum
from fibspec import PHI, Perturbation, dft_fast, dft_naive, perturb
from fibspec.cli import main
from fibspec.experiments import run_figure4_suite, run_iteration_sweep
from fibspec.fibchain import fibonacci_number, word_by_floor_formula, word_by_substitution
from fibspec.fractal import DimensionParams, pointwise_dimension
from fibspec.render import spectrum_points

pytestmark = pytest.mark.acceptance


def test_c01_word_equivalence(record_criterion):
    t0 = time.perf_counter()
    bad = [m for m in range(2, 27)
           if word_by_floor_formula(fibonacci_number(m)).symbols != word_by_substitution(m).symbols]
    dt = time.perf_counter() - t0
    ok = not bad and dt < 5
    record_criterion(1, "word equivalence m=2..26", ok, f"mismatches={bad} time={dt:.2f}s (<5s)")
    assert ok


def test_c02_transform_correctness(record_criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for m in (7, 8, 9, 10, 11, 13, 17):  # n = 13, 21, 34, 55, 89, 233, 1597
        c = golden_chain(m)
        dev = np.max(np.abs(dft_fast(c).coefficients - dft_naive(c).coefficients))
        worst = max(worst, dev / np.sum(np.abs(c.values)))
    c = golden_chain(26)
    z = dft_fast(c).coefficients
    energy = np.sum(c.values**2)
    parseval = abs(np.sum(np.abs(z) ** 2) - energy) / energy
    sym = np.max(np.abs(z[1:][::-1] - np.conj(z[1:]))) / np.max(np.abs(z))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and parseval <= 1e-9 and sym <= 1e-9 and dt < 10
    record_criterion(2, "transform correctness", ok,
                     f"fast-naive={worst:.2e} parseval={parseval:.2e} symmetry={sym:.2e} time={dt:.2f}s")
    assert ok


def test_c03_ratio_invariance(record_criterion):
    c = golden_chain(26)
    z = golden_spectrum(26).coefficients[1:]
    zr = dft_fast(perturb(c, Perturbation.set_ratio(2.0))).coefficients[1:]
    rel = np.max(np.abs(zr - PHI * z)) / np.max(np.abs(PHI * z))
    ok = rel <= 1e-9
    record_criterion(3, "ratio invariance at F(26)", ok, f"max relative deviation={rel:.2e}")
    assert ok


def calibration_clouds():
    rng = np.random.default_rng(2024)
    x = rng.uniform(0, 1, 20_000)
    seg = np.column_stack([x, np.zeros_like(x)])
    r, t = np.sqrt(rng.uniform(0, 1, 20_000)), rng.uniform(0, 2 * np.pi, 20_000)
    disk = np.column_stack([r * np.cos(t), r * np.sin(t)])
    return seg, disk


def test_c04_pointwise_dimension(record_criterion):
    t0 = time.perf_counter()
    seg, disk = calibration_clouds()
    d_seg = pointwise_dimension(seg).dimension
    d_disk = pointwise_dimension(disk).dimension
    est = pointwise_dimension(spectrum_points(golden_spectrum(25)), DimensionParams())
    dt = time.perf_counter() - t0
    checks = {
        "segment": abs(d_seg - 1.0) <= 0.1,
        "disk": abs(d_disk - 2.0) <= 0.15,
        "iteration 25": abs(est.dimension - 0.7) <= 0.15,
        "time": dt < 60,
    }
    ok = all(checks.values())
    record_criterion(4, "pointwise dimension", ok,
                     f"m=25 d={est.dimension:.3f} (want 0.7+-0.15, r2={est.fit_r2:.3f}) "
                     f"segment={d_seg:.3f} disk={d_disk:.3f} time={dt:.1f}s "
                     f"failed={[k for k, v in checks.items() if not v]}")
    assert ok


@pytest.fixture(scope="module")
def sweep_rows(tmp_path_factory):
    return run_iteration_sweep(20, 26, tmp_path_factory.mktemp("sweep"), dimension_max_iteration=0)


def test_c05_scale_ratio(record_criterion, sweep_rows):
    ratios = {r.m: r.scale_ratio for r in sweep_rows[1:]}  # scale(m+1)/scale(m), keyed by m+1
    ok = all(0.71 <= ratios[m + 1] <= 0.87 for m in range(20, 26))
    record_criterion(5, "scale ratio m=20..25", ok,
                     "ratios=" + " ".join(f"{ratios[m + 1]:.4f}" for m in range(20, 26)) + " in [0.71, 0.87]")
    assert ok


def test_c06_orientation_alternation(record_criterion, sweep_rows):
    o = [r.orientation for r in sweep_rows]
    ok = all(np.sign(a) == -np.sign(b) != 0 for a, b in zip(o, o[1:]))
    record_criterion(6, "orientation alternation m=20..26", ok, "skewness=" + " ".join(f"{v:+.4f}" for v in o))
    assert ok


def test_c07_truncation_identity(record_criterion):
    cut = perturb(golden_chain(26), Perturbation.truncate_tail(46368))
    w25 = golden_chain(25)
    same_values = cut.values.tobytes() == w25.values.tobytes()
    same_spec = dft_fast(cut).coefficients.tobytes() == golden_spectrum(25).coefficients.tobytes()
    ok = same_values and same_spec
    record_criterion(7, "truncation identity", ok, f"values identical={same_values} spectra identical={same_spec}")
    assert ok


@pytest.fixture(scope="module")
def suite_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig4")
    t0 = time.perf_counter()
    manifest = run_figure4_suite(out, seed=42)
    return manifest, time.perf_counter() - t0


def test_c08_sensitivity_ordering(record_criterion, suite_run):
    rec = {p.panel_id: p for p in suite_run[0].panels}
    dist = {k: p.spectral_distance_to_baseline for k, p in rec.items()}
    # panel q is a second, unmodified baseline, so it is held to the same zero as g
    unmodified = [k for k, p in rec.items() if p.perturbation == "Identity"]
    others = {k: v for k, v in dist.items() if k not in unmodified and k != "r"}
    ok = (all(dist[k] == 0.0 for k in unmodified) and rec["r"].ratio_normalized_distance <= 1e-9
          and min(others.values()) > 1e-3)
    low = min(others, key=others.get)
    record_criterion(8, "sensitivity ordering", ok,
                     f"identity panels {unmodified} at 0; r normalized={rec['r'].ratio_normalized_distance:.1e}; "
                     f"smallest other={low}:{others[low]:.2e} (>1e-3)")
    assert ok


PERF_SCRIPT = textwrap.dedent("""
    import json, resource, sys, tempfile, time
    from fibspec.config import Config
    from fibspec.experiments import sweep_iteration
    from pathlib import Path
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as d:
        row = sweep_iteration(34, Path(d), Config(), with_dimension=False)
    dt = time.perf_counter() - t0
    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    print(json.dumps({"seconds": dt, "max_rss": rss, "n": row.fib_m}))
""")


def test_c09_performance(record_criterion, suite_run):
    suite_time = suite_run[1]
    proc = subprocess.run([sys.executable, "-c", PERF_SCRIPT], capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr
    big = json.loads(proc.stdout)
    gib = big["max_rss"] / 2**30
    ok = suite_time < 60 and big["n"] == 5_702_887 and big["seconds"] < 120 and big["max_rss"] < 2 * 2**30
    record_criterion(9, "performance envelope", ok,
                     f"suite={suite_time:.1f}s (<60s) F(34) panel={big['seconds']:.1f}s (<120s) "
                     f"peak rss={gib:.2f} GiB (<2)")
    assert ok


def test_c10_reproducibility(record_criterion, tmp_path, capsys):
    outs = [tmp_path / "run1", tmp_path / "run2"]
    for out in outs:
        assert main(["suite", "--seed", "42", "--outdir", str(out)]) == 0
    capsys.readouterr()
    files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.suffix in (".csv", ".json"))
    differ = [str(f) for f in files if (outs[0] / f).read_bytes() != (outs[1] / f).read_bytes()]
    ok = len(files) == 19 and not differ
    record_criterion(10, "reproducibility of suite --seed 42", ok,
                     f"{len(files)} CSV/JSON files compared, differing={differ}")
    assert ok
