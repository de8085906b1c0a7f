import csv
import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from conftest import golden_chain
from fibspec import DomainError
from fibspec.config import Config
from fibspec.dft import read_spectrum
from fibspec.experiments import (
    PANEL_IDS,
    SWEEP_COLUMNS,
    created_at,
    suite_perturbations,
    panel_seed,
    run_figure4_suite,
    run_iteration_sweep,
)

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "manifest.schema.json").read_text())
SMALL = Config(iteration=12, dimension_panels="")


def test_panel_seed_is_sha256_prefix():
    import hashlib

    assert panel_seed(42, "n") == int.from_bytes(hashlib.sha256(b"42:n").digest()[:8], "little")
    assert len({panel_seed(42, p) for p in "nop"}) == 3
    assert panel_seed(42, "n") != panel_seed(43, "n")


def test_perturbation_table_covers_all_panels():
    perts = suite_perturbations(42)
    assert tuple(perts) == PANEL_IDS
    assert perts["g"].describe() == "Identity"
    assert perts["k"].describe() == "TruncateTail(46368)"
    assert perts["r"].describe() == "SetRatio(2)"


def test_created_at_follows_source_date_epoch(monkeypatch):
    monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
    assert created_at() == "1970-01-01T00:00:00Z"
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    assert created_at() == "2023-11-14T22:13:20Z"


@pytest.fixture(scope="module")
def suite26(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite")
    return out, run_figure4_suite(out, seed=42)


def test_suite_manifest_validates(suite26):
    out, manifest = suite26
    doc = json.loads((out / "manifest.json").read_text())
    jsonschema.validate(doc, SCHEMA)
    assert [p["panel_id"] for p in doc["panels"]] == list(PANEL_IDS)
    assert doc["config"]["seed"] == 42


def test_suite_writes_every_artifact(suite26):
    out, manifest = suite26
    for p in manifest.panels:
        assert (out / p.spectrum_file).is_file() and (out / p.image_file).is_file()
        assert read_spectrum(out / p.spectrum_file).n == p.chain_length


def test_suite_panel_k_is_previous_iteration(suite26):
    out, manifest = suite26
    k = {p.panel_id: p for p in manifest.panels}["k"]
    assert k.chain_length == len(golden_chain(25))
    g = read_spectrum(out / "panel_g/spectrum.csv")
    assert g.n == 121393


def test_suite_distances(suite26):
    _, manifest = suite26
    rec = {p.panel_id: p for p in manifest.panels}
    assert rec["g"].spectral_distance_to_baseline == 0.0
    assert rec["r"].ratio_normalized_distance <= 1e-9
    assert rec["r"].spectral_distance_to_baseline > 0.1
    assert rec["g"].dimension is not None
    assert all(p.ratio_normalized_distance is None for p in manifest.panels if p.panel_id != "r")


def test_suite_threaded_run_matches_serial(tmp_path):
    a = run_figure4_suite(tmp_path / "a", cfg=Config(iteration=26, dimension_panels=""))
    b = run_figure4_suite(tmp_path / "b", cfg=Config(iteration=26, dimension_panels="", workers=3))
    assert [vars(p) for p in a.panels] == [vars(p) for p in b.panels]
    for pid in PANEL_IDS:
        assert (tmp_path / "a" / f"panel_{pid}" / "spectrum.csv").read_bytes() == \
            (tmp_path / "b" / f"panel_{pid}" / "spectrum.csv").read_bytes()


def test_suite_io_error_names_panel(tmp_path):
    (tmp_path / "blocker").write_text("")
    with pytest.raises(OSError):
        run_figure4_suite(tmp_path / "blocker" / "out", cfg=SMALL)
    out = tmp_path / "out"
    out.mkdir()
    (out / "panel_a").write_text("not a directory")
    with pytest.raises(OSError, match="panel a"):
        run_figure4_suite(out, cfg=Config(dimension_panels=""))


def test_sweep_single_iteration(tmp_path):
    rows = run_iteration_sweep(5, 5, tmp_path)
    assert len(rows) == 1 and rows[0].fib_m == 5 and rows[0].dimension is None
    assert (tmp_path / rows[0].image_file).is_file()
    with open(tmp_path / "sweep.csv") as fh:
        table = list(csv.DictReader(fh))
    assert tuple(table[0]) == SWEEP_COLUMNS
    assert table[0]["scale_ratio"] == "" and table[0]["dimension"] == ""


def test_sweep_table(tmp_path):
    rows = run_iteration_sweep(2, 17, tmp_path, cfg=Config(dim_references=10))
    assert [r.fib_m for r in rows] == [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987, 1597]
    assert rows[0].scale is None and rows[0].image_file is None
    assert rows[-1].dimension is not None
    for prev, r in zip(rows[5:], rows[6:]):
        assert r.scale_ratio == pytest.approx(r.scale / prev.scale)
    text = (tmp_path / "sweep.csv").read_text().splitlines()
    assert text[0] == ",".join(SWEEP_COLUMNS) and len(text) == 17


def test_sweep_range_errors(tmp_path):
    for a, b in ((1, 3), (5, 4), (30, 35)):
        with pytest.raises(DomainError):
            run_iteration_sweep(a, b, tmp_path)


def test_sweep_switches_to_raster_for_large_clouds(tmp_path):
    rows = run_iteration_sweep(10, 10, tmp_path, cfg=Config(svg_max_points=10))
    assert rows[0].image_file == "iter_10/plot.ppm"
    assert (tmp_path / "iter_10/plot.ppm").read_bytes().startswith(b"P6\n800 800\n255\n")
