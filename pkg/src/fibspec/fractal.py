"""Statistics of spectral point clouds: pointwise dimension, size, orientation, distance."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from fibspec.dft import Spectrum
from fibspec.errors import DomainError, SingularFitError
from fibspec.fibchain import SplitMix64

MIN_POINTS = 1000
MIN_RADII = 8


@dataclass(frozen=True)
class DimensionParams:
    references: int = 100
    radii: int = 16
    quantile_lo: float = 0.001
    quantile_hi: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.references < 1:
            raise DomainError("references must be >= 1")
        if self.radii < MIN_RADII:
            raise DomainError(f"radii must be >= {MIN_RADII}")
        if not 0 < self.quantile_lo < self.quantile_hi < 1:
            raise DomainError("need 0 < quantile_lo < quantile_hi < 1")
        if not 0 <= self.seed < (1 << 64):
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class DimensionEstimate:
    dimension: float
    reference_count: int
    radius_range: tuple[float, float]
    per_reference_slopes: tuple[float, ...]
    fit_r2: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "dimension": self.dimension,
                "r2": self.fit_r2,
                "radius_range": list(self.radius_range),
                "per_reference_slopes": list(self.per_reference_slopes),
            },
            indent=2,
        )


@dataclass(frozen=True)
class CloudStats:
    scale: float
    orientation: float
    count: int

    def to_dict(self) -> dict:
        return asdict(self)


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DomainError("points must have shape (N, 2)")
    return pts


def sample_indices(n: int, k: int, seed: int) -> np.ndarray:
    """k distinct indices from range(n): partial Fisher-Yates driven by SplitMix64."""
    rng = SplitMix64(seed)
    swapped: dict[int, int] = {}
    out = []
    for i in range(min(k, n)):
        j = i + rng.below(n - i)
        out.append(swapped.get(j, j))
        swapped[j] = swapped.get(i, i)
    return np.array(out, dtype=np.int64)


def _fit_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and r^2 of y against x."""
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    syy = np.sum((y - ym) ** 2)
    if sxx == 0:
        raise SingularFitError("no spread in log-radius")
    sxy = np.sum((x - xm) * (y - ym))
    slope = sxy / sxx
    r2 = 1.0 if syy == 0 else (sxy * sxy) / (sxx * syy)
    return float(slope), float(min(max(r2, 0.0), 1.0))


def _reference_fit(pts: np.ndarray, ref: int, params: DimensionParams):
    d = np.hypot(pts[:, 0] - pts[ref, 0], pts[:, 1] - pts[ref, 1])
    d = np.delete(d, ref)
    lo, hi = np.quantile(d, [params.quantile_lo, params.quantile_hi])
    if not (lo > 0 and hi > lo):
        return None
    eps = np.geomspace(lo, hi, params.radii)
    near = np.sort(d[d <= hi])
    counts = np.searchsorted(near, eps, side="right")
    keep = counts > 0
    if keep.sum() < MIN_RADII:
        return None
    slope, r2 = _fit_line(np.log(eps[keep]), np.log(counts[keep]))
    return slope, r2, lo, hi


def pointwise_dimension(points, params: DimensionParams | None = None, workers: int = 1) -> DimensionEstimate:
    """Median over seeded reference points of the slope of log N_x(eps) against log eps.

    For each reference x the radii form a geometric grid between the
    ``quantile_lo`` and ``quantile_hi`` quantiles of the distances from x to
    every other point; N_x(eps) counts the other points within eps.
    """
    params = params or DimensionParams()
    pts = _as_points(points)
    if len(pts) < MIN_POINTS:
        raise DomainError(f"need at least {MIN_POINTS} points, got {len(pts)}")
    if np.all(pts == pts[0]):
        raise SingularFitError("all points coincide")

    refs = sample_indices(len(pts), params.references, params.seed)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fits = list(pool.map(lambda i: _reference_fit(pts, int(i), params), refs))
    else:
        fits = [_reference_fit(pts, int(i), params) for i in refs]
    fits = [f for f in fits if f is not None]
    if not fits:
        raise SingularFitError("no reference point had a usable radius range")

    slopes = np.array([f[0] for f in fits])
    r2 = np.array([f[1] for f in fits])
    lo = float(np.median([f[2] for f in fits]))
    hi = float(np.median([f[3] for f in fits]))
    return DimensionEstimate(
        dimension=float(np.median(slopes)),
        reference_count=len(fits),
        radius_range=(lo, hi),
        per_reference_slopes=tuple(float(s) for s in slopes),
        fit_r2=float(np.median(r2)),
    )


def _skewness(x: np.ndarray) -> float:
    if len(x) < 2:
        return 0.0
    c = x - x.mean()
    m2 = np.mean(c * c)
    if m2 == 0:
        return 0.0
    return float(np.mean(c**3) / m2**1.5)


def cloud_stats(points, quantile: float = 0.9) -> CloudStats:
    """Size and real-axis asymmetry of a cloud.

    scale is the ``quantile`` quantile of distances from the centroid.
    orientation is the skewness of the real coordinates of the points lying
    within that radius; the handful of Bragg peaks far outside it would
    otherwise set the sign on their own.
    """
    pts = _as_points(points)
    if len(pts) < 2:
        raise DomainError("need at least 2 points")
    if not 0 < quantile < 1:
        raise DomainError("quantile must lie in (0, 1)")
    centroid = pts.mean(axis=0)
    radius = np.hypot(pts[:, 0] - centroid[0], pts[:, 1] - centroid[1])
    scale = float(np.quantile(radius, quantile))
    if not scale > 0:
        raise DomainError("degenerate cloud: zero scale")
    core = pts[radius <= scale, 0]
    return CloudStats(scale=scale, orientation=_skewness(core), count=len(pts))


def _resample_sorted(values: np.ndarray, k: int) -> np.ndarray:
    """Quantile function of ``values`` at the k midpoints (i + 0.5) / k."""
    v = np.sort(values)
    src = (np.arange(len(v)) + 0.5) / len(v)
    dst = (np.arange(k) + 0.5) / k
    return np.interp(dst, src, v)


def spectral_distance(a: Spectrum, b: Spectrum) -> float:
    """Relative L2 distance between the off-DC parts of two spectra.

    Equal lengths compare coefficient by coefficient.  Otherwise both sorted
    magnitude sequences are resampled onto the midpoint grid of the shorter
    one by linear interpolation of their quantile functions and compared there.
    """
    za = a.off_dc if isinstance(a, Spectrum) else np.asarray(a)[1:]
    zb = b.off_dc if isinstance(b, Spectrum) else np.asarray(b)[1:]
    if len(za) == 0 or len(zb) == 0:
        raise DomainError("spectra need at least one off-DC coefficient")
    if len(za) != len(zb):
        k = min(len(za), len(zb))
        za = _resample_sorted(np.abs(za), k)
        zb = _resample_sorted(np.abs(zb), k)
    denom = max(np.linalg.norm(za), np.linalg.norm(zb))
    if denom == 0:
        return 0.0
    return float(np.linalg.norm(za - zb) / denom)
