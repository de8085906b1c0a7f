"""Scatter plots of spectra (SVG or binary PPM), Mandelbrot masks, and overlays."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from fibspec.dft import Spectrum
from fibspec.errors import DomainError

RGB = tuple[int, int, int]

# bounding box of the Mandelbrot main cardioid c = e^{it}/2 - e^{2it}/4
MAIN_CARDIOID_BOX = (-0.75, 0.25, -3 * math.sqrt(3) / 8, 3 * math.sqrt(3) / 8)
MANDELBROT_WINDOW = ((-2.0, 0.6), (-1.1, 1.1))


@dataclass(frozen=True)
class PlotSpec:
    width_px: int = 800
    height_px: int = 800
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    point_radius_px: float = 0.6
    include_dc: bool = False
    background: RGB = (255, 255, 255)
    foreground: RGB = (0, 0, 0)
    mask_color: RGB = (255, 140, 0)
    mask_alpha: float = 0.35

    def __post_init__(self):
        if self.width_px < 1 or self.height_px < 1:
            raise DomainError("plot dimensions must be positive")
        for rng in (self.x_range, self.y_range):
            if rng is not None and not rng[1] > rng[0]:
                raise DomainError(f"empty plot range {rng}")
        if self.point_radius_px < 0:
            raise DomainError("point radius must be non-negative")


@dataclass(frozen=True)
class Frame:
    """Affine map from data coordinates to continuous pixel coordinates.

    (x0, y1) lands on pixel corner (0, 0) and (x1, y0) on (width, height);
    the imaginary axis points up.
    """

    x0: float
    x1: float
    y0: float
    y1: float
    width: int
    height: int

    def to_pixel(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        px = (pts[:, 0] - self.x0) / (self.x1 - self.x0) * self.width
        py = (self.y1 - pts[:, 1]) / (self.y1 - self.y0) * self.height
        return np.column_stack([px, py])


def spectrum_points(spec: Spectrum, include_dc: bool = False) -> np.ndarray:
    z = spec.coefficients if include_dc else spec.off_dc
    return np.column_stack([z.real, z.imag])


def _padded(lo: float, hi: float) -> tuple[float, float]:
    span = hi - lo
    if span == 0:
        pad = abs(lo) * 0.05 or 1.0
    else:
        pad = 0.05 * span
    return lo - pad, hi + pad


def make_frame(points: np.ndarray, spec: PlotSpec) -> Frame:
    xr = spec.x_range or _padded(float(points[:, 0].min()), float(points[:, 0].max()))
    yr = spec.y_range or _padded(float(points[:, 1].min()), float(points[:, 1].max()))
    return Frame(xr[0], xr[1], yr[0], yr[1], spec.width_px, spec.height_px)


def _hex(rgb: RGB) -> str:
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _g9(v: float) -> str:
    return f"{v:.9g}"


def _svg_bytes(pix: np.ndarray, spec: PlotSpec, mask_rects: list[str]) -> bytes:
    w, h = spec.width_px, spec.height_px
    r = _g9(spec.point_radius_px)
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" fill="{_hex(spec.foreground)}">\n',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="{_hex(spec.background)}"/>\n',
    ]
    body = [f'<circle cx="{_g9(x)}" cy="{_g9(y)}" r="{r}"/>\n' for x, y in pix.tolist()]
    return "".join(head + mask_rects + body + ["</svg>\n"]).encode("utf-8")


def _disk_offsets(radius: float) -> np.ndarray:
    k = int(math.floor(radius))
    ys, xs = np.mgrid[-k:k + 1, -k:k + 1]
    inside = xs * xs + ys * ys <= radius * radius
    return np.column_stack([xs[inside], ys[inside]])


def _raster(pix: np.ndarray, spec: PlotSpec, tint: np.ndarray | None) -> np.ndarray:
    w, h = spec.width_px, spec.height_px
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[:] = spec.background
    if tint is not None and tint.any():
        a = spec.mask_alpha
        blended = np.round((1 - a) * np.array(spec.background) + a * np.array(spec.mask_color))
        img[tint] = blended.astype(np.uint8)
    cells = np.floor(pix).astype(np.int64)
    for dx, dy in _disk_offsets(spec.point_radius_px):
        cx = cells[:, 0] + dx
        cy = cells[:, 1] + dy
        ok = (cx >= 0) & (cx < w) & (cy >= 0) & (cy < h)
        img[cy[ok], cx[ok]] = spec.foreground
    return img


def _ppm_bytes(img: np.ndarray) -> bytes:
    h, w, _ = img.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + img.tobytes()


def _write(path: Path, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)


def _format(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix not in (".svg", ".ppm"):
        raise DomainError(f"unsupported image extension {suffix!r}; use .svg or .ppm")
    return suffix[1:]


def render_scatter(points, spec: PlotSpec, path) -> Path:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        raise DomainError("nothing to plot")
    path = Path(path)
    kind = _format(path)
    pix = make_frame(pts, spec).to_pixel(pts)
    if kind == "svg":
        _write(path, _svg_bytes(pix, spec, []))
    else:
        _write(path, _ppm_bytes(_raster(pix, spec, None)))
    return path


def mandelbrot_mask(x_range, y_range, grid_w: int, grid_h: int, max_iter: int) -> np.ndarray:
    """Boolean (grid_h, grid_w) membership grid; row 0 is the top (largest imaginary part).

    A cell belongs when z <- z^2 + c from z = 0 keeps |z| <= 2 for max_iter steps,
    c being the cell centre.
    """
    if max_iter < 1:
        raise DomainError("max_iter must be >= 1")
    if grid_w < 1 or grid_h < 1:
        raise DomainError("grid dimensions must be positive")
    (x0, x1), (y0, y1) = x_range, y_range
    xs = x0 + (np.arange(grid_w) + 0.5) * (x1 - x0) / grid_w
    ys = y1 - (np.arange(grid_h) + 0.5) * (y1 - y0) / grid_h
    c = xs[np.newaxis, :] + 1j * ys[:, np.newaxis]
    member = np.ones(c.shape, dtype=bool)
    z = np.zeros(c.shape, dtype=np.complex128)
    for _ in range(max_iter):
        live = member
        z[live] = z[live] * z[live] + c[live]
        escaped = np.abs(z) > 2.0
        member &= ~escaped
        if not member.any():
            break
    return member


def cardioid_alignment(points, quantile: float = 0.5) -> tuple[float, float, float]:
    """(scale, tx, ty) taking the core of a cloud onto the main cardioid's box.

    The core is every point within the ``quantile`` distance of the centroid;
    its bounding box is scaled uniformly to fit the cardioid box and centred on it.
    """
    pts = np.asarray(points, dtype=np.float64)
    c = pts.mean(axis=0)
    rad = np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1])
    core = pts[rad <= np.quantile(rad, quantile)]
    bx0, by0 = core.min(axis=0)
    bx1, by1 = core.max(axis=0)
    mx0, mx1, my0, my1 = MAIN_CARDIOID_BOX
    spans = [s for s in ((mx1 - mx0) / (bx1 - bx0) if bx1 > bx0 else None,
                         (my1 - my0) / (by1 - by0) if by1 > by0 else None) if s]
    scale = min(spans) if spans else 1.0
    tx = (mx0 + mx1) / 2 - scale * (bx0 + bx1) / 2
    ty = (my0 + my1) / 2 - scale * (by0 + by1) / 2
    return float(scale), float(tx), float(ty)


def _mask_rects(mask: np.ndarray, frame: Frame, spec: PlotSpec) -> list[str]:
    gh, gw = mask.shape
    sx = frame.width / gw
    sy = frame.height / gh
    fill = _hex(spec.mask_color)
    op = _g9(spec.mask_alpha)
    rects = []
    for j in range(gh):
        row = np.concatenate([[False], mask[j], [False]])
        edges = np.flatnonzero(row[1:] != row[:-1])
        for a, b in zip(edges[::2], edges[1::2]):
            rects.append(
                f'<rect x="{_g9(a * sx)}" y="{_g9(j * sy)}" width="{_g9((b - a) * sx)}" '
                f'height="{_g9(sy)}" fill="{fill}" fill-opacity="{op}"/>\n'
            )
    return rects


def render_mask(mask: np.ndarray, spec: PlotSpec, path) -> Path:
    """The mask alone, tinted over the background."""
    mask = np.asarray(mask, dtype=bool)
    if spec.x_range is None or spec.y_range is None:
        raise DomainError("mask rendering needs fixed x_range and y_range")
    path = Path(path)
    frame = Frame(spec.x_range[0], spec.x_range[1], spec.y_range[0], spec.y_range[1], spec.width_px, spec.height_px)
    empty = np.empty((0, 2))
    if _format(path) == "svg":
        _write(path, _svg_bytes(empty, spec, _mask_rects(mask, frame, spec)))
    else:
        _write(path, _ppm_bytes(_raster(empty, spec, _tint(mask, spec))))
    return path


def _tint(mask: np.ndarray, spec: PlotSpec) -> np.ndarray:
    """Nearest-cell resampling of a mask onto the pixel grid."""
    gh, gw = mask.shape
    rows = (np.arange(spec.height_px) * gh) // spec.height_px
    cols = (np.arange(spec.width_px) * gw) // spec.width_px
    return mask[np.ix_(rows, cols)]


def render_overlay(points, mask: np.ndarray, spec: PlotSpec, path, alignment=(1.0, 0.0, 0.0)) -> Path:
    """Points (after p -> scale * p + (tx, ty)) drawn over a translucent mask.

    The mask must cover ``spec.x_range`` x ``spec.y_range``.  The alignment is
    written to ``<path>.meta.json``.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        raise DomainError("nothing to plot")
    if spec.x_range is None or spec.y_range is None:
        raise DomainError("overlay needs fixed x_range and y_range matching the mask")
    path = Path(path)
    kind = _format(path)
    scale, tx, ty = (float(v) for v in alignment)
    moved = pts * scale + np.array([tx, ty])
    frame = make_frame(moved, spec)
    pix = frame.to_pixel(moved)
    mask = np.asarray(mask, dtype=bool)
    if kind == "svg":
        data = _svg_bytes(pix, spec, _mask_rects(mask, frame, spec))
    else:
        data = _ppm_bytes(_raster(pix, spec, _tint(mask, spec)))
    _write(path, data)
    meta = {
        "alignment": {"scale": scale, "translate": [tx, ty]},
        "x_range": list(spec.x_range),
        "y_range": list(spec.y_range),
        "mask_shape": list(mask.shape),
    }
    Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return path


def read_ppm(path) -> np.ndarray:
    """Parse a binary P6 file written by this module into an (h, w, 3) array."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise DomainError("not a binary PPM")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)
