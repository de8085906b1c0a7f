"""Run configuration: a flat key = value text file, validated up front."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from fibspec.errors import DomainError, ParseError
from fibspec.fractal import DimensionParams
from fibspec.render import PlotSpec

SEED_ENV = "FIBSPEC_SEED"


class ConfigError(ValueError):
    pass


def _parse_color(text: str) -> tuple[int, int, int]:
    t = text.strip().lstrip("#")
    if len(t) != 6:
        raise ConfigError(f"colour must be #rrggbb, got {text!r}")
    try:
        return int(t[0:2], 16), int(t[2:4], 16), int(t[4:6], 16)
    except ValueError as exc:
        raise ConfigError(f"colour must be #rrggbb, got {text!r}") from exc


@dataclass(frozen=True)
class Config:
    seed: int = 42
    workers: int = 1
    output_dir: str = "out"
    dim_references: int = 100
    dim_radii: int = 16
    dim_quantile_lo: float = 0.001
    dim_quantile_hi: float = 0.1
    stats_quantile: float = 0.9
    plot_width: int = 800
    plot_height: int = 800
    point_radius: float = 0.6
    plot_frame: str = "cardioid"   # "cardioid": centroid +- 1.05 * frame_quantile radius; "full": tight box
    frame_quantile: float = 0.75
    include_dc: bool = False
    background: str = "#ffffff"
    foreground: str = "#000000"
    svg_max_points: int = 250_000
    dimension_panels: str = "g"
    iteration: int = 26

    def __post_init__(self):
        if not 0 <= self.seed < (1 << 64):
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.plot_frame not in ("cardioid", "full"):
            raise ConfigError("plot_frame must be 'cardioid' or 'full'")
        if not 0 < self.stats_quantile < 1 or not 0 < self.frame_quantile < 1:
            raise ConfigError("stats_quantile and frame_quantile must lie in (0, 1)")
        if not 3 <= self.iteration <= 34:
            raise ConfigError("iteration must be in 3..34")
        try:
            self.dimension_params()
            self.plot_spec()
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        _parse_color(self.background)
        _parse_color(self.foreground)

    def dimension_params(self) -> DimensionParams:
        return DimensionParams(
            references=self.dim_references,
            radii=self.dim_radii,
            quantile_lo=self.dim_quantile_lo,
            quantile_hi=self.dim_quantile_hi,
            seed=self.seed,
        )

    def plot_spec(self, x_range=None, y_range=None) -> PlotSpec:
        return PlotSpec(
            width_px=self.plot_width,
            height_px=self.plot_height,
            x_range=x_range,
            y_range=y_range,
            point_radius_px=self.point_radius,
            include_dc=self.include_dc,
            background=_parse_color(self.background),
            foreground=_parse_color(self.foreground),
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self, **extra) -> str:
        payload = {"config": self.to_dict(), "args": extra}
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()

    def with_overrides(self, **kwargs) -> Config:
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs)


def _coerce(name: str, kind, raw: str):
    raw = raw.strip()
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        raw = raw[1:-1]
    try:
        if kind in (bool, "bool"):
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if kind in (int, "int"):
            return int(raw, 0)
        if kind in (float, "float"):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {kind}") from exc
    return raw


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines; whole-line ``#`` comments only, so colours keep their ``#``."""
    types = {f.name: f.type for f in fields(Config)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, raw = line.partition("=")
        key = key.strip()
        if not sep:
            raise ParseError(f"{source}:{lineno}: expected key = value")
        if key not in types:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, types[key], raw)
    return values


def load_config(path=None, env=None) -> Config:
    """Defaults <- config file <- FIBSPEC_SEED."""
    env = os.environ if env is None else env
    values = {}
    if path is not None:
        values = parse_config_text(Path(path).read_text(encoding="utf-8"), str(path))
    if env.get(SEED_ENV):
        values["seed"] = _coerce("seed", int, env[SEED_ENV])
    return Config(**values)
