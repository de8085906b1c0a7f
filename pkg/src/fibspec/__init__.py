"""Fibonacci chains, their unitary Fourier spectra and the cardioid signature."""

from fibspec.errors import DomainError, OracleScaleError, ParseError, SingularFitError
from fibspec.fibchain import (
    PHI,
    Chain,
    Perturbation,
    SymbolWord,
    fibonacci_number,
    perturb,
    realize,
    word_by_floor_formula,
    word_by_substitution,
)
from fibspec.dft import Spectrum, dft_fast, dft_naive, off_dc_points
from fibspec.fractal import (
    CloudStats,
    DimensionEstimate,
    cloud_stats,
    pointwise_dimension,
    spectral_distance,
)

__all__ = [
    "PHI",
    "Chain",
    "CloudStats",
    "DimensionEstimate",
    "DomainError",
    "OracleScaleError",
    "ParseError",
    "Perturbation",
    "SingularFitError",
    "Spectrum",
    "SymbolWord",
    "cloud_stats",
    "dft_fast",
    "dft_naive",
    "fibonacci_number",
    "off_dc_points",
    "perturb",
    "pointwise_dimension",
    "realize",
    "spectral_distance",
    "word_by_floor_formula",
    "word_by_substitution",
]
