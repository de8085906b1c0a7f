"""Unitary discrete Fourier transform with a positive exponent.

    z_s = n**-0.5 * sum_{r=1..n} u_r exp(+2 pi i (r-1)(s-1) / n)

``dft_naive`` sums directly and is the oracle.  ``dft_fast`` is a mixed-radix
Cooley-Tukey transform (four-step split, small prime sizes by dense DFT
matrices) that falls back to Bluestein's chirp-z convolution for large prime
factors; no external FFT library is involved.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from fibspec.errors import DomainError, OracleScaleError, ParseError
from fibspec.fibchain import Chain, fmt17

NAIVE_LIMIT = 5000
FAST_LIMIT = 10**7
DIRECT_LIMIT = 16      # composite sizes at or below this use a dense matrix
PRIME_DIRECT_LIMIT = 61  # primes above this go through Bluestein
BLUESTEIN_CHUNK = 1 << 21  # padded elements per Bluestein batch, bounds peak memory
BINARY_MAGIC = b"FIBSPEC1"


@dataclass(frozen=True, eq=False)
class Spectrum:
    coefficients: np.ndarray
    normalization: str = "one_over_sqrt_n"

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=np.complex128)
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def n(self) -> int:
        return len(self.coefficients)

    def __len__(self) -> int:
        return self.n

    @property
    def off_dc(self) -> np.ndarray:
        return self.coefficients[1:]


def _values(chain) -> np.ndarray:
    vals = chain.values if isinstance(chain, Chain) else chain
    return np.asarray(vals, dtype=np.complex128).ravel()


def dft_naive(chain) -> Spectrum:
    u = _values(chain)
    n = len(u)
    if n == 0:
        raise DomainError("empty chain")
    if n > NAIVE_LIMIT:
        raise OracleScaleError(f"direct summation limited to n <= {NAIVE_LIMIT}; use dft_fast")
    idx = np.arange(n)
    # reduce (r-1)(s-1) mod n in integers before forming the angle
    phase = np.outer(idx, idx) % n
    kernel = np.exp(2j * np.pi * phase / n)
    return Spectrum(kernel @ u / math.sqrt(n))


def dft_fast(chain) -> Spectrum:
    u = _values(chain)
    n = len(u)
    if n == 0:
        raise DomainError("empty chain")
    if n > FAST_LIMIT:
        raise DomainError(f"n must be <= {FAST_LIMIT}")
    z = _fft(u[np.newaxis, :], +1)[0]
    z /= math.sqrt(n)
    return Spectrum(z)


def off_dc_points(spec: Spectrum) -> np.ndarray:
    """(Re z_s, Im z_s) for s = 2..n as an (n-1, 2) array."""
    if spec.n < 2:
        raise DomainError("need n >= 2 for off-DC points")
    z = spec.off_dc
    return np.column_stack([z.real, z.imag])


# -- transform kernels ------------------------------------------------------
# All kernels act on the last axis of a 2-D (batch, n) array and return a new
# array: X[k] = sum_j x[j] exp(sign * 2 pi i j k / n), unnormalised.


def _roots(n: int, idx: np.ndarray, sign: int) -> np.ndarray:
    """exp(sign 2 pi i idx / n) with idx already reduced mod n."""
    ang = (2.0 * np.pi / n) * idx
    return np.cos(ang) + (1j * sign) * np.sin(ang)


@lru_cache(maxsize=64)
def _dft_matrix(n: int, sign: int) -> np.ndarray:
    idx = np.arange(n)
    return _roots(n, np.outer(idx, idx) % n, sign)


@lru_cache(maxsize=32)
def _twiddles(n1: int, n2: int, sign: int) -> np.ndarray:
    n = n1 * n2
    return _roots(n, np.outer(np.arange(n1), np.arange(n2)) % n, sign)


@lru_cache(maxsize=256)
def _factorize(n: int) -> tuple[int, ...]:
    out = []
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1
    if n > 1:
        out.append(n)
    return tuple(out)


def _split(n: int) -> int:
    """A divisor n1 of n close to sqrt(n), built greedily from prime factors."""
    target = math.isqrt(n)
    n1 = 1
    for p in sorted(_factorize(n), reverse=True):
        if n1 * p <= target or n1 == 1:
            n1 *= p
    if n1 == n:  # single large factor swallowed everything; peel the smallest off
        n1 = _factorize(n)[0]
    return n1


def _fft(x: np.ndarray, sign: int) -> np.ndarray:
    batch, n = x.shape
    if n == 1:
        return x.copy()
    factors = _factorize(n)
    if len(factors) == 1:
        if n <= PRIME_DIRECT_LIMIT:
            return x @ _dft_matrix(n, sign)
        return _bluestein(x, sign)
    if n <= DIRECT_LIMIT:
        return x @ _dft_matrix(n, sign)

    # four-step: j = n2*j1 + j2, k = k1 + n1*k2
    n1 = _split(n)
    n2 = n // n1
    a = x.reshape(batch, n1, n2)
    a = np.ascontiguousarray(a.transpose(0, 2, 1)).reshape(batch * n2, n1)
    b = _fft(a, sign).reshape(batch, n2, n1)          # [j2, k1]
    b *= _twiddles(n2, n1, sign)[np.newaxis]           # w^(j2 k1)
    b = np.ascontiguousarray(b.transpose(0, 2, 1)).reshape(batch * n1, n2)
    c = _fft(b, sign).reshape(batch, n1, n2)          # [k1, k2]
    return np.ascontiguousarray(c.transpose(0, 2, 1)).reshape(batch, n)


@lru_cache(maxsize=16)
def _bluestein_plan(n: int, sign: int) -> tuple[int, np.ndarray, np.ndarray]:
    m = 1 << (2 * n - 2).bit_length()
    j = np.arange(n, dtype=np.int64)
    # exp(sign i pi j^2 / n) with j^2 reduced mod 2n exactly
    ang = (np.pi / n) * ((j * j) % (2 * n))
    chirp = np.cos(ang) + (1j * sign) * np.sin(ang)
    kernel = np.zeros(m, dtype=np.complex128)
    kernel[:n] = np.conj(chirp)
    kernel[m - n + 1:] = np.conj(chirp[1:][::-1])
    kernel_hat = _fft(kernel[np.newaxis, :], -1)[0]
    return m, chirp, kernel_hat


def _bluestein(x: np.ndarray, sign: int) -> np.ndarray:
    batch, n = x.shape
    m, chirp, kernel_hat = _bluestein_plan(n, sign)
    out = np.empty((batch, n), dtype=np.complex128)
    rows = max(1, BLUESTEIN_CHUNK // m)
    for start in range(0, batch, rows):
        stop = min(batch, start + rows)
        a = np.zeros((stop - start, m), dtype=np.complex128)
        a[:, :n] = x[start:stop] * chirp
        a = _fft(a, -1)
        a *= kernel_hat
        a = _fft(a, +1)
        out[start:stop] = a[:, :n] * (chirp / m)
    return out


# -- export -----------------------------------------------------------------


def write_spectrum_csv(path, spec: Spectrum) -> None:
    z = spec.coefficients
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("s,re,im\n")
        fh.writelines(f"{s},{fmt17(c.real)},{fmt17(c.imag)}\n" for s, c in enumerate(z.tolist(), start=1))


def write_spectrum_binary(path, spec: Spectrum) -> None:
    z = spec.coefficients
    pairs = np.empty((spec.n, 2), dtype="<f8")
    pairs[:, 0] = z.real
    pairs[:, 1] = z.imag
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<Q", spec.n))
        fh.write(pairs.tobytes())


def write_spectrum(path, spec: Spectrum) -> None:
    if Path(path).suffix.lower() == ".bin":
        write_spectrum_binary(path, spec)
    else:
        write_spectrum_csv(path, spec)


def read_spectrum(path) -> Spectrum:
    """Read either export format, sniffing the binary magic."""
    data = Path(path).read_bytes()
    if data.startswith(BINARY_MAGIC):
        if len(data) < 16:
            raise ParseError(f"{path}: truncated header")
        (n,) = struct.unpack("<Q", data[8:16])
        if len(data) != 16 + 16 * n:
            raise ParseError(f"{path}: expected {n} coefficient pairs")
        pairs = np.frombuffer(data, dtype="<f8", offset=16).reshape(n, 2)
        return Spectrum(pairs[:, 0] + 1j * pairs[:, 1])
    try:
        lines = data.decode("utf-8").splitlines()
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: neither {BINARY_MAGIC!r} binary nor UTF-8 CSV") from exc
    if not lines or lines[0].strip() != "s,re,im":
        raise ParseError(f"{path}: missing 's,re,im' header")
    try:
        rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:] if line], dtype=np.float64)
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric field") from exc
    if rows.ndim != 2 or rows.shape[1] != 3 or len(rows) == 0:
        raise ParseError(f"{path}: expected rows of s,re,im")
    if not np.array_equal(rows[:, 0], np.arange(1, len(rows) + 1)):
        raise ParseError(f"{path}: s column must run 1..n")
    return Spectrum(rows[:, 1] + 1j * rows[:, 2])
