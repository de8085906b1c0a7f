"""Fibonacci words, their numeric realizations, and the perturbations applied to them.

Iteration convention: W_1 = "S", W_2 = "L", W_m = W_{m-1} + W_{m-2}, so that
len(W_m) = F(m) and W_m is a prefix of W_{m+1}.  Dropping the last F(m-2)
symbols of W_m leaves exactly W_{m-1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from fibspec.errors import DomainError, ParseError

PHI = (1.0 + math.sqrt(5.0)) / 2.0

MAX_FIB_INDEX = 90
MAX_SUBST_ITERATION = 40
MAX_FLOOR_LENGTH = 10**7


def _phi_fraction_fixed() -> int:
    # round((phi - 1) * 2**64) using exact integer square roots
    scaled = (math.isqrt(5 << 256) - (1 << 128)) // 2  # ~ (phi - 1) * 2**128
    return (scaled + (1 << 63)) >> 64


PHI_FRAC_Q64 = _phi_fraction_fixed()
PHI_Q64 = (1 << 64) + PHI_FRAC_Q64  # round(phi * 2**64)
_GUARD = 1 << 32
_MASK32 = np.uint64(0xFFFFFFFF)


def fibonacci_number(m: int) -> int:
    """F(m) with F(1) = F(2) = 1, exact for 1 <= m <= 90."""
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= MAX_FIB_INDEX:
        raise DomainError(f"fibonacci index must be in 1..{MAX_FIB_INDEX}, got {m!r}")
    a, b = 1, 1
    for _ in range(int(m) - 2):
        a, b = b, a + b
    return b if m > 1 else a


def floor_phi(r: int) -> int:
    """Exact floor(r * phi) for 0 <= r < 2**32 via 128-bit fixed point."""
    if not 0 <= r < (1 << 32):
        raise DomainError(f"r must be in [0, 2**32), got {r}")
    prod = r * PHI_Q64
    frac = prod & ((1 << 64) - 1)
    if r and not (_GUARD < frac < (1 << 64) - _GUARD):
        raise ArithmeticError(f"fixed-point guard failed at r={r}")
    return prod >> 64


def floor_phi_array(r: np.ndarray) -> np.ndarray:
    """Vectorised floor_phi for 0 < r < 2**31, in 32-bit limbs of uint64."""
    r = np.asarray(r, dtype=np.uint64)
    if r.size and (r.min() < 1 or r.max() >= (1 << 31)):
        raise DomainError("r must be in [1, 2**31)")
    hi = np.uint64(PHI_FRAC_Q64 >> 32)
    lo = np.uint64(PHI_FRAC_Q64 & 0xFFFFFFFF)
    rl = r * lo
    t = r * hi + (rl >> np.uint64(32))
    frac = ((t & _MASK32) << np.uint64(32)) | (rl & _MASK32)
    top = frac >> np.uint64(32)
    if np.any(top == 0) or np.any(top == _MASK32):
        bad = int(r[(top == 0) | (top == _MASK32)][0])
        raise ArithmeticError(f"fixed-point guard failed at r={bad}")
    return (r + (t >> np.uint64(32))).astype(np.int64)


@dataclass(frozen=True)
class SymbolWord:
    symbols: str
    iteration: int | None = None

    def __post_init__(self):
        if self.symbols.strip("LS"):
            raise DomainError("symbols must be drawn from {L, S}")

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return self.symbols

    def count(self, symbol: str) -> int:
        return self.symbols.count(symbol)

    def as_bytes(self) -> np.ndarray:
        return np.frombuffer(self.symbols.encode("ascii"), dtype=np.uint8)


def word_by_substitution(m: int) -> SymbolWord:
    """W_m by repeated concatenation (equivalently L -> LS, S -> L from "L")."""
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= MAX_SUBST_ITERATION:
        raise DomainError(f"iteration must be in 1..{MAX_SUBST_ITERATION}, got {m!r}")
    if m == 1:
        return SymbolWord("S", 1)
    prev, cur = "S", "L"
    for _ in range(int(m) - 2):
        prev, cur = cur, cur + prev
    return SymbolWord(cur, int(m))


def word_by_floor_formula(n: int) -> SymbolWord:
    """Length-n word from the Beatty differences floor((r+1)phi) - floor(r phi)."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_FLOOR_LENGTH:
        raise DomainError(f"length must be in 1..{MAX_FLOOR_LENGTH}, got {n!r}")
    floors = floor_phi_array(np.arange(1, int(n) + 2, dtype=np.uint64))
    diffs = np.diff(floors)
    codes = np.where(diffs == 2, ord("L"), ord("S")).astype(np.uint8)
    return SymbolWord(codes.tobytes().decode("ascii"))


@dataclass(frozen=True)
class Perturbation:
    """One chain modification; build with the classmethods rather than directly."""

    kind: str
    k: int | None = None
    seed: int | None = None
    ratio: float | None = None

    KINDS = (
        "TruncateHead",
        "TruncateTail",
        "ZeroFirst",
        "ReplaceFirstL",
        "FlipLastTwo",
        "ScrambleTail",
        "SetRatio",
        "Identity",
    )

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise DomainError(f"unknown perturbation kind {self.kind!r}")
        if self.kind in ("TruncateHead", "TruncateTail", "ScrambleTail"):
            if self.k is None or self.k < 1:
                raise DomainError(f"{self.kind} needs k >= 1")
        if self.kind == "ScrambleTail":
            if self.seed is None or not 0 <= self.seed < (1 << 64):
                raise DomainError("ScrambleTail needs a 64-bit unsigned seed")
        if self.kind == "SetRatio":
            if self.ratio is None or not self.ratio > 1:
                raise DomainError("SetRatio needs ratio > 1")

    @classmethod
    def truncate_head(cls, k: int) -> Perturbation:
        return cls("TruncateHead", k=k)

    @classmethod
    def truncate_tail(cls, k: int) -> Perturbation:
        return cls("TruncateTail", k=k)

    @classmethod
    def zero_first(cls) -> Perturbation:
        return cls("ZeroFirst")

    @classmethod
    def replace_first_l(cls) -> Perturbation:
        return cls("ReplaceFirstL")

    @classmethod
    def flip_last_two(cls) -> Perturbation:
        return cls("FlipLastTwo")

    @classmethod
    def scramble_tail(cls, k: int, seed: int) -> Perturbation:
        return cls("ScrambleTail", k=k, seed=seed)

    @classmethod
    def set_ratio(cls, ratio: float) -> Perturbation:
        return cls("SetRatio", ratio=float(ratio))

    @classmethod
    def identity(cls) -> Perturbation:
        return cls("Identity")

    def describe(self) -> str:
        if self.kind in ("TruncateHead", "TruncateTail"):
            return f"{self.kind}({self.k})"
        if self.kind == "ScrambleTail":
            return f"ScrambleTail({self.k}, seed={self.seed})"
        if self.kind == "SetRatio":
            return f"SetRatio({fmt17(self.ratio)})"
        return self.kind


@dataclass(frozen=True, eq=False)
class Chain:
    values: np.ndarray
    long_length: float
    short_length: float
    provenance: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def ratio(self) -> float:
        return self.long_length / self.short_length

    def long_mask(self) -> np.ndarray:
        return self.values == self.long_length

    def same_values(self, other: Chain) -> bool:
        return self.values.shape == other.values.shape and self.values.tobytes() == other.values.tobytes()


def realize(word: SymbolWord | str, L: float = PHI, S: float = 1.0) -> Chain:
    """Map L -> L and S -> S.  With (phi, 1) this is u_r = (phi-1) d_r + (2-phi)."""
    if isinstance(word, str):
        word = SymbolWord(word)
    if not (S > 0 and L > 0):
        raise DomainError("segment lengths must be positive")
    if not L > S:
        raise DomainError("long length must exceed short length")
    codes = word.as_bytes()
    values = np.where(codes == ord("L"), float(L), float(S))
    how = f"subst(m={word.iteration})" if word.iteration is not None else f"word(n={len(word)})"
    return Chain(values, float(L), float(S), (how,))


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood); all arithmetic mod 2**64.

    next(): state += 0x9E3779B97F4A7C15; z = state;
            z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) * 0x94D049BB133111EB;
            return z ^ z>>31
    """

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self._MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self._MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Unbiased integer in [0, bound) by rejection."""
        if bound < 1:
            raise DomainError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = self.next()
            if x < limit:
                return x % bound


def seeded_permutation(k: int, seed: int) -> list[int]:
    """Fisher-Yates shuffle of range(k) driven by SplitMix64(seed), i from k-1 down to 1."""
    perm = list(range(k))
    rng = SplitMix64(seed)
    for i in range(k - 1, 0, -1):
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def perturb(chain: Chain, p: Perturbation) -> Chain:
    vals = np.array(chain.values)
    n = len(vals)
    L, S = chain.long_length, chain.short_length
    kind = p.kind
    if kind in ("TruncateHead", "TruncateTail", "ScrambleTail") and p.k >= n:
        raise DomainError(f"{p.describe()} needs k < n = {n}")

    if kind == "TruncateHead":
        vals = vals[p.k:]
    elif kind == "TruncateTail":
        vals = vals[: n - p.k]
    elif kind == "ZeroFirst":
        vals[0] = 0.0
    elif kind == "ReplaceFirstL":
        if vals[0] != L:
            raise DomainError("first segment is not L")
        vals[0] = S
    elif kind == "FlipLastTwo":
        if n < 2:
            raise DomainError("FlipLastTwo needs at least two segments")
        vals[-2], vals[-1] = vals[-1], vals[-2]
    elif kind == "ScrambleTail":
        tail = vals[n - p.k:].copy()
        vals[n - p.k:] = tail[seeded_permutation(p.k, p.seed)]
    elif kind == "SetRatio":
        is_long = vals == L
        is_short = vals == S
        vals = np.where(is_long, p.ratio, np.where(is_short, 1.0, vals))
        L, S = p.ratio, 1.0
    return Chain(vals, L, S, chain.provenance + (p.describe(),))


# -- file formats -----------------------------------------------------------

CHAIN_MAGIC = "fibchain v1"


def fmt17(x: float) -> str:
    return f"{float(x):.17g}"


def write_chain_file(path, word: SymbolWord, L: float, S: float) -> None:
    text = f"{CHAIN_MAGIC}; L={fmt17(L)}; S={fmt17(S)}\n{word.symbols}\n"
    Path(path).write_text(text, encoding="utf-8")


def read_chain_file(path) -> tuple[SymbolWord, float, float]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 text") from exc
    lines = text.splitlines()
    if len(lines) < 2:
        raise ParseError(f"{path}: expected header and symbol lines")
    parts = [part.strip() for part in lines[0].split(";")]
    if parts[0] != CHAIN_MAGIC or len(parts) != 3:
        raise ParseError(f"{path}: bad header {lines[0]!r}")
    lengths = {}
    for part in parts[1:]:
        key, sep, value = part.partition("=")
        if not sep or key not in ("L", "S"):
            raise ParseError(f"{path}: bad header field {part!r}")
        try:
            lengths[key] = float(value)
        except ValueError as exc:
            raise ParseError(f"{path}: bad number {value!r}") from exc
    if set(lengths) != {"L", "S"}:
        raise ParseError(f"{path}: header needs both L and S")
    symbols = lines[1].strip()
    if not symbols or symbols.strip("LS"):
        raise ParseError(f"{path}: symbol line must be a non-empty L/S string")
    return SymbolWord(symbols), lengths["L"], lengths["S"]


def write_chain_csv(path, chain: Chain) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("index,value\n")
        for i, v in enumerate(chain.values, start=1):
            fh.write(f"{i},{fmt17(v)}\n")
