"""Spatial codebooks: which transmit antennas carry the symbol for each spatial index.

Antennas are numbered from 1 as in the usual mapping tables. The spatial
index ``k`` of a pattern is the integer value of its spatial bits (MSB first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .constellation import Constellation, rotate, rotation_order

SCHEMES = ("dtaar", "dtaad", "lut", "gsm", "sm")

_ALIASES = {
    "dtaa-r": "dtaar",
    "dtaa_r": "dtaar",
    "dtaa-d": "dtaad",
    "dtaa_d": "dtaad",
}


def normalize_scheme(name: str) -> str:
    s = name.strip().lower()
    s = _ALIASES.get(s, s)
    if s not in SCHEMES:
        raise ValueError(f"unknown scheme {name!r}; expected one of {', '.join(SCHEMES)}")
    return s


@dataclass(frozen=True, eq=False)
class PatternBook:
    scheme: str
    nt: int
    patterns: tuple[tuple[int, ...], ...]
    rotated: tuple[bool, ...]

    @property
    def n(self) -> int:
        return len(self.patterns)

    @property
    def spatial_bits(self) -> int:
        return int(math.log2(self.n))

    @property
    def activation(self) -> np.ndarray:
        """Nt x N 0/1 matrix whose k-th column marks the active antennas of pattern k."""
        u = np.zeros((self.nt, self.n))
        for k, pat in enumerate(self.patterns):
            u[[i - 1 for i in pat], k] = 1.0
        return u

    def weights(self, constellation: Constellation) -> np.ndarray:
        """Activation matrix with the rotated column multiplied by its phase factor."""
        rho = np.ones(self.n, dtype=complex)
        if any(self.rotated):
            rho[list(self.rotated)] = np.exp(1j * math.pi / rotation_order(constellation))
        return self.activation * rho


@dataclass(frozen=True)
class BitBlock:
    spatial_bits: tuple[int, ...]
    symbol_bits: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.spatial_bits) + len(self.symbol_bits)

    @classmethod
    def split(cls, bits, spatial: int) -> "BitBlock":
        bits = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        return cls(bits[:spatial], bits[spatial:])

    @classmethod
    def from_indices(cls, k: int, l: int, spatial: int, symbol: int) -> "BitBlock":
        return cls(int_to_bits(k, spatial), int_to_bits(l, symbol))

    def __str__(self):
        return "".join(map(str, self.spatial_bits + self.symbol_bits))


def int_to_bits(v: int, width: int) -> tuple[int, ...]:
    return tuple((v >> (width - 1 - i)) & 1 for i in range(width))


def bits_to_int(bits) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def _support(value: int, width: int) -> tuple[int, ...]:
    # bit i from the left drives antenna i
    return tuple(i + 1 for i in range(width) if (value >> (width - 1 - i)) & 1)


def _lut_patterns(nt: int) -> list[tuple[int, ...]]:
    need = 2 ** (nt - 1)
    chosen: list[tuple[int, ...]] = []
    for na in range(1, nt + 1):
        cands = list(combinations(range(1, nt + 1), na))
        same: list[set] = []
        while cands and len(chosen) < need:
            best, best_profile = 0, None
            for i, cand in enumerate(cands):
                cs = set(cand)
                # symmetric difference size = Hamming distance of indicator vectors
                profile = sorted(len(cs ^ s) for s in same)
                if best_profile is None or profile > best_profile:
                    best, best_profile = i, profile
            pick = cands.pop(best)
            chosen.append(pick)
            same.append(set(pick))
        if len(chosen) == need:
            break
    return chosen


def build_book(scheme: str, nt: int, na: int | None = None) -> PatternBook:
    """Build the ordered pattern book of ``scheme`` for ``nt`` transmit antennas.

    LUT picks ``2^(nt-1)`` patterns by increasing number of active antennas;
    within one size it greedily takes the pattern whose sorted list of Hamming
    distances to the already chosen same-size patterns is lexicographically
    largest (first in lexicographic pattern order on ties). GSM/SM keep the
    first ``2^floor(log2 C(nt, na))`` combinations in lexicographic order.
    """
    scheme = normalize_scheme(scheme)
    if nt < 2 and scheme != "gsm":
        raise ValueError(f"nt must be at least 2, got {nt}")
    if scheme == "sm":
        na = 1 if na is None else na
        if na != 1:
            raise ValueError("sm activates exactly one antenna (na=1)")
    if scheme in ("gsm", "sm"):
        if na is None:
            raise ValueError("na is required for gsm")
        if not 1 <= na <= nt:
            raise ValueError(f"na must be in [1, {nt}], got {na}")
        ms = int(math.floor(math.log2(math.comb(nt, na))))
        pats = list(combinations(range(1, nt + 1), na))[: 2**ms]
        return PatternBook(scheme, nt, tuple(pats), (False,) * len(pats))
    if scheme == "dtaar":
        pats = [tuple(range(1, nt + 1))] + [_support(b, nt) for b in range(1, 2**nt)]
        flags = (True,) + (False,) * (2**nt - 1)
        return PatternBook(scheme, nt, tuple(pats), flags)
    if scheme == "dtaad":
        pats = [(nt,)] + [_support(b, nt - 1) for b in range(1, 2 ** (nt - 1))]
        return PatternBook(scheme, nt, tuple(pats), (False,) * len(pats))
    pats = _lut_patterns(nt)
    return PatternBook(scheme, nt, tuple(pats), (False,) * len(pats))


def throughput(book: PatternBook, constellation: Constellation) -> int:
    return book.spatial_bits + constellation.bits_per_symbol


def encode(book: PatternBook, constellation: Constellation, bits):
    """Map one bit block to ``(k, s, x)``: pattern index, transmitted symbol, Nt-vector.

    ``bits`` is a :class:`BitBlock` or a flat 0/1 sequence of length m.
    """
    ms, ma = book.spatial_bits, constellation.bits_per_symbol
    block = bits if isinstance(bits, BitBlock) else BitBlock.split(bits, ms)
    if len(block.spatial_bits) != ms or len(block.symbol_bits) != ma:
        raise ValueError(
            f"expected {ms} spatial + {ma} symbol bits, got "
            f"{len(block.spatial_bits)} + {len(block.symbol_bits)}"
        )
    k = bits_to_int(block.spatial_bits)
    l = bits_to_int(block.symbol_bits)
    table = rotate(constellation).symbols if book.rotated[k] else constellation.symbols
    s = complex(table[l])
    x = np.zeros(book.nt, dtype=complex)
    x[[i - 1 for i in book.patterns[k]]] = s
    return k, s, x


def decode(book: PatternBook, constellation: Constellation, k: int, l: int) -> BitBlock:
    return BitBlock.from_indices(k, l, book.spatial_bits, constellation.bits_per_symbol)


@dataclass(frozen=True, eq=False)
class EquivalentChannel:
    G: np.ndarray
    H: np.ndarray
    overlap: np.ndarray


def overlap_matrix(book: PatternBook, constellation: Constellation) -> np.ndarray:
    """C[k, j] = rho_k conj(rho_j) |S_k & S_j|, i.e. E[G^T G^*] / Nr."""
    w = book.weights(constellation)
    return w.T @ w.conj()


def equivalent_channel(H, book: PatternBook, constellation: Constellation) -> EquivalentChannel:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[1] != book.nt:
        raise ValueError(f"H must be Nr x {book.nt}, got shape {H.shape}")
    G = H @ book.weights(constellation)
    return EquivalentChannel(G, H, overlap_matrix(book, constellation))


def mapping_table(book: PatternBook, constellation: Constellation) -> list[tuple[str, str, complex]]:
    """All (input bits, active antennas, transmitted symbol) rows in bit order."""
    rows = []
    m = throughput(book, constellation)
    for v in range(2**m):
        bits = int_to_bits(v, m)
        k, s, _ = encode(book, constellation, bits)
        rows.append(("".join(map(str, bits)), ",".join(map(str, book.patterns[k])), s))
    return rows
