"""Gray-labelled PSK and QAM constellations.

Symbols are stored in label order: ``symbols[l]`` is the point whose bit
label is the ``log2(M)``-bit binary expansion of ``l`` (MSB first). Every
index returned by the demappers is therefore also the transmitted label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


def gray(n):
    return n ^ (n >> 1)


def round_half_away(x):
    """Round to the nearest integer, ties away from zero (elementwise)."""
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))


def _is_pow2(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class Constellation:
    kind: str  # "psk" or "qam"
    order: int
    symbols: np.ndarray
    base_phase: float = 0.0
    # per-dimension amplitude scale; 1 for PSK
    normalization: float = 1.0
    # number of amplitude levels on I and Q (QAM only)
    levels: tuple[int, int] = (0, 0)
    rotation_phase: float = 0.0

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.order))

    @property
    def bit_labels(self) -> list[str]:
        return [format(l, f"0{self.bits_per_symbol}b") for l in range(self.order)]

    @property
    def is_square(self) -> bool:
        return self.kind == "qam" and self.levels[0] == self.levels[1]

    @property
    def name(self) -> str:
        return f"{self.kind}{self.order}"

    def __repr__(self):
        rot = f", rotated={self.rotation_phase:.4f}" if self.rotation_phase else ""
        return f"Constellation({self.name}{rot})"


def _psk(M: int) -> Constellation:
    phi0 = math.pi if M == 2 else 0.0
    pos = np.arange(M)
    symbols = np.empty(M, dtype=complex)
    symbols[gray(pos)] = np.exp(1j * (2 * np.pi * pos / M + phi0))
    return Constellation("psk", M, symbols, base_phase=phi0)


def qam_alpha(M: int) -> float:
    """Normalization factor of square M-QAM, built from its per-dimension levels."""
    r = math.isqrt(M)
    acc = sum((r - 2 * m - 1) ** 2 for m in range(r // 2))
    return math.sqrt(acc / (r / 4))


def _qam(M: int) -> Constellation:
    m = int(math.log2(M))
    bits_i, bits_q = (m + 1) // 2, m // 2
    li, lq = 2**bits_i, 2**bits_q
    ai, aq = np.meshgrid(np.arange(li), np.arange(lq), indexing="ij")
    ai, aq = ai.ravel(), aq.ravel()
    raw = (2 * ai - (li - 1)) + 1j * (2 * aq - (lq - 1))
    if li == lq:
        alpha = qam_alpha(M)
    else:
        alpha = math.sqrt(np.mean(np.abs(raw) ** 2))
    labels = (gray(ai) << bits_q) | gray(aq)
    symbols = np.empty(M, dtype=complex)
    symbols[labels] = raw / alpha
    return Constellation("qam", M, symbols, normalization=alpha, levels=(li, lq))


def build_constellation(kind: str, M: int) -> Constellation:
    """Build a unit-average-power Gray-labelled ``kind`` constellation of order ``M``.

    PSK uses base phase pi for BPSK (label 0 -> -1) and 0 otherwise. QAM is
    square for even ``log2(M)``; odd orders give the rectangular
    ``2^ceil(m/2) x 2^floor(m/2)`` grid (8QAM is 4 x 2).
    """
    kind = kind.lower()
    if not isinstance(M, (int, np.integer)) or not _is_pow2(int(M)):
        raise ValueError(f"constellation order must be a power of two >= 2, got {M}")
    M = int(M)
    if kind == "psk":
        return _psk(M)
    if kind == "qam":
        if M < 4:
            raise ValueError(f"QAM order must be at least 4, got {M}")
        return _qam(M)
    raise ValueError(f"unknown constellation kind {kind!r}")


def rotation_order(c: Constellation) -> int:
    """Largest number of points sharing one magnitude (``M`` for PSK)."""
    if c.kind == "psk":
        return c.order
    mags = np.round(np.abs(c.symbols), 9)
    _, counts = np.unique(mags, return_counts=True)
    return int(counts.max())


def rotate(c: Constellation) -> Constellation:
    if c.rotation_phase != 0.0:
        raise ValueError("constellation is already rotated")
    phase = math.pi / rotation_order(c)
    return replace(c, symbols=c.symbols * np.exp(1j * phase), rotation_phase=phase)


def demap_round(c: Constellation, p):
    """Hard-demap ``p`` by phase or per-dimension amplitude rounding.

    Accepts a scalar or an array of decision variables and returns label
    indices of the same shape.
    """
    if c.rotation_phase != 0.0:
        raise ValueError("demap_round expects an unrotated constellation")
    p = np.asarray(p, dtype=complex)
    M = c.order
    if c.kind == "psk":
        pos = round_half_away((np.angle(p) - c.base_phase) * M / (2 * np.pi))
        pos = pos.astype(np.int64) % M
        out = gray(pos)
    else:
        li, lq = c.levels
        alpha = c.normalization
        lev_i = 2 * round_half_away((alpha * p.real + 1) / 2) - 1
        lev_q = 2 * round_half_away((alpha * p.imag + 1) / 2) - 1
        lev_i = np.clip(lev_i, -(li - 1), li - 1)
        lev_q = np.clip(lev_q, -(lq - 1), lq - 1)
        ai = ((lev_i + li - 1) // 2).astype(np.int64)
        aq = ((lev_q + lq - 1) // 2).astype(np.int64)
        bits_q = int(math.log2(lq))
        out = (gray(ai) << bits_q) | gray(aq)
    return out if out.ndim else int(out)


def nearest_oracle(c: Constellation, p):
    """Exhaustive nearest-point search; ties go to the smallest index."""
    p = np.asarray(p, dtype=complex)
    d = np.abs(p[..., None] - c.symbols) ** 2
    out = np.argmin(d, axis=-1)
    return out if out.ndim else int(out)


def parse_modulation(text: str) -> Constellation:
    """Parse tags like ``psk2``, ``bpsk``, ``qpsk``, ``qam16``, ``16qam``."""
    t = text.strip().lower()
    aliases = {"bpsk": ("psk", 2), "qpsk": ("psk", 4)}
    if t in aliases:
        return build_constellation(*aliases[t])
    for kind in ("psk", "qam"):
        if t.startswith(kind) and t[len(kind):].isdigit():
            return build_constellation(kind, int(t[len(kind):]))
        if t.endswith(kind) and t[: -len(kind)].isdigit():
            return build_constellation(kind, int(t[: -len(kind)]))
    raise ValueError(f"unrecognised modulation {text!r}")
