"""Rayleigh channel and AWGN generation with seeded sub-streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# stream tags mixed into the seed of every per-point generator
CHANNEL_STREAM = 0
NOISE_STREAM = 1
BITS_STREAM = 2


def substream(master_seed: int, point_index: int, tag: int) -> np.random.Generator:
    """Independent generator derived from ``(master_seed, point_index, tag)``."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(point_index), int(tag)]))


@dataclass(frozen=True)
class NoiseModel:
    snr_db: float

    @property
    def variance(self) -> float:
        """Total complex noise variance per receive antenna (unit symbol energy)."""
        return 10.0 ** (-self.snr_db / 10.0)


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_channel(nt: int, nr: int, rng: np.random.Generator, batch: int | None = None) -> np.ndarray:
    """Nr x Nt matrix of i.i.d. CN(0, 1) entries, or ``batch`` of them stacked."""
    if nt < 1 or nr < 1:
        raise ValueError("nt and nr must be positive")
    shape = (nr, nt) if batch is None else (batch, nr, nt)
    return complex_normal(rng, shape)


def transmit(g, s, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    """y = g s + n with n ~ CN(0, sigma^2 I).

    ``g`` may be a single Nr-vector or a (batch, Nr) array with ``s`` of length batch.
    """
    g = np.asarray(g, dtype=complex)
    s = np.asarray(s, dtype=complex)
    clean = g * (s[..., None] if s.ndim else s)
    if noise.variance == 0.0:
        return clean
    return clean + complex_normal(rng, clean.shape, noise.variance)
