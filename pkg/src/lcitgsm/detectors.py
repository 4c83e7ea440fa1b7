"""MLD, two-stage near-ML (TMLD) and decoupled ML (DMLD) detection.

The batch functions take ``y`` of shape (B, Nr) and ``G`` of shape (B, Nr, N)
and return integer arrays ``(k, l)``. The single-observation wrappers return a
:class:`DetectionDecision`. Ties resolve to the lexicographically smallest
``(k, l)`` everywhere.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .constellation import Constellation, demap_round
from .mapping import BitBlock

log = logging.getLogger(__name__)

DETECTORS = ("mld", "tmld", "dmld")


@dataclass(frozen=True)
class DetectionDecision:
    k: int
    l: int
    symbol: complex
    bits: BitBlock
    metric: float
    mults: float


def _metric(ynorm, z, gnorm, s):
    # ||y - g s||^2 expanded as ||y||^2 - 2 Re(s* g^H y) + ||g||^2 |s|^2
    return ynorm - 2.0 * (np.conj(s) * z).real + gnorm * (np.abs(s) ** 2)


def _stats(y, G):
    z = np.einsum("bnk,bn->bk", G.conj(), y)
    gnorm = np.einsum("bnk,bnk->bk", G.real, G.real) + np.einsum("bnk,bnk->bk", G.imag, G.imag)
    ynorm = (np.abs(y) ** 2).sum(axis=-1)
    return z, gnorm, ynorm


def _check(y, G):
    y = np.asarray(y, dtype=complex)
    G = np.asarray(G, dtype=complex)
    if G.ndim != 3 or y.ndim != 2 or G.shape[:2] != y.shape:
        raise ValueError(f"shape mismatch: y {y.shape}, G {G.shape}")
    return y, G


def mld_batch(y, G, symbols):
    """Exhaustive search over all (k, l); returns ``(k, l)`` arrays."""
    y, G = _check(y, G)
    z, gnorm, ynorm = _stats(y, G)
    met = _metric(ynorm[:, None, None], z[:, :, None], gnorm[:, :, None], symbols[None, None, :])
    flat = met.reshape(len(y), -1).argmin(axis=1)
    M = len(symbols)
    return flat // M, flat % M


def tmld_batch(y, H, G, symbols, c: float):
    """Two-stage near-ML detection.

    Stage one searches single-antenna columns of ``H`` jointly over antenna and
    symbol; symbols whose residual on the winning antenna is within a factor
    ``c`` of the minimum form the candidate set for a full search over ``G``.
    Returns ``(k, l, candidate_count)``.
    """
    if not c >= 1:
        raise ValueError(f"tmld constant c must be >= 1, got {c}")
    y, G = _check(y, G)
    H = np.asarray(H, dtype=complex)
    B, M = len(y), len(symbols)
    zh, hnorm, ynorm = _stats(y, H)
    met1 = _metric(ynorm[:, None, None], zh[:, :, None], hnorm[:, :, None], symbols[None, None, :])
    met1 = np.maximum(met1, 0.0)
    flat = met1.reshape(B, -1).argmin(axis=1)
    kp = flat // M
    row = met1[np.arange(B), kp]
    chi = row <= c * row.min(axis=1, keepdims=True)
    z, gnorm, _ = _stats(y, G)
    met = _metric(ynorm[:, None, None], z[:, :, None], gnorm[:, :, None], symbols[None, None, :])
    met = np.where(chi[:, None, :], met, np.inf)
    flat = met.reshape(B, -1).argmin(axis=1)
    return flat // M, flat % M, chi.sum(axis=1)


def dmld_batch(y, G, constellation: Constellation):
    """Per-pattern matched filter + rounding demapper, then a search over k only."""
    y, G = _check(y, G)
    z, gnorm, ynorm = _stats(y, G)
    dead = gnorm == 0
    if dead.any():
        log.warning("skipping %d zero-norm equivalent channel columns", int(dead.sum()))
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(dead, 0.0, z / np.where(dead, 1.0, gnorm))
    lk = demap_round(constellation, p)
    sk = constellation.symbols[lk]
    met = _metric(ynorm[:, None], z, gnorm, sk)
    met = np.where(dead, np.inf, met)
    k = met.argmin(axis=1)
    return k, lk[np.arange(len(y)), k]


def complexity_model(detector: str, M: int, nr: int, nt: int | None = None, n: int | None = None,
                     beta: float | None = None, kind: str = "psk", na: int | None = None) -> float:
    """Real-valued multiplications per detection.

    ``mld`` 6 M Nr N; ``tmld`` 6 M Nr Nt + 6 beta M Nr N (beta defaults to 1/M,
    the c = 1 value); ``dmld`` (6 Nr + 10) N for PSK and (6 Nr + 12) N for QAM;
    ``gsm`` full-search GSM with 2^floor(log2 C(Nt, Na)) patterns.
    """
    det = detector.lower()
    if det == "mld":
        return 6 * M * nr * n
    if det == "tmld":
        if beta is None:
            beta = 1.0 / M
        if not 1.0 / M - 1e-12 <= beta <= 1.0 + 1e-12:
            raise ValueError(f"beta must lie in [1/M, 1], got {beta}")
        return 6 * M * nr * nt + 6 * beta * M * nr * n
    if det == "dmld":
        return (6 * nr + (10 if kind == "psk" else 12)) * n
    if det == "gsm":
        if na is None:
            raise ValueError("gsm complexity needs na")
        return 6 * M * nr * 2 ** int(math.floor(math.log2(math.comb(nt, na))))
    raise ValueError(f"unknown detector {detector!r}")


def _decision(y, G, k, l, symbols, spatial_bits, mults):
    s = complex(symbols[l])
    metric = float(np.sum(np.abs(y - G[:, k] * s) ** 2))
    bits = BitBlock.from_indices(int(k), int(l), spatial_bits, int(math.log2(len(symbols))))
    return DetectionDecision(int(k), int(l), s, bits, metric, float(mults))


def _single(y, G):
    y = np.asarray(y, dtype=complex)
    G = np.asarray(G, dtype=complex)
    if G.ndim != 2 or y.shape != (G.shape[0],):
        raise ValueError(f"shape mismatch: y {y.shape}, G {G.shape}")
    return y, G


def _spatial_bits(n):
    return int(math.log2(n))


def mld(y, G, constellation: Constellation) -> DetectionDecision:
    y, G = _single(y, G)
    k, l = mld_batch(y[None], G[None], constellation.symbols)
    nr, n = G.shape
    mults = complexity_model("mld", constellation.order, nr, n=n)
    return _decision(y, G, k[0], l[0], constellation.symbols, _spatial_bits(n), mults)


def tmld(y, H, G, constellation: Constellation, c: float) -> DetectionDecision:
    y, G = _single(y, G)
    H = np.asarray(H, dtype=complex)
    k, l, size = tmld_batch(y[None], H[None], G[None], constellation.symbols, c)
    nr, n = G.shape
    M = constellation.order
    mults = complexity_model("tmld", M, nr, H.shape[1], n, beta=size[0] / M)
    return _decision(y, G, k[0], l[0], constellation.symbols, _spatial_bits(n), mults)


def dmld(y, G, constellation: Constellation) -> DetectionDecision:
    y, G = _single(y, G)
    k, l = dmld_batch(y[None], G[None], constellation)
    nr, n = G.shape
    mults = complexity_model("dmld", constellation.order, nr, n=n, kind=constellation.kind)
    return _decision(y, G, k[0], l[0], constellation.symbols, _spatial_bits(n), mults)
