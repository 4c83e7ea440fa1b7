"""Analytical BER upper bounds for MLD over i.i.d. Rayleigh fading.

Noise convention: ``noise_var`` is the total complex noise variance per
receive antenna, so the average symbol SNR is ``1 / noise_var``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .constellation import Constellation
from .mapping import PatternBook, overlap_matrix

METHODS = ("quadrature", "chernoff")


def popcount_table(n: int) -> np.ndarray:
    """Hamming distances between all pairs of integers in ``range(n)``."""
    x = np.arange(n)
    v = x[:, None] ^ x[None, :]
    out = np.zeros_like(v)
    while v.any():
        out += v & 1
        v = v >> 1
    return out


def mu(x):
    x = np.asarray(x, dtype=float)
    return 0.5 * (1.0 - np.sqrt(x / (1.0 + x)))


def rayleigh_pep(x, nr: int):
    """E[Q(sqrt(2 gamma))] for gamma a sum of ``nr`` i.i.d. exponentials of mean ``x``."""
    m = mu(x)
    acc = sum(comb(nr - 1 + n, n) * (1.0 - m) ** n for n in range(nr))
    return m**nr * acc


def classic_union_bound(book: PatternBook, constellation: Constellation, nr: int, noise_var: float,
                        per_bit: bool = False) -> float:
    """Classic union bound: pairwise bit-error counts weighted by Rayleigh PEPs.

    The per-pair PEP depends only on the symbol energies through
    ``(|s_l|^2 + |s_j|^2) / (4 noise_var)``. The default normalization is
    ``1 / (M N)``, the expected number of erroneous bits per block; pass
    ``per_bit=True`` to further divide by the block length.
    """
    N, M = book.n, constellation.order
    e = np.abs(constellation.symbols) ** 2
    pep = rayleigh_pep((e[:, None] + e[None, :]) / (4.0 * noise_var), nr)
    hs = popcount_table(N)
    ha = popcount_table(M)
    # sum over k, j, l, i of (hs[k, j] + ha[l, i]) pep[l, i]; the identical pair has weight 0
    total = hs.sum() * pep.sum() + N * N * (ha * pep).sum()
    ub = total / (M * N)
    if per_bit:
        ub /= math.log2(M * N)
    return float(ub)


def mgf_gamma(cov, d, t, nr: int):
    """MGF of gamma = ||G d||^2 at ``t`` in the rank-one form (1 + t d^H C d)^(-nr)."""
    cov = np.asarray(cov)
    d = np.asarray(d, dtype=complex)
    q = np.vdot(d, cov @ d)
    if q.real < -1e-9 * max(1.0, float(np.abs(cov).max())):
        raise ValueError(f"d^H C d = {q.real} < 0: covariance is not positive semidefinite")
    return (1.0 + np.asarray(t) * max(q.real, 0.0)) ** (-nr)


def mgf_gamma_det(cov, d, t, nr: int) -> float:
    """Same MGF from the full determinant det[I + t (I_nr (x) C)(I_nr (x) d d^H)]^(-1)."""
    cov = np.asarray(cov, dtype=complex)
    d = np.asarray(d, dtype=complex)
    eye = np.eye(nr)
    A = np.kron(eye, cov) @ np.kron(eye, np.outer(d, d.conj()))
    det = np.linalg.det(np.eye(len(A)) + t * A)
    return float(1.0 / det.real)


def pair_difference(n: int, k: int, j: int, s_k: complex = 1.0, s_j: complex = 1.0) -> np.ndarray:
    """Difference vector d for the pair (k, s_k) -> (j, s_j).

    Conjugated so that ``d^H C d`` with the overlap matrix ``C`` equals
    ``E||g_k s_k - g_j s_j||^2 / Nr``.
    """
    d = np.zeros(n, dtype=complex)
    d[k] += s_k
    d[j] -= s_j
    return d.conj()


def gauss_legendre(nodes: int = 64):
    """Nodes and weights on [0, pi/2]."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    return (x + 1.0) * np.pi / 4.0, w * np.pi / 4.0


def craig_average(q, scale: float, nr: int, method: str = "quadrature", nodes: int = 64):
    """(1/pi) int_0^{pi/2} (1 + q scale / sin^2 theta)^(-nr) dtheta, elementwise in ``q``.

    ``chernoff`` replaces the integral by half the integrand at theta = pi/2.
    """
    q = np.asarray(q, dtype=float)
    # grouping key; q values that agree to 1e-12 share one integral
    uq, inv = np.unique(np.round(q, 12), return_inverse=True)
    if method == "chernoff":
        vals = 0.5 * (1.0 + uq * scale) ** (-nr)
    elif method == "quadrature":
        th, w = gauss_legendre(nodes)
        t = scale / np.sin(th) ** 2
        vals = ((1.0 + uq[:, None] * t[None, :]) ** (-nr)) @ w / np.pi
    else:
        raise ValueError(f"unknown method {method!r}")
    return vals[inv].reshape(q.shape)


def psk_ber_rayleigh(M: int, noise_var: float, nr: int) -> float:
    """Gray M-PSK BER with nr-branch MRC (nearest-neighbour approximation for M > 4)."""
    ks = np.arange(1, max(M // 4, 1) + 1)
    x = np.sin((2 * ks - 1) * np.pi / M) ** 2 / noise_var
    return float(2.0 * rayleigh_pep(x, nr).sum() / max(math.log2(M), 2))


def qam_ber_rayleigh(M: int, noise_var: float, nr: int) -> float:
    """Exact Gray square M-QAM BER with nr-branch MRC."""
    r = math.isqrt(M)
    if r * r != M:
        raise ValueError(f"closed form needs square QAM, got M={M}")
    total = 0.0
    for l in range(1, int(math.log2(M)) // 2 + 1):
        for k in range(int((1 - 2.0**-l) * r)):
            f = 2 ** (l - 1) * k / r
            sign = (-1) ** math.floor(f)
            weight = 2 ** (l - 1) - math.floor(f + 0.5)
            x = 3 * (2 * k + 1) ** 2 / (2 * noise_var * (M - 1))
            total += sign * weight * float(rayleigh_pep(x, nr))
    return 4.0 / (r * math.log2(M)) * total


def modulation_ber_rayleigh(constellation: Constellation, noise_var: float, nr: int) -> float:
    if constellation.kind == "psk":
        return psk_ber_rayleigh(constellation.order, noise_var, nr)
    if constellation.is_square:
        return qam_ber_rayleigh(constellation.order, noise_var, nr)
    raise ValueError(f"no closed-form BER for {constellation.name}")


@dataclass(frozen=True)
class BoundResult:
    snr_db: float
    classic_ub: float
    improved_ub: float
    p_signal: float
    p_spatial: float
    p_joint: float
    method: str


def improved_components(book: PatternBook, constellation: Constellation, nr: int, noise_var: float,
                        method: str = "quadrature", nodes: int = 64) -> tuple[float, float, float]:
    """Signal, spatial and joint terms of the improved bound.

    signal: k = j (pattern right, symbol wrong), via the closed-form modulation BER;
    spatial: k != j with the same symbol; joint: k != j and l != i.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    N, M = book.n, constellation.order
    m = math.log2(M * N)
    s = constellation.symbols
    C = overlap_matrix(book, constellation)
    hs = popcount_table(N)
    ha = popcount_table(M)
    scale = 1.0 / (4.0 * noise_var)

    p_signal = math.log2(M) / m * modulation_ber_rayleigh(constellation, noise_var, nr)

    off = ~np.eye(N, dtype=bool)
    diag = C.diagonal().real
    q_sp = diag[:, None] + diag[None, :] - 2.0 * C.real  # (N, N)
    e = np.abs(s) ** 2
    # spatial: q scales with |s_l|^2
    sp = 0.0
    for l in range(M):
        psi = craig_average(q_sp * e[l], scale, nr, method, nodes)
        sp += (hs * psi)[off].sum()
    p_spatial = sp / (M * N * m)

    # joint: q = |s_l|^2 C_kk + |s_i|^2 C_jj - 2 Re(s_l conj(s_i) C_kj)
    cross = s[:, None] * s.conj()[None, :]  # (l, i)
    q = (
        e[None, :, None, None] * diag[:, None, None, None]
        + e[None, None, None, :] * diag[None, None, :, None]
        - 2.0 * (cross[None, :, None, :] * C[:, None, :, None]).real
    )  # axes (k, l, j, i)
    q = np.maximum(q, 0.0)
    weight = hs[:, None, :, None] + ha[None, :, None, :]
    mask = off[:, None, :, None] & ~np.eye(M, dtype=bool)[None, :, None, :]
    ups = craig_average(q[mask], scale, nr, method, nodes)
    p_joint = float((weight[mask] * ups).sum()) / (M * N * m)
    return p_signal, float(p_spatial), p_joint


def improved_bound(book: PatternBook, constellation: Constellation, nr: int, noise_var: float,
                   method: str = "quadrature", nodes: int = 64) -> float:
    return sum(improved_components(book, constellation, nr, noise_var, method, nodes))


def bound_curve(book: PatternBook, constellation: Constellation, nr: int, snr_db,
                method: str = "quadrature", nodes: int = 64) -> list[BoundResult]:
    out = []
    for snr in snr_db:
        nv = 10.0 ** (-snr / 10.0)
        ps, pp, pj = improved_components(book, constellation, nr, nv, method, nodes)
        cub = classic_union_bound(book, constellation, nr, nv)
        out.append(BoundResult(float(snr), cub, ps + pp + pj, ps, pp, pj, method))
    return out
