"""Monte Carlo BER estimation and SNR sweeps."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import channel
from .bounds import BoundResult, bound_curve
from .constellation import Constellation, parse_modulation
from .detectors import DETECTORS, complexity_model, dmld_batch, mld_batch, tmld_batch
from .mapping import PatternBook, build_book, normalize_scheme, throughput

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Scenario:
    scheme: str
    nt: int
    nr: int
    modulation: str = "psk4"
    na: int | None = None
    detector: str = "mld"
    tmld_c: float = 1.5
    snr_db: tuple[float, ...] = (0.0,)
    target_errors: int = 200
    max_bits: int = 20_000_000
    seed: int = 0
    batch: int = 4096

    def __post_init__(self):
        object.__setattr__(self, "scheme", normalize_scheme(self.scheme))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if self.detector not in DETECTORS:
            raise ValueError(f"detector must be one of {DETECTORS}, got {self.detector!r}")
        if self.nr < 1:
            raise ValueError("nr must be positive")
        if self.tmld_c < 1:
            raise ValueError("tmld_c must be >= 1")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ValueError("snr grid must be strictly increasing")
        if self.target_errors < 1 or self.max_bits < 1 or self.batch < 1:
            raise ValueError("target_errors, max_bits and batch must be positive")
        # validates na / nt / modulation eagerly
        self.book, self.constellation

    @cached_property
    def book(self) -> PatternBook:
        return build_book(self.scheme, self.nt, self.na)

    @cached_property
    def constellation(self) -> Constellation:
        return parse_modulation(self.modulation)

    @property
    def m(self) -> int:
        return throughput(self.book, self.constellation)


@dataclass
class PointRecord:
    snr_db: float
    bits: int
    bit_errors: int
    spatial_errors: int
    symbol_errors: int
    mults: float
    converged: bool
    wall_time: float = 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else float("nan")


@dataclass
class SweepResult:
    scenario: Scenario
    points: list[PointRecord] = field(default_factory=list)
    bounds: list[BoundResult] | None = None


def _popcount(v):
    v = np.asarray(v, dtype=np.int64)
    out = np.zeros_like(v)
    while v.any():
        out += v & 1
        v = v >> 1
    return out


def detect(scenario: Scenario, y, H, G):
    """Run the scenario's detector on a batch; returns ``(k, l, mults_per_detection)``."""
    c = scenario.constellation
    nr, n, M = scenario.nr, scenario.book.n, c.order
    if scenario.detector == "mld":
        k, l = mld_batch(y, G, c.symbols)
        mults = np.full(len(y), complexity_model("mld", M, nr, n=n), dtype=float)
    elif scenario.detector == "dmld":
        k, l = dmld_batch(y, G, c)
        mults = np.full(len(y), complexity_model("dmld", M, nr, n=n, kind=c.kind), dtype=float)
    else:
        k, l, size = tmld_batch(y, H, G, c.symbols, scenario.tmld_c)
        mults = 6.0 * M * nr * scenario.nt + 6.0 * size * nr * n
    return k, l, mults


def run_point(scenario: Scenario, snr_db: float, point_index: int = 0) -> PointRecord:
    """Simulate one SNR point until the error target or the bit budget is reached.

    Every channel use draws a fresh channel matrix. Channel, noise and payload
    come from separate generators seeded by (seed, point_index, stream).
    """
    start = time.perf_counter()
    book, c = scenario.book, scenario.constellation
    n, M, m = book.n, c.order, scenario.m
    W = book.weights(c)
    noise = channel.NoiseModel(snr_db)
    rng_h = channel.substream(scenario.seed, point_index, channel.CHANNEL_STREAM)
    rng_n = channel.substream(scenario.seed, point_index, channel.NOISE_STREAM)
    rng_b = channel.substream(scenario.seed, point_index, channel.BITS_STREAM)

    bits = sp_err = sy_err = 0
    mult_sum = 0.0
    while sp_err + sy_err < scenario.target_errors and bits < scenario.max_bits:
        B = min(scenario.batch, math.ceil((scenario.max_bits - bits) / m))
        H = channel.sample_channel(scenario.nt, scenario.nr, rng_h, B)
        k = rng_b.integers(0, n, B)
        l = rng_b.integers(0, M, B)
        G = H @ W
        y = channel.transmit(G[np.arange(B), :, k], c.symbols[l], noise, rng_n)
        kh, lh, mults = detect(scenario, y, H, G)
        sp_err += int(_popcount(k ^ kh).sum())
        sy_err += int(_popcount(l ^ lh).sum())
        mult_sum += float(mults.sum())
        bits += B * m
    uses = bits // m
    rec = PointRecord(
        snr_db=float(snr_db),
        bits=bits,
        bit_errors=sp_err + sy_err,
        spatial_errors=sp_err,
        symbol_errors=sy_err,
        mults=mult_sum / uses if uses else 0.0,
        converged=sp_err + sy_err >= scenario.target_errors,
        wall_time=time.perf_counter() - start,
    )
    log.info("snr %6.2f dB  ber %.3e  errors %d  bits %d%s", rec.snr_db, rec.ber, rec.bit_errors,
             rec.bits, "" if rec.converged else "  (bit budget hit)")
    return rec


def _run_indexed(args):
    scenario, idx, snr = args
    return run_point(scenario, snr, idx)


def sweep(scenario: Scenario, workers: int = 1, with_bounds: bool = True,
          bound_method: str = "quadrature") -> SweepResult:
    """Simulate every SNR point; results do not depend on ``workers``."""
    jobs = [(scenario, i, s) for i, s in enumerate(scenario.snr_db)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_run_indexed, jobs))
    else:
        points = [_run_indexed(j) for j in jobs]
    bounds = None
    if with_bounds:
        try:
            bounds = bound_curve(scenario.book, scenario.constellation, scenario.nr,
                                 scenario.snr_db, bound_method)
        except ValueError as exc:
            log.warning("bounds unavailable: %s", exc)
    return SweepResult(scenario, points, bounds)


def snr_at_ber(snr_db, ber, target: float) -> float:
    """SNR where a decreasing BER curve crosses ``target`` (log-linear interpolation)."""
    snr_db = np.asarray(snr_db, dtype=float)
    lb = np.log10(np.maximum(np.asarray(ber, dtype=float), 1e-300))
    lt = math.log10(target)
    below = np.nonzero(lb <= lt)[0]
    if len(below) == 0 or below[0] == 0:
        raise ValueError(f"curve does not cross {target} inside the SNR grid")
    i = below[0]
    return float(snr_db[i - 1] + (lt - lb[i - 1]) * (snr_db[i] - snr_db[i - 1]) / (lb[i] - lb[i - 1]))
