import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from lcitgsm.bounds import (
    bound_curve,
    classic_union_bound,
    craig_average,
    improved_bound,
    improved_components,
    mgf_gamma,
    mgf_gamma_det,
    mu,
    pair_difference,
    psk_ber_rayleigh,
    qam_ber_rayleigh,
    rayleigh_pep,
)
from lcitgsm.channel import sample_channel
from lcitgsm.constellation import build_constellation
from lcitgsm.harness import Scenario, run_point
from lcitgsm.mapping import build_book, overlap_matrix


def hamming(a, b):
    return bin(a ^ b).count("1")


def fading_average(f, nr):
    """E[f(g)] for g ~ Gamma(nr, 1), the MRC gain of nr unit-power branches."""
    return integrate.quad(lambda g: f(g) * stats.gamma.pdf(g, nr), 0, np.inf, limit=200)[0]


def qam_exact_ber_awgn(con, sigma):
    """Gray QAM bit error rate by enumerating independent I/Q decision regions."""
    re, im = np.round(con.symbols.real, 9), np.round(con.symbols.imag, 9)
    li, lq = np.unique(re), np.unique(im)
    idx = {(np.searchsorted(li, a), np.searchsorted(lq, b)): t for t, (a, b) in enumerate(zip(re, im))}

    def region_probs(levels, x):
        edges = np.concatenate([[-np.inf], (levels[1:] + levels[:-1]) / 2, [np.inf]])
        return np.diff(stats.norm.cdf(edges, loc=x, scale=sigma))

    total = 0.0
    for t in range(con.order):
        pi, pq = region_probs(li, re[t]), region_probs(lq, im[t])
        for a, p_a in enumerate(pi):
            for b, p_b in enumerate(pq):
                total += p_a * p_b * hamming(t, idx[(a, b)])
    return total / (con.order * con.bits_per_symbol)


@pytest.mark.parametrize("nr", range(1, 9))
def test_pep_at_zero_snr(nr):
    assert rayleigh_pep(0.0, nr) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("nr", [1, 2, 4])
@pytest.mark.parametrize("x", [0.1, 1.0, 30.0])
def test_pep_matches_fading_average(nr, x):
    want = fading_average(lambda g: stats.norm.sf(math.sqrt(2 * x * g)), nr)
    assert rayleigh_pep(x, nr) == pytest.approx(want, rel=1e-8)


def test_mu_range():
    x = np.logspace(-3, 3, 50)
    m = mu(x)
    assert np.all((m > 0) & (m < 0.5)) and np.all(np.diff(m) < 0)


@pytest.mark.parametrize("nr", [1, 2, 3])
@pytest.mark.parametrize("snr", [0.0, 10.0])
def test_bpsk_closed_form(nr, snr):
    nv = 10 ** (-snr / 10)
    want = fading_average(lambda g: stats.norm.sf(math.sqrt(2 * g / nv)), nr)
    assert psk_ber_rayleigh(2, nv, nr) == pytest.approx(want, rel=1e-8)


@pytest.mark.parametrize("nr", [1, 4])
def test_qpsk_closed_form(nr):
    nv = 0.2
    want = fading_average(lambda g: stats.norm.sf(math.sqrt(g / nv)), nr)
    assert psk_ber_rayleigh(4, nv, nr) == pytest.approx(want, rel=1e-8)


@pytest.mark.parametrize("M", [4, 16, 64])
@pytest.mark.parametrize("nr,snr", [(1, 5.0), (2, 12.0), (4, 8.0)])
def test_square_qam_closed_form_matches_enumeration(M, nr, snr):
    con = build_constellation("qam", M)
    nv = 10 ** (-snr / 10)
    want = fading_average(lambda g: qam_exact_ber_awgn(con, math.sqrt(nv / (2 * g))), nr)
    assert qam_ber_rayleigh(M, nv, nr) == pytest.approx(want, rel=1e-6)


def test_qam_closed_form_rejects_rectangular():
    with pytest.raises(ValueError):
        qam_ber_rayleigh(8, 0.1, 2)


def brute_classic(book, con, nr, nv):
    N, M = book.n, con.order
    total = 0.0
    for k in range(N):
        for l in range(M):
            for j in range(N):
                for i in range(M):
                    x = (abs(con.symbols[l]) ** 2 + abs(con.symbols[i]) ** 2) / (4 * nv)
                    total += (hamming(k, j) + hamming(l, i)) * float(rayleigh_pep(x, nr))
    return total / (M * N)


@pytest.mark.parametrize("scheme,nt,mod", [("lut", 4, ("psk", 4)), ("dtaar", 3, ("qam", 16))])
def test_classic_matches_loop_oracle(scheme, nt, mod):
    book, con = build_book(scheme, nt), build_constellation(*mod)
    got = classic_union_bound(book, con, 4, 0.1)
    assert got == pytest.approx(brute_classic(book, con, 4, 0.1), rel=1e-12)
    m = math.log2(book.n * con.order)
    assert classic_union_bound(book, con, 4, 0.1, per_bit=True) == pytest.approx(got / m, rel=1e-12)


def craig_oracle(C, d, nr, nv):
    f = lambda th: mgf_gamma(C, d, 1 / (4 * nv * math.sin(th) ** 2), nr) if th > 0 else 0.0
    return integrate.quad(f, 0, math.pi / 2, epsabs=1e-14, epsrel=1e-11)[0] / math.pi


def brute_spatial_joint(book, con, nr, nv):
    N, M, s = book.n, con.order, con.symbols
    C = overlap_matrix(book, con)
    m = math.log2(M * N)
    sp = jo = 0.0
    for k in range(N):
        for j in range(N):
            if k == j:
                continue
            for l in range(M):
                sp += hamming(k, j) * craig_oracle(C, pair_difference(N, k, j, s[l], s[l]), nr, nv)
                for i in range(M):
                    if i != l:
                        w = hamming(k, j) + hamming(l, i)
                        jo += w * craig_oracle(C, pair_difference(N, k, j, s[l], s[i]), nr, nv)
    return sp / (M * N * m), jo / (M * N * m)


@pytest.mark.parametrize("scheme,nt,mod", [("dtaar", 2, ("psk", 4)), ("dtaad", 3, ("psk", 2)),
                                           ("lut", 3, ("psk", 4))])
def test_spatial_and_joint_match_quad_oracle(scheme, nt, mod):
    book, con = build_book(scheme, nt), build_constellation(*mod)
    nv = 0.15
    _, sp, jo = improved_components(book, con, 3, nv)
    want_sp, want_jo = brute_spatial_joint(book, con, 3, nv)
    assert sp == pytest.approx(want_sp, rel=1e-9)
    assert jo == pytest.approx(want_jo, rel=1e-9)


@pytest.mark.parametrize("scheme,nt,l,i,k,j", [("dtaar", 3, 1, 2, 0, 3), ("lut", 4, 0, 3, 4, 6),
                                               ("dtaar", 3, 1, 1, 0, 7)])
def test_pairwise_pep_against_monte_carlo(scheme, nt, l, i, k, j):
    # P(||y - g_j s_i|| < ||y - g_k s_l||) by simulation vs the Craig integral
    book, con = build_book(scheme, nt), build_constellation("psk", 4)
    nr, nv, draws = 2, 0.5, 400_000
    rng = np.random.default_rng(11)
    G = sample_channel(nt, nr, rng, batch=draws) @ book.weights(con)
    diff = G[:, :, k] * con.symbols[l] - G[:, :, j] * con.symbols[i]
    p_mc = np.mean(stats.norm.sf(np.linalg.norm(diff, axis=1) / math.sqrt(2 * nv)))
    d = pair_difference(book.n, k, j, con.symbols[l], con.symbols[i])
    p = craig_average(np.vdot(d, overlap_matrix(book, con) @ d).real, 1 / (4 * nv), nr)
    assert float(p) == pytest.approx(p_mc, rel=0.02)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(0, 50), nr=st.integers(1, 4))
def test_mgf_scalar_equals_determinant(seed, t, nr):
    rng = np.random.default_rng(seed)
    book, con = build_book(["dtaar", "lut", "dtaad"][seed % 3], 3), build_constellation("qam", 16)
    C = overlap_matrix(book, con)
    k, j = rng.choice(book.n, 2, replace=False)
    d = pair_difference(book.n, k, j, *con.symbols[rng.integers(16, size=2)])
    assert mgf_gamma(C, d, t, nr) == pytest.approx(mgf_gamma_det(C, d, t, nr), rel=1e-9)


def test_mgf_degenerate_arguments():
    C = overlap_matrix(build_book("lut", 4), build_constellation("psk", 4))
    assert mgf_gamma(C, pair_difference(8, 1, 2), 0.0, 4) == 1.0
    assert mgf_gamma(C, np.zeros(8), 5.0, 4) == 1.0
    with pytest.raises(ValueError):
        mgf_gamma(-np.eye(2), np.array([1.0, 0]), 1.0, 2)


def test_quadratic_form_matches_channel_average():
    book, con = build_book("dtaar", 3), build_constellation("psk", 4)
    rng = np.random.default_rng(5)
    nr, draws = 4, 20_000
    G = sample_channel(3, nr, rng, batch=draws) @ book.weights(con)
    C = overlap_matrix(book, con)
    for k, j, l, i in [(0, 5, 1, 2), (0, 7, 3, 3), (2, 6, 0, 1)]:
        diff = G[:, :, k] * con.symbols[l] - G[:, :, j] * con.symbols[i]
        emp = np.mean(np.sum(np.abs(diff) ** 2, axis=1)) / nr
        d = pair_difference(book.n, k, j, con.symbols[l], con.symbols[i])
        assert np.vdot(d, C @ d).real == pytest.approx(emp, rel=0.02)


def test_chernoff_dominates_quadrature():
    q = np.linspace(0, 6, 25)
    for nr in (1, 2, 4):
        quad = craig_average(q, 3.0, nr)
        ch = craig_average(q, 3.0, nr, "chernoff")
        assert np.all(ch >= quad - 1e-15)
    with pytest.raises(ValueError):
        craig_average(q, 1.0, 2, "simpson")


@pytest.mark.parametrize("scheme,nt,mod", [("lut", 4, ("psk", 4)), ("dtaar", 3, ("psk", 2)),
                                           ("dtaad", 4, ("qam", 16))])
def test_bounds_decrease_with_snr(scheme, nt, mod):
    book, con = build_book(scheme, nt), build_constellation(*mod)
    curve = bound_curve(book, con, 2, np.arange(0, 31, 3.0))
    for attr in ("classic_ub", "improved_ub", "p_signal", "p_spatial", "p_joint"):
        v = np.array([getattr(r, attr) for r in curve])
        assert np.all(v > 0) and np.all(np.diff(v) < 0), attr
    for r in curve:
        assert r.improved_ub == pytest.approx(r.p_signal + r.p_spatial + r.p_joint)


def test_improved_below_classic_at_high_snr():
    book, con = build_book("lut", 4), build_constellation("psk", 4)
    for snr in (10.0, 15.0, 20.0):
        nv = 10 ** (-snr / 10)
        assert improved_bound(book, con, 4, nv) < classic_union_bound(book, con, 4, nv)


def test_simulated_ber_below_improved_bound():
    sc = Scenario("lut", 4, 2, "psk4", snr_db=(12.0,), target_errors=1000, max_bits=3_000_000, seed=3)
    rec = run_point(sc, 12.0)
    assert rec.bit_errors >= 200
    assert rec.ber <= improved_bound(sc.book, sc.constellation, 2, 10 ** -1.2)
