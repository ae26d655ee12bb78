"""Simulator checks: frozen seeds, closed-form moments, and the
analytical modules as oracles for the estimators."""

import math
import os

import numpy as np
import pytest
from scipy.integrate import quad

from rislink import asymptotic as la
from rislink import montecarlo as mc
from rislink import ops, rps
from rislink.rps import Modulation
from rislink.scenario import (LinkGeometry, NakagamiParams, PhaseDesign,
                              ScenarioConfig, derive, quantized,
                              ricean_k_to_m)

M_LOS = ricean_k_to_m(10.0)


def make_config(n, design="rps", tx=0.0, direct=False, m_h=M_LOS, m_g=M_LOS,
                m_d=1.2, bits=2):
    pd = quantized(bits) if design == "quantized" else PhaseDesign(design)
    return ScenarioConfig(
        n_elements=n, carrier_hz=2.45e9, alpha=2.5, noise_dbm=-85.0,
        tx_power_dbm=tx, m_h=m_h, m_g=m_g,
        geometry=LinkGeometry(20.0, 20.0, 86.0, direct),
        phase_design=pd, m_d=m_d if direct else None)


def ks_one_sample(samples, cdf):
    s = np.sort(samples)
    n = len(s)
    vals = np.asarray([cdf(x) for x in s])
    i = np.arange(1, n + 1)
    return max(np.max(np.abs(i / n - vals)), np.max(np.abs((i - 1) / n - vals)))


# ---------------------------------------------------------------------
# rng plumbing
# ---------------------------------------------------------------------

def test_rng_stream_reproducible_and_validated():
    a = mc.RngStream(12345, 7).generator().random(8)
    b = mc.RngStream(12345, 7).generator().random(8)
    c = mc.RngStream(12345, 8).generator().random(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ValueError):
        mc.RngStream(-1, 0)
    with pytest.raises(ValueError):
        mc.RngStream(0, 1 << 64)


def test_mc_estimate_validation():
    mc.McEstimate(0.1, 0.01, 100, 0)
    with pytest.raises(ValueError):
        mc.McEstimate(0.1, -0.01, 100, 0)
    with pytest.raises(ValueError):
        mc.McEstimate(0.1, 0.01, 0, 0)


def test_phase_model_validation():
    assert mc.quantized_phases(3).bits == 3
    with pytest.raises(ValueError):
        mc.PhaseModel("weird")
    with pytest.raises(ValueError):
        mc.quantized_phases(0)
    with pytest.raises(ValueError):
        mc.PhaseModel("uniform", bits=2)
    assert mc.default_phase_model(make_config(4)) == mc.UNIFORM
    assert mc.default_phase_model(make_config(4, "ops")) == mc.UNIFORM
    assert mc.default_phase_model(make_config(4, "quantized", bits=3)) \
        == mc.quantized_phases(3)


# ---------------------------------------------------------------------
# channel draws
# ---------------------------------------------------------------------

def test_envelope_moments():
    params = NakagamiParams(2.3, 1.7)
    rng = mc.RngStream(11, 0).generator()
    x = mc.sample_nakagami_envelope(params, rng, 1_000_000)
    p2 = x * x
    se2 = np.std(p2) / math.sqrt(len(x))
    assert abs(np.mean(p2) - 1.7) < 3 * se2
    p4 = p2 * p2
    want4 = 1.7 ** 2 * (2.3 + 1.0) / 2.3
    se4 = np.std(p4) / math.sqrt(len(x))
    assert abs(np.mean(p4) - want4) < 3 * se4
    assert isinstance(mc.sample_nakagami_envelope(params, rng), float)


def test_envelope_rayleigh_ks():
    params = NakagamiParams(1.0, 0.8)
    rng = mc.RngStream(3, 0).generator()
    x = np.sort(mc.sample_nakagami_envelope(params, rng, 1_000_000))
    cdf = -np.expm1(-x * x / 0.8)
    i = np.arange(1, len(x) + 1)
    ks = max(np.max(np.abs(i / len(x) - cdf)),
             np.max(np.abs((i - 1) / len(x) - cdf)))
    assert ks < 0.002


def phase_density(m):
    const = math.exp(math.lgamma(m) - m * math.log(2.0)
                     - 2.0 * math.lgamma(0.5 * m))
    return lambda th: const * abs(math.sin(2.0 * th)) ** (m - 1.0)


@pytest.mark.parametrize("m", [0.5, 1.0, 2.0, 5.76])
def test_phase_density_normalizes(m):
    f = phase_density(m)
    total = sum(quad(f, a, b, limit=200)[0]
                for a, b in zip([-math.pi, -math.pi / 2, 0.0, math.pi / 2],
                                [-math.pi / 2, 0.0, math.pi / 2, math.pi]))
    assert total == pytest.approx(1.0, rel=1e-9)
    assert phase_density(1.0)(0.3) == pytest.approx(1.0 / (2.0 * math.pi),
                                                    rel=1e-12)


def test_phase_sampler_uniform_at_m1():
    rng = mc.RngStream(8, 0).generator()
    th = np.sort(mc.sample_nakagami_phase(1.0, rng, 500_000))
    cdf = (th + math.pi) / (2.0 * math.pi)
    i = np.arange(1, len(th) + 1)
    ks = max(np.max(np.abs(i / len(th) - cdf)),
             np.max(np.abs((i - 1) / len(th) - cdf)))
    assert ks < 0.002


@pytest.mark.parametrize("m,seed", [(0.7, 21), (2.0, 22), (5.76, 23)])
def test_phase_sampler_matches_density(m, seed):
    f = phase_density(m)
    rng = mc.RngStream(seed, 0).generator()
    th = mc.sample_nakagami_phase(m, rng, 200_000)
    grid = np.linspace(-math.pi, math.pi, 9)
    # quadrant-cell occupancy against the quadrature mass
    for a, b in zip(grid[:-1], grid[1:]):
        p = quad(f, a, b, limit=200)[0]
        frac = np.mean((th >= a) & (th < b))
        se = math.sqrt(p * (1.0 - p) / len(th))
        assert abs(frac - p) < 4 * se + 1e-9


def test_phase_sampler_fourfold_symmetry():
    rng = mc.RngStream(5, 0).generator()
    th = mc.sample_nakagami_phase(3.0, rng, 400_000)
    quarters = [np.count_nonzero((th >= -math.pi + k * math.pi / 2)
                                 & (th < -math.pi + (k + 1) * math.pi / 2))
                for k in range(4)]
    n = len(th)
    se = math.sqrt(n * 0.25 * 0.75)
    for q in quarters:
        assert abs(q - n / 4) < 4 * se
    with pytest.raises(ValueError):
        mc.sample_nakagami_phase(0.4, rng)


def test_realize_snr_deterministic_limit():
    cfg = ScenarioConfig(
        n_elements=1, carrier_hz=2.45e9, alpha=2.5, noise_dbm=-85.0,
        tx_power_dbm=0.0, m_h=5e4, m_g=5e4,
        geometry=LinkGeometry(20.0, 20.0, 86.0, True),
        phase_design=PhaseDesign("ops"), m_d=5e4)
    d = derive(cfg)
    want = d.rho * (math.sqrt(d.omega_h * d.omega_g) + math.sqrt(d.omega_d)) ** 2
    rng = mc.RngStream(1, 0).generator()
    draws = [mc.realize_snr(cfg, mc.UNIFORM, rng) for _ in range(8)]
    assert np.mean(draws) == pytest.approx(want, rel=0.02)


def test_realize_snr_rps_mean_identity():
    cfg = make_config(8, "rps", tx=5.0, direct=True)
    d = derive(cfg)
    want = d.rho * (8 * d.omega_h * d.omega_g + d.omega_d)
    rng = mc.RngStream(17, 0).generator()
    g = mc._snr_batch(cfg, mc.UNIFORM, 400_000, rng)
    se = np.std(g) / math.sqrt(len(g))
    assert abs(np.mean(g) - want) < 3 * se


def test_quantized_many_bits_approaches_coherent():
    fine = make_config(16, "quantized", tx=0.0, bits=10)
    coherent = make_config(16, "ops", tx=0.0)
    g1 = np.sort(mc._snr_batch(fine, mc.default_phase_model(fine), 100_000,
                               mc.RngStream(2, 0).generator()))
    g2 = np.sort(mc._snr_batch(coherent, mc.UNIFORM, 100_000,
                               mc.RngStream(3, 0).generator()))
    # two-sample KS
    allv = np.concatenate([g1, g2])
    cdf1 = np.searchsorted(g1, allv, side="right") / len(g1)
    cdf2 = np.searchsorted(g2, allv, side="right") / len(g2)
    assert np.max(np.abs(cdf1 - cdf2)) < 0.01


# ---------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------

def test_estimate_op_trivial_and_validation():
    cfg = make_config(4)
    est = mc.estimate_op(cfg, mc.UNIFORM, 0.0, 10_000, 1)
    assert est.value == 0.0
    assert est.std_error == 0.0
    assert est.n_trials == 10_000 and est.seed == 1
    with pytest.raises(ValueError):
        mc.estimate_op(cfg, mc.UNIFORM, 1.0, 9_999, 1)
    with pytest.raises(ValueError):
        mc.estimate_op(cfg, mc.UNIFORM, -1.0, 10_000, 1)
    with pytest.raises(ValueError):
        mc.estimate_op(cfg, mc.UNIFORM, 1.0, 10_000, -5)


def test_estimate_op_matches_exact_small_n():
    cfg = make_config(4, tx=0.0)
    d = derive(cfg)
    hp = rps.HankelProduct.from_scenario(cfg)
    gamma_th = 4 * d.rho * d.omega_h * d.omega_g  # around the bulk
    want = rps.gamma_r_cdf(hp, gamma_th, d.rho)
    est = mc.estimate_op(cfg, mc.UNIFORM, gamma_th, 200_000, 42)
    assert abs(est.value - want) < 3 * est.std_error


def test_estimate_op_matches_exponential_model():
    cfg = make_config(256, tx=10.0)
    model = la.LargeNRps.from_scenario(cfg)
    gamma_th = model.mean * math.log(2.0)
    want = la.largen_rps_cdf(model, gamma_th)
    est = mc.estimate_op(cfg, mc.UNIFORM, gamma_th, 60_000, 9)
    assert abs(est.value - want) < 3 * est.std_error


def test_estimate_op_grid_bit_identical_to_single():
    cfg = make_config(4, tx=0.0)
    d = derive(cfg)
    ths = [k * d.rho * d.omega_h * d.omega_g for k in (1.0, 4.0, 9.0)]
    grid = mc.estimate_op_grid(cfg, mc.UNIFORM, ths, 30_000, 77)
    for th, got in zip(ths, grid):
        single = mc.estimate_op(cfg, mc.UNIFORM, th, 30_000, 77)
        assert got == single


def test_estimate_ber_low_snr_limit():
    cfg = make_config(4, tx=-120.0)
    for mod in (Modulation.BPSK, Modulation.BDPSK):
        est = mc.estimate_ber(cfg, mc.UNIFORM, mod, 10_000, 4)
        assert est.value == pytest.approx(0.5, rel=1e-3)


def test_estimate_ber_matches_analytics():
    # single-element coherent link against the CHF-inversion BER
    cfg = make_config(1, "ops", tx=25.0)
    chf = ops.AmplitudeChf.from_scenario(cfg)
    rho = derive(cfg).rho
    want = ops.ber_ops_coherent(chf, rho, Modulation.BPSK)
    est = mc.estimate_ber(cfg, mc.UNIFORM, Modulation.BPSK, 300_000, 15)
    assert abs(est.value - want) < 3 * est.std_error
    want_d = ops.ber_ops_bdpsk(chf, rho)
    est_d = mc.estimate_ber(cfg, mc.UNIFORM, Modulation.BDPSK, 300_000, 16)
    assert abs(est_d.value - want_d) < 3 * est_d.std_error


def test_estimate_ber_matches_rps_with_direct():
    cfg = make_config(4, "rps", tx=20.0, direct=True, m_h=1.5, m_g=2.5,
                      m_d=1.5)
    hp = rps.HankelProduct.from_scenario(cfg)
    rho = derive(cfg).rho
    want = rps.ber_rps(hp, rho, Modulation.BPSK)
    est = mc.estimate_ber(cfg, mc.UNIFORM, Modulation.BPSK, 300_000, 23)
    assert abs(est.value - want) < 3 * est.std_error


def test_estimate_ec_deterministic_and_model_checks():
    cfg = ScenarioConfig(
        n_elements=1, carrier_hz=2.45e9, alpha=2.5, noise_dbm=-85.0,
        tx_power_dbm=40.0, m_h=5e4, m_g=5e4,
        geometry=LinkGeometry(20.0, 20.0, 86.0, False),
        phase_design=PhaseDesign("ops"))
    d = derive(cfg)
    want = math.log2(1.0 + d.rho * d.omega_h * d.omega_g)
    est = mc.estimate_ec(cfg, mc.UNIFORM, 10_000, 2)
    assert est.value == pytest.approx(want, rel=2e-3)

    big = make_config(256, tx=10.0)
    model = la.LargeNRps.from_scenario(big)
    est = mc.estimate_ec(big, mc.UNIFORM, 60_000, 31)
    assert abs(est.value - la.largen_rps_ec(model)) < 3 * est.std_error


def test_std_error_scaling():
    cfg = make_config(16, tx=10.0)
    one = mc.estimate_ec(cfg, mc.UNIFORM, 50_000, 12)
    two = mc.estimate_ec(cfg, mc.UNIFORM, 100_000, 12)
    ratio = one.std_error / two.std_error
    assert ratio == pytest.approx(math.sqrt(2.0), rel=0.1)


def test_stochastic_ordering_of_designs():
    rand = make_config(8, "rps", tx=0.0)
    coh = make_config(8, "ops", tx=0.0)
    d = derive(rand)
    scale = d.rho * 8 * d.omega_h * d.omega_g
    ths = [scale * k for k in (0.3, 1.0, 3.0, 10.0, 30.0)]
    g_r = mc.estimate_op_grid(rand, mc.UNIFORM, ths, 60_000, 50)
    g_c = mc.estimate_op_grid(coh, mc.UNIFORM, ths, 60_000, 51)
    for er, ec_ in zip(g_r, g_c):
        band = 3.0 * math.hypot(er.std_error, ec_.std_error)
        assert ec_.value <= er.value + band


def test_thread_count_invariance(monkeypatch):
    cfg = make_config(16, tx=10.0, direct=True)
    results = []
    for threads in ("1", "8"):
        monkeypatch.setenv("RISLINK_THREADS", threads)
        op = mc.estimate_op(cfg, mc.UNIFORM, 1e-4, 40_000, 3)
        ec_est = mc.estimate_ec(cfg, mc.UNIFORM, 40_000, 3)
        results.append((op, ec_est))
    assert results[0] == results[1]
    monkeypatch.setenv("RISLINK_THREADS", "bogus")
    with pytest.raises(ValueError):
        mc.estimate_ec(cfg, mc.UNIFORM, 10_000, 3)
