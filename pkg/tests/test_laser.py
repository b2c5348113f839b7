import math

import numpy as np
import pytest
from scipy import stats

from qrngsim.core import CavityField, LaserParams
from qrngsim.laser import (GainCycleConfig, OpticalPulse, amplify_above_threshold,
                           circular_correlation, evolve_below_threshold, generate_pulse_train,
                           successive_phase_correlation)


@pytest.fixture
def cfg():
    return GainCycleConfig.for_laser()


def test_cycle_timing(cfg):
    assert cfg.t_low + cfg.t_high == pytest.approx(1 / 97.6e6, abs=1e-12)
    assert cfg.dt <= 0.01 / cfg.laser.gamma_total


def test_cycle_rejects_coarse_step():
    with pytest.raises(ValueError, match="dt"):
        GainCycleConfig.for_laser(dt=1e-12)


def test_cycle_rejects_bad_period():
    with pytest.raises(ValueError, match="1/prf"):
        GainCycleConfig(t_low=5e-9, t_high=1e-9, dt=1e-13)


def test_zero_dwell_leaves_field(cfg):
    f = CavityField(1 + 2j, 3e-9)
    out = evolve_below_threshold(f, cfg, np.random.default_rng(0), duration=0.0)
    assert out.amplitude == f.amplitude and out.t == f.t


@pytest.mark.parametrize("scheme", ["exponential", "euler"])
def test_noiseless_decay_matches_closed_form(cfg, scheme):
    a0 = math.sqrt(3e5)
    gamma = cfg.laser.gamma_total
    # short horizon where plain Euler is still within 1e-3
    t = 0.2 / gamma
    out = evolve_below_threshold(CavityField(a0), cfg, None, scheme=scheme, duration=t)
    assert abs(out.amplitude) == pytest.approx(a0 * math.exp(-gamma * t / 2), rel=1e-3)


def test_noiseless_decay_full_dwell(cfg):
    a0 = math.sqrt(3e5)
    gamma = cfg.laser.gamma_total
    for t in (1 / gamma, 5 / gamma, 2.3e-9):
        out = evolve_below_threshold(CavityField(a0), cfg, None, duration=t)
        assert abs(out.amplitude) == pytest.approx(a0 * math.exp(-gamma * t / 2), rel=1e-3)
    # 3e5 * exp(-230) photons is nothing
    assert abs(out.amplitude) ** 2 < 1e-90


def test_thermalized_phase_uniform(cfg):
    rng = np.random.default_rng(11)
    out = evolve_below_threshold(CavityField(np.zeros(100_000, complex)), cfg, rng,
                                 duration=5 / cfg.laser.gamma_total)
    phase = np.angle(out.amplitude) % (2 * np.pi)
    assert stats.kstest(phase, stats.uniform(0, 2 * np.pi).cdf).pvalue > 0.01


@pytest.mark.parametrize("scheme", ["exponential", "euler"])
def test_stationary_photon_number_is_thermal(cfg, scheme):
    rng = np.random.default_rng(12)
    out = evolve_below_threshold(CavityField(np.zeros(100_000, complex)), cfg, rng, scheme=scheme,
                                 duration=10 / cfg.laser.gamma_total)
    n = np.abs(out.amplitude) ** 2
    # chi-squared against the exponential law on 20 equiprobable bins
    edges = stats.expon(scale=cfg.laser.n_thermal).ppf(np.linspace(0, 1, 21))
    counts, _ = np.histogram(n, edges)
    assert stats.chisquare(counts).pvalue > 0.01


def test_stepper_matches_exact_transition_variance(cfg):
    rng = np.random.default_rng(13)
    t = 1.0 / cfg.laser.gamma_total
    out = evolve_below_threshold(CavityField(np.zeros(200_000, complex)), cfg, rng, duration=t)
    expected = cfg.laser.n_thermal * (1 - math.exp(-1.0))
    assert np.mean(np.abs(out.amplitude) ** 2) == pytest.approx(expected, rel=0.01)


def test_amplify_preserves_phase(cfg):
    field = CavityField(0.7 * complex(math.cos(1.234), math.sin(1.234)))
    pulse = amplify_above_threshold(field, cfg, np.random.default_rng(0))
    assert pulse.phase == pytest.approx(1.234, abs=1e-12)
    assert pulse.envelope_width == cfg.laser.pulse_width


def test_amplify_energy_scale(cfg):
    rng = np.random.default_rng(1)
    energies = [amplify_above_threshold(CavityField(1 + 0j), cfg, rng).energy for _ in range(2000)]
    assert np.mean(energies) == pytest.approx(6.0e6, rel=0.005)
    assert np.std(energies) / np.mean(energies) == pytest.approx(0.01, rel=0.1)


def test_amplify_residual_fraction(cfg):
    remnant = math.sqrt(3e-5)
    field = CavityField(0.5 + remnant, coherent=remnant)
    assert amplify_above_threshold(field, cfg).residual_fraction == pytest.approx(3e-5)


def test_amplify_zero_field_draws_phase(cfg):
    pulse = amplify_above_threshold(CavityField(0j), cfg, np.random.default_rng(2))
    assert 0 <= pulse.phase < 2 * math.pi


def test_single_pulse_train(cfg):
    train = generate_pulse_train(1, cfg, seed=3)
    assert len(train) == 1
    assert isinstance(train[0], OpticalPulse)
    assert 0 <= train[0].phase < 2 * math.pi


def test_train_is_deterministic(cfg):
    a = generate_pulse_train(1000, cfg, seed=5)
    b = generate_pulse_train(1000, cfg, seed=5)
    c = generate_pulse_train(1000, cfg, seed=6)
    assert np.array_equal(a.phase, b.phase) and np.array_equal(a.energy, b.energy)
    assert not np.array_equal(a.phase, c.phase)


def test_train_rejects_empty(cfg):
    with pytest.raises(ValueError):
        generate_pulse_train(0, cfg, seed=0)


def test_default_residual_below_margin(cfg):
    train = generate_pulse_train(100, cfg, seed=7)
    assert np.all(train.residual_fraction < 2.0 ** -15)
    assert np.all(train.residual_fraction >= 0)


def test_residual_margin_at_scaled_dwell():
    # t_low = 2.3 ns at gamma = 1e11: remnant of 3e5 photons decays by e^-230
    laser = LaserParams(prf=1 / 3.3e-9)
    cfg = GainCycleConfig.for_laser(laser, t_high=1e-9)
    train = generate_pulse_train(10, cfg, seed=7)
    assert np.all(train.residual_fraction[1:] < 2.0 ** -15)


def test_step_and_aggregate_agree_in_law():
    # gamma * t_low = 30 keeps the stepper cheap and the pulses independent
    t_low = GainCycleConfig.for_laser().t_low
    cfg = GainCycleConfig.for_laser(LaserParams(gamma_total=30.0 / t_low))
    step = generate_pulse_train(300, cfg, seed=8, method="step")
    agg = generate_pulse_train(20_000, cfg, seed=8)
    assert stats.ks_2samp(step.phase, agg.phase).pvalue > 0.01
    assert stats.ks_2samp(step.energy, agg.energy).pvalue > 0.01
    assert step.residual_fraction[1:] == pytest.approx(agg.residual_fraction[1], rel=1e-3)


def test_slow_decay_correlates_successive_phases():
    # gamma * t_low = 2: the previous pulse still dominates the seed field
    cfg0 = GainCycleConfig.for_laser()
    laser = LaserParams(gamma_total=2.0 / cfg0.t_low)
    cfg = GainCycleConfig.for_laser(laser)
    train = generate_pulse_train(100_000, cfg, seed=9)
    assert abs(successive_phase_correlation(train.phase)) > 10 * 4 / math.sqrt(len(train))


def test_circular_correlation_oracle_bound():
    rng = np.random.default_rng(10)
    a = rng.uniform(0, 2 * np.pi, 1_000_000)
    assert abs(successive_phase_correlation(a)) < 4 / math.sqrt(a.size)
    assert circular_correlation(a, a) == pytest.approx(1.0)
