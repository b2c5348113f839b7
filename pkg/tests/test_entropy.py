import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrngsim.entropy import (circular_autocorrelation, correlation_csv, entropy_curve, entropy_csv,
                             histogram, min_entropy, quantum_entropy, shannon_entropy)

CODES = (0, 4096)
code_lists = st.lists(st.integers(0, 4095), min_size=2, max_size=400)


def test_single_bin_has_zero_entropy():
    x = np.full(1000, 17)
    for b in (1, 6, 12):
        assert shannon_entropy(x, b, CODES) == 0.0


def test_uniform_over_bins_is_b_bits():
    x = np.arange(4096)
    for b in range(1, 13):
        assert shannon_entropy(x, b, CODES) == pytest.approx(b)


def test_uniform_random_curve_is_identity():
    x = np.random.default_rng(0).integers(0, 4096, 10_000_000)
    for b, h in entropy_curve(x, 12, CODES):
        # plug-in bias (2^b - 1)/(2 n ln 2) is below 3e-4 bits here
        assert h == pytest.approx(b, abs=1e-3)


@given(code_lists)
def test_bounds(xs):
    n = len(xs)
    for b, h in entropy_curve(xs, 12, CODES):
        assert -1e-12 <= h <= min(b, math.log2(n)) + 1e-9
        assert min_entropy(xs, b, CODES) <= h + 1e-9


@given(code_lists)
def test_curve_non_decreasing(xs):
    hs = [h for _, h in entropy_curve(xs, 12, CODES)]
    assert all(b >= a - 1e-9 for a, b in zip(hs, hs[1:]))


@given(code_lists, st.integers(0, 2 ** 32 - 1))
def test_relabeling_invariance(xs, seed):
    perm = np.random.default_rng(seed).permutation(4096)
    assert shannon_entropy(perm[np.asarray(xs)], 12, CODES) == pytest.approx(shannon_entropy(xs, 12, CODES))


def test_histogram_rejects_out_of_range():
    with pytest.raises(ValueError):
        histogram([0, 5000], 12, CODES)


def test_curve_rejects_excess_resolution():
    with pytest.raises(ValueError):
        entropy_curve([1, 2, 3], 13, CODES, adc_bits=12)


def test_quantum_entropy_same_source_is_zero():
    x = np.random.default_rng(1).integers(2040, 2056, 10_000)
    rep = quantum_entropy(x, x, 12, CODES)
    assert rep.quantum_entropy == 0.0 and not rep.clamped


def test_quantum_entropy_clamps():
    sig = np.full(1000, 2048)
    noise = np.random.default_rng(2).integers(2040, 2056, 1000)
    rep = quantum_entropy(sig, noise, 12, CODES)
    assert rep.quantum_entropy == 0.0 and rep.clamped


def test_quantum_entropy_difference():
    rng = np.random.default_rng(3)
    sig = rng.integers(0, 4096, 1_000_000)
    noise = rng.integers(2047, 2049, 1_000_000)
    rep = quantum_entropy(sig, noise, 12, CODES)
    assert rep.quantum_entropy == pytest.approx(11.0, abs=0.01)
    assert rep.plugin_bias == pytest.approx(4095 / (2e6 * math.log(2)))


def _direct_acf(x):
    x = np.asarray(x, float) - np.mean(x)
    n = x.size
    return np.array([np.dot(x, np.roll(x, -k)) for k in range(n)]) / np.dot(x, x)


@settings(max_examples=50)
@given(st.lists(st.integers(0, 4095), min_size=2, max_size=80))
def test_autocorrelation_matches_direct_sum(xs):
    if np.ptp(xs) == 0:
        return
    rep = circular_autocorrelation(xs)
    assert np.allclose(rep.r, _direct_acf(xs), atol=1e-9)
    assert rep.r[0] == 1.0
    assert np.array_equal(rep.r[1:], rep.r[1:][::-1])


def test_tone_autocorrelation():
    n, period = 1000, 20
    x = np.cos(2 * np.pi * np.arange(n) / period)
    r = circular_autocorrelation(x).r
    assert r[period] == pytest.approx(1.0)
    assert r[period // 2] == pytest.approx(-1.0)


def test_white_noise_autocorrelation_small():
    x = np.random.default_rng(4).standard_normal(1_000_000)
    r = circular_autocorrelation(x).r
    assert np.max(np.abs(r[1:1001])) < 4 / math.sqrt(x.size) + 1e-3


def test_constant_input_is_degenerate():
    rep = circular_autocorrelation(np.full(10, 3.0))
    assert rep.degenerate and rep.r[0] == 1.0 and not np.any(rep.r[1:])


def test_autocorrelation_needs_two_samples():
    with pytest.raises(ValueError):
        circular_autocorrelation([1.0])


def test_csv_writers():
    rep = circular_autocorrelation(np.arange(10.0))
    text = correlation_csv(rep, 3, header=["config abc"])
    lines = text.splitlines()
    assert lines[0] == "# config abc" and lines[1] == "lag,r" and len(lines) == 6
    q = quantum_entropy(np.arange(4096), np.zeros(10, int), 12, CODES)
    assert entropy_csv([q]).splitlines()[1].startswith("12,12.0,0.0,12.0")
