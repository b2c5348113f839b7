import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from qrngsim.extractor import BitStream
from qrngsim.stattests import (block_frequency, battery_pass_proportions, longest_run, monobit,
                               pass_proportion_bounds, run_battery, runs_test, serial_test)


def _fair(n, seed=0):
    return np.random.default_rng(seed).integers(0, 2, n).astype(np.uint8)


def test_all_zeros_fail_monobit():
    r = monobit(np.zeros(10_000, np.uint8))
    assert r.p_value < 1e-10 and not r.passed


def test_balanced_monobit_p_one():
    r = monobit(np.tile([0, 1], 5000))
    assert r.p_value == 1.0 and r.passed


def test_monobit_needs_100_bits():
    with pytest.raises(ValueError):
        monobit(np.zeros(99, np.uint8))


def test_alternating_fails_runs():
    r = runs_test(np.tile([0, 1], 5000))
    assert r.applicable and not r.passed


def test_runs_prerequisite():
    r = runs_test(np.zeros(10_000, np.uint8))
    assert not r.applicable and r.passed is None and math.isnan(r.p_value)


def test_monobit_worked_example():
    # 1011010101: S = 2, statistic 2/sqrt(10) -> p = 0.527089 (scaled to 100 bits: p unchanged)
    bits = np.tile(np.array([1, 0, 1, 1, 0, 1, 0, 1, 0, 1], np.uint8), 10)
    r = monobit(bits)
    assert r.statistic == pytest.approx(20 / 10)
    assert r.p_value == pytest.approx(math.erfc(2 / math.sqrt(2)))


def test_runs_count():
    bits = np.tile(np.array([1, 0, 0, 1, 1, 0, 1, 0, 1, 1], np.uint8), 10)
    r = runs_test(bits)
    expected = 1 + sum(bits[i] != bits[i + 1] for i in range(bits.size - 1))
    assert r.statistic == expected


@pytest.mark.parametrize("period", [2, 3, 8, 16])
def test_periodic_fails_serial(period):
    pattern = _fair(period, period)
    pattern[0], pattern[-1] = 0, 1
    r = serial_test(np.tile(pattern, 2 ** 20 // period), m=8)
    assert not r.passed


def test_serial_uniform_pattern_counts():
    # a de Bruijn-like walk over all 2-bit patterns gives del psi^2 = 0
    bits = np.tile(np.array([0, 0, 1, 1], np.uint8), 1000)
    r = serial_test(bits, m=2)
    assert r.statistic == pytest.approx(0.0) and r.p_value == 1.0


def _longest_direct(block):
    best = cur = 0
    for b in block:
        cur = cur + 1 if b else 0
        best = max(best, cur)
    return best


@settings(max_examples=30)
@given(st.integers(0, 2 ** 32 - 1))
def test_longest_run_matches_direct_count(seed):
    bits = _fair(6272, seed)
    # reconstruct the chi-squared from direct counting on M=128 blocks
    blocks = bits.reshape(-1, 128)
    classes = np.clip([_longest_direct(b) for b in blocks], 4, 9) - 4
    probs = np.array([0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124])
    counts = np.bincount(classes, minlength=6)
    chi2 = np.sum((counts - 49 * probs) ** 2 / (49 * probs))
    assert longest_run(bits).statistic == pytest.approx(chi2)


def test_fair_coin_passes():
    rep = run_battery(BitStream.from_bits(_fair(10_000_000, 1)))
    assert rep.all_passed, rep.summary()
    assert [r.name for r in rep.results] == ["monobit", "block_frequency", "runs", "longest_run", "serial_m16"]


def test_all_zeros_battery():
    rep = run_battery(np.zeros(100_000, np.uint8))
    assert not rep.all_passed
    assert all(not r.passed for r in rep.applicable)


def test_battery_is_deterministic():
    bits = _fair(200_000, 2)
    assert run_battery(bits).to_csv() == run_battery(bits).to_csv()


def test_short_stream_note():
    rep = run_battery(_fair(5000, 3))
    assert any("10^6" in n for n in rep.notes)


@pytest.mark.parametrize("name", ["monobit", "block_frequency", "runs", "longest_run", "serial_m8"])
def test_p_values_uniform_under_null(name):
    bits = _fair(200 * 20_000, 4).reshape(200, 20_000)
    ps = []
    for row in bits:
        rep = run_battery(row, serial_m=8)
        ps.append(next(r.p_value for r in rep.results if r.name == name))
    ps = np.asarray(ps)
    ps = ps[~np.isnan(ps)]
    # monobit and runs are discrete at this n; allow for the lattice
    assert stats.kstest(ps, "uniform").pvalue > 0.001


def test_pass_proportions_within_bounds():
    tally = battery_pass_proportions(_fair(100 * 100_000, 5), 100, serial_m=8)
    lo, hi = pass_proportion_bounds(100)
    assert lo == pytest.approx(0.99 - 3 * math.sqrt(0.0099 / 100))
    for name, (passes, total) in tally.items():
        assert total > 0
        assert lo <= passes / total <= hi, name
