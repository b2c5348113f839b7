"""A small frequency/runs/serial randomness battery.

The tests follow the usual constructions of the NIST SP 800-22 suite
(frequency, block frequency, runs, longest run of ones, serial). Every
constant is fixed here so verdicts are reproducible bit for bit. This is a
desk-scale screen; long streams can be exported headerless for TestU01 or
dieharder.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc, gammaincc

from .extractor import BitStream

ALPHA = 0.01
BLOCK_FREQUENCY_M = 128
SERIAL_M = 16

# Longest run of ones: (min n, block length M, class bounds v_lo..v_hi, class probabilities)
_LONGEST_RUN_TABLES = (
    (750_000, 10_000, 10, 16, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
    (6_272, 128, 4, 9, (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (128, 8, 1, 4, (0.2148, 0.3672, 0.2305, 0.1875)),
)


@dataclass(frozen=True)
class TestResult:
    name: str
    statistic: float
    p_value: float
    passed: bool | None
    applicable: bool = True
    note: str = ""

    __test__ = False  # keep pytest from collecting this class


@dataclass
class BatteryReport:
    results: list
    alpha: float
    n_bits: int
    notes: list = field(default_factory=list)

    __test__ = False

    @property
    def applicable(self):
        return [r for r in self.results if r.applicable]

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.applicable if not r.passed)

    @property
    def all_passed(self) -> bool:
        return bool(self.applicable) and self.n_failed == 0

    @property
    def expected_false_failures(self) -> float:
        return self.alpha * len(self.applicable)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "statistic", "p_value", "pass"])
        for r in self.results:
            verdict = "n/a" if not r.applicable else ("pass" if r.passed else "fail")
            w.writerow([r.name, repr(r.statistic), repr(r.p_value), verdict])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"{self.n_bits} bits, alpha = {self.alpha}"]
        for r in self.results:
            if r.applicable:
                verdict = "PASS" if r.passed else "FAIL"
                lines.append(f"  {r.name:<16} p = {r.p_value:.6f}  {verdict}")
            else:
                lines.append(f"  {r.name:<16} n/a ({r.note})")
        lines.append(f"  {self.n_failed} of {len(self.applicable)} applicable tests failed; "
                     f"expected false failures at this alpha: {self.expected_false_failures:.3f}")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)


def _bits(stream) -> np.ndarray:
    if isinstance(stream, BitStream):
        return stream.to_bits()
    return np.asarray(stream, dtype=np.uint8)


def _result(name, statistic, p, alpha):
    p = float(min(max(p, 0.0), 1.0))
    return TestResult(name, float(statistic), p, p >= alpha)


def _not_applicable(name, note):
    return TestResult(name, float("nan"), float("nan"), None, applicable=False, note=note)


def monobit(stream, alpha: float = ALPHA) -> TestResult:
    bits = _bits(stream)
    n = bits.size
    if n < 100:
        raise ValueError(f"monobit needs at least 100 bits, got {n}")
    s = 2 * int(np.count_nonzero(bits)) - n
    stat = abs(s) / math.sqrt(n)
    return _result("monobit", stat, erfc(stat / math.sqrt(2.0)), alpha)


def runs_test(stream, alpha: float = ALPHA) -> TestResult:
    bits = _bits(stream)
    n = bits.size
    if n < 100:
        return _not_applicable("runs", "fewer than 100 bits")
    pi = np.count_nonzero(bits) / n
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        return _not_applicable("runs", "frequency prerequisite failed")
    runs = 1 + int(np.count_nonzero(bits[1:] != bits[:-1]))
    num = abs(runs - 2.0 * n * pi * (1.0 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1.0 - pi)
    return _result("runs", runs, erfc(num / den), alpha)


def block_frequency(stream, block_len: int = BLOCK_FREQUENCY_M, alpha: float = ALPHA) -> TestResult:
    bits = _bits(stream)
    n_blocks = bits.size // block_len
    if n_blocks < 1 or bits.size < 100:
        return _not_applicable("block_frequency", "stream shorter than one block")
    props = bits[: n_blocks * block_len].reshape(n_blocks, block_len).mean(axis=1)
    chi2 = 4.0 * block_len * float(np.sum((props - 0.5) ** 2))
    return _result("block_frequency", chi2, gammaincc(n_blocks / 2.0, chi2 / 2.0), alpha)


def _psi2(bits, m):
    if m <= 0:
        return 0.0
    n = bits.size
    ext = np.concatenate([bits, bits[: m - 1]]).astype(np.int64)
    vals = np.zeros(n, dtype=np.int64)
    for j in range(m):
        vals = (vals << 1) | ext[j: j + n]
    counts = np.bincount(vals, minlength=2 ** m).astype(float)
    return float((2 ** m) / n * np.sum(counts ** 2) - n)


def serial_test(stream, m: int = SERIAL_M, alpha: float = ALPHA) -> TestResult:
    """Overlapping m-bit pattern test, first statistic (del psi^2_m)."""
    bits = _bits(stream)
    n = bits.size
    if m < 2 or m >= int(math.log2(max(n, 2))) - 2:
        return _not_applicable(f"serial_m{m}", "pattern length too large for stream")
    d1 = _psi2(bits, m) - _psi2(bits, m - 1)
    return _result(f"serial_m{m}", d1, gammaincc(2.0 ** (m - 2), d1 / 2.0), alpha)


def longest_run(stream, alpha: float = ALPHA) -> TestResult:
    bits = _bits(stream)
    n = bits.size
    for min_n, M, v_lo, v_hi, probs in _LONGEST_RUN_TABLES:
        if n >= min_n:
            break
    else:
        return _not_applicable("longest_run", "fewer than 128 bits")
    n_blocks = n // M
    blocks = bits[: n_blocks * M].reshape(n_blocks, M).astype(np.int8)
    # longest run per block via run-length bookkeeping on a padded copy
    padded = np.zeros((n_blocks, M + 2), dtype=np.int8)
    padded[:, 1:-1] = blocks
    d = np.diff(padded, axis=1)
    longest = np.zeros(n_blocks, dtype=np.int64)
    rows_s, cols_s = np.nonzero(d == 1)
    rows_e, cols_e = np.nonzero(d == -1)
    np.maximum.at(longest, rows_s, cols_e - cols_s)
    classes = np.clip(longest, v_lo, v_hi) - v_lo
    counts = np.bincount(classes, minlength=len(probs)).astype(float)
    expected = n_blocks * np.asarray(probs)
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    k = len(probs) - 1
    return _result("longest_run", chi2, gammaincc(k / 2.0, chi2 / 2.0), alpha)


def run_battery(stream, alpha: float = ALPHA, serial_m: int | None = None) -> BatteryReport:
    """Every applicable test on ``stream``.

    ``serial_m`` defaults to 16, reduced for short streams so the serial
    test stays applicable.
    """
    bits = _bits(stream)
    n = bits.size
    if serial_m is None:
        serial_m = max(2, min(SERIAL_M, int(math.log2(max(n, 2))) - 3))
    results = [
        monobit(bits, alpha) if n >= 100 else _not_applicable("monobit", "fewer than 100 bits"),
        block_frequency(bits, BLOCK_FREQUENCY_M, alpha),
        runs_test(bits, alpha),
        longest_run(bits, alpha),
        serial_test(bits, serial_m, alpha),
    ]
    report = BatteryReport(results, alpha, n)
    if n < 10 ** 6:
        report.notes.append("fewer than 10^6 bits; test power is limited")
    return report


def pass_proportion_bounds(n_sequences: int, alpha: float = ALPHA) -> tuple:
    """Acceptable pass-proportion interval, ``(1-a) +/- 3 sqrt(a(1-a)/m)``."""
    p = 1.0 - alpha
    half = 3.0 * math.sqrt(alpha * (1.0 - alpha) / n_sequences)
    return p - half, min(1.0, p + half)


def battery_pass_proportions(stream, n_sequences: int, alpha: float = ALPHA, serial_m: int | None = None):
    """Split ``stream`` into equal sub-streams and tally passes per test.

    Returns ``{test_name: (passes, applicable_count)}``.
    """
    bits = _bits(stream)
    size = bits.size // n_sequences
    tally = {}
    for i in range(n_sequences):
        rep = run_battery(bits[i * size:(i + 1) * size], alpha, serial_m)
        for r in rep.results:
            passes, total = tally.get(r.name, (0, 0))
            if r.applicable:
                tally[r.name] = (passes + int(r.passed), total + 1)
            else:
                tally.setdefault(r.name, (passes, total))
    return tally
