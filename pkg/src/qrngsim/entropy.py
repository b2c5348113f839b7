"""Histogram entropies and circular autocorrelation of digitised records."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EntropyReport:
    b: int
    total_entropy: float
    noise_entropy: float
    quantum_entropy: float
    samples_used: int
    clamped: bool = False
    min_entropy: float | None = None

    @property
    def plugin_bias(self) -> float:
        """Leading-order underestimate of the plug-in estimator, in bits."""
        return (2 ** self.b - 1) / (2.0 * self.samples_used * math.log(2.0))


@dataclass(frozen=True)
class CorrelationReport:
    r: np.ndarray
    n: int
    degenerate: bool = False


def histogram(samples, b: int, value_range: tuple) -> np.ndarray:
    """Counts in ``2**b`` equal-width bins over ``[lo, hi)``; ``hi`` joins the last bin."""
    if b < 1:
        raise ValueError("b must be >= 1")
    x = np.asarray(samples)
    if x.size == 0:
        raise ValueError("no samples")
    lo, hi = value_range
    if np.any(x < lo) or np.any(x > hi):
        raise ValueError(f"samples fall outside the histogram range [{lo}, {hi}]")
    nbins = 2 ** b
    idx = np.floor((x.astype(float) - lo) * (nbins / (hi - lo))).astype(np.int64)
    np.clip(idx, 0, nbins - 1, out=idx)
    return np.bincount(idx, minlength=nbins)


def _entropy_from_counts(counts) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log2(p))) + 0.0


def shannon_entropy(samples, b: int, value_range: tuple) -> float:
    """Plug-in Shannon entropy (bits) of a ``2**b``-bin histogram."""
    return _entropy_from_counts(histogram(samples, b, value_range))


def min_entropy(samples, b: int, value_range: tuple) -> float:
    counts = histogram(samples, b, value_range)
    return float(-np.log2(counts.max() / counts.sum()))


def entropy_curve(samples, b_max: int, value_range: tuple, adc_bits: int | None = None):
    """``[(b, H_b) for b = 1..b_max]``."""
    if adc_bits is not None and b_max > adc_bits:
        raise ValueError(f"b_max={b_max} exceeds the ADC resolution {adc_bits}")
    return [(b, shannon_entropy(samples, b, value_range)) for b in range(1, b_max + 1)]


def quantum_entropy(signal_samples, noise_samples, b: int, value_range: tuple) -> EntropyReport:
    """Total minus classical-noise entropy, clamped at zero."""
    total = shannon_entropy(signal_samples, b, value_range)
    noise = shannon_entropy(noise_samples, b, value_range)
    diff = total - noise
    return EntropyReport(
        b=b,
        total_entropy=total,
        noise_entropy=noise,
        quantum_entropy=max(0.0, diff),
        samples_used=int(np.size(signal_samples)),
        clamped=diff < 0,
        min_entropy=min_entropy(signal_samples, b, value_range),
    )


def circular_autocorrelation(samples) -> CorrelationReport:
    """Mean-removed modulo-N autocorrelation normalised to lag zero.

    ``r[k] = sum_i x_i x_{(i+k) mod N} / sum_i x_i^2`` computed by FFT and
    symmetrised so ``r[k] == r[N-k]`` holds exactly.
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need at least two samples")
    x = x - x.mean()
    if not np.any(x):
        r = np.zeros(n)
        r[0] = 1.0
        return CorrelationReport(r, n, degenerate=True)
    f = np.fft.rfft(x)
    acf = np.fft.irfft(f.real ** 2 + f.imag ** 2, n)
    acf[1:] = 0.5 * (acf[1:] + acf[1:][::-1])
    r = acf / acf[0]
    return CorrelationReport(r, n)


def correlation_csv(report: CorrelationReport, max_lag: int | None = None, header=()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lag", "r"])
    stop = report.n if max_lag is None else min(max_lag + 1, report.n)
    for k in range(stop):
        w.writerow([k, repr(float(report.r[k]))])
    return buf.getvalue()


def entropy_csv(rows, header=()) -> str:
    """``rows`` are :class:`EntropyReport` objects, one per ``b``."""
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["b", "total", "noise", "quantum"])
    for rep in rows:
        w.writerow([rep.b, repr(rep.total_entropy), repr(rep.noise_entropy), repr(rep.quantum_entropy)])
    return buf.getvalue()
