"""Photodiode, filters, sampling and the integrating ADC.

The detected pulse is a Gaussian envelope passed through a single-pole
low-pass (input bandwidth) and a single-pole AC-coupling high-pass, sampled
``samples_per_pulse`` times, and summed to one measurement per pulse which is
then quantised. Because every stage is linear, the per-pulse waveform is the
energy times a fixed sampled kernel, computed once per parameter set.

AC coupling is modelled in steady state: the long-run mean pulse energy
(``ac_baseline``) does not reach the ADC. The high-pass tail of a pulse is
truncated at its own window, so records are independent of each other. With
the light blocked there is no baseline either, which puts the noise-only
reference at mid-scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.signal import lfilter

from .entropy import shannon_entropy

_OVERSAMPLE = 40


@dataclass(frozen=True)
class DetectorParams:
    sample_rate: float = 2.5e9
    adc_bits: int = 12
    adc_range: tuple = (-2048.0, 2047.0)
    highpass_cutoff: float = 40e6
    input_bandwidth: float = 200e6
    noise_sigma: float = 0.0
    responsivity: float = 1e-6
    samples_per_pulse: int = 25
    prf: float = 97.6e6
    pulse_width: float = 400e-12
    pulse_delay: float = 2e-9
    ac_baseline: float = 0.0
    drift_amplitude: float = 0.0
    drift_period: float = 1e4

    def __post_init__(self):
        if not 1 <= self.adc_bits <= 24:
            raise ValueError(f"adc_bits must lie in [1, 24], got {self.adc_bits}")
        if self.samples_per_pulse != int(self.sample_rate // self.prf):
            raise ValueError(
                f"samples_per_pulse={self.samples_per_pulse} but floor(sample_rate/prf)="
                f"{int(self.sample_rate // self.prf)}"
            )
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        lo, hi = self.adc_range
        if not hi > lo:
            raise ValueError("adc_range must be increasing")
        if self.drift_period <= 0:
            raise ValueError("drift_period must be positive")

    @property
    def n_codes(self) -> int:
        return 2 ** self.adc_bits

    @property
    def lsb(self) -> float:
        lo, hi = self.adc_range
        return (hi - lo) / (self.n_codes - 1)

    @property
    def code_range(self) -> tuple:
        """Histogram span of the codes, each code a unit cell ``[c, c+1)``."""
        return (0, self.n_codes)


@dataclass(frozen=True)
class DigitizedRecord:
    code: int
    raw_samples: np.ndarray | None = None
    saturated: bool = False


def _single_pole_lowpass(x, cutoff, dt):
    a = math.exp(-2.0 * math.pi * cutoff * dt)
    return lfilter([1.0 - a], [1.0, -a], x)


@lru_cache(maxsize=32)
def _kernel(sample_rate, samples_per_pulse, pulse_width, pulse_delay, input_bandwidth, highpass_cutoff):
    dt = 1.0 / (sample_rate * _OVERSAMPLE)
    t = np.arange(samples_per_pulse * _OVERSAMPLE) * dt
    sigma_t = pulse_width / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    x = np.exp(-0.5 * ((t - pulse_delay) / sigma_t) ** 2)
    x /= x.sum() * dt
    y = _single_pole_lowpass(x, input_bandwidth, dt)
    if highpass_cutoff > 0:
        y = y - _single_pole_lowpass(y, highpass_cutoff, dt)
    k = y[::_OVERSAMPLE] / sample_rate
    k.flags.writeable = False
    return k


def pulse_kernel(p: DetectorParams) -> np.ndarray:
    """Sampled response to one photon (before responsivity), one entry per sample."""
    return _kernel(p.sample_rate, p.samples_per_pulse, p.pulse_width, p.pulse_delay,
                   p.input_bandwidth, p.highpass_cutoff)


def _drift(p: DetectorParams, index):
    if p.drift_amplitude == 0:
        return 0.0
    return p.drift_amplitude * np.sin(2.0 * math.pi * np.asarray(index, dtype=float) / p.drift_period)


def synthesize_waveform(record, p: DetectorParams, noise=None, index: int = 0) -> np.ndarray:
    """Detector samples for one interferometer output pulse.

    ``record`` is an :class:`~qrngsim.interferometer.EnergyRecord` or a bare
    output energy in photons. ``index`` only matters when a drift is set.
    """
    u_out = float(getattr(record, "u_out", record))
    samples = p.responsivity * (u_out - p.ac_baseline) * pulse_kernel(p)
    samples = samples + _drift(p, index)
    if noise is not None and p.noise_sigma > 0:
        samples = samples + p.noise_sigma * noise.standard_normal(p.samples_per_pulse)
    return samples


def synthesize_waveforms(u_out, p: DetectorParams, noise=None, start_index: int = 0) -> np.ndarray:
    """Vectorised :func:`synthesize_waveform`; returns shape ``(n, samples_per_pulse)``."""
    u_out = np.asarray(u_out, dtype=float)
    samples = p.responsivity * np.outer(u_out - p.ac_baseline, pulse_kernel(p))
    if p.drift_amplitude:
        idx = start_index + np.arange(u_out.size)
        samples += _drift(p, idx)[:, None]
    if noise is not None and p.noise_sigma > 0:
        samples += p.noise_sigma * noise.standard_normal(samples.shape)
    return samples


def quantize(sums, p: DetectorParams):
    """Map integrated values to ADC codes.

    Affine map of ``adc_range`` onto ``[0, 2**bits - 1]``, round half to
    even, clamp at the rails.

    Returns
    -------
    codes : ndarray of int64
    n_clipped : int
        Number of values that hit a rail.
    """
    lo, hi = p.adc_range
    top = p.n_codes - 1
    x = np.rint((np.asarray(sums, dtype=float) - lo) / (hi - lo) * top)
    clipped = int(np.count_nonzero((x < 0) | (x > top)))
    return np.clip(x, 0, top).astype(np.int64), clipped


def reconstruct(codes, p: DetectorParams):
    lo, hi = p.adc_range
    return lo + np.asarray(codes, dtype=float) * (hi - lo) / (p.n_codes - 1)


def integrate_and_quantize(samples, p: DetectorParams, keep_samples: bool = False) -> DigitizedRecord:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (p.samples_per_pulse,):
        raise ValueError(f"expected {p.samples_per_pulse} samples, got {samples.shape}")
    codes, clipped = quantize(samples.sum(), p)
    return DigitizedRecord(int(codes), samples.copy() if keep_samples else None, bool(clipped))


def digitize(u_out, p: DetectorParams, noise=None, chunk: int = 1 << 16):
    """Full detection chain for a sequence of output energies.

    Returns ``(codes, n_clipped)``.
    """
    u_out = np.asarray(getattr(u_out, "u_out", u_out), dtype=float)
    codes = np.empty(u_out.size, dtype=np.int64)
    clipped = 0
    for start in range(0, u_out.size, chunk):
        stop = min(start + chunk, u_out.size)
        sums = synthesize_waveforms(u_out[start:stop], p, noise, start).sum(axis=1)
        codes[start:stop], c = quantize(sums, p)
        clipped += c
    return codes, clipped


def capture_noise_reference(n_pulses: int, p: DetectorParams, noise=None) -> np.ndarray:
    """Codes recorded with the light blocked (no signal, no AC baseline)."""
    if n_pulses < 1:
        raise ValueError("n_pulses must be >= 1")
    dark = replace(p, ac_baseline=0.0)
    codes, _ = digitize(np.zeros(n_pulses), dark, noise)
    return codes


def calibrate_adc(u_out, p: DetectorParams) -> DetectorParams:
    """Set the AC baseline and a bipolar mid-tread ADC range from a calibration batch.

    The range is ``[-2**(b-1) q, (2**(b-1) - 1) q]`` with the step ``q``
    chosen so the largest noise-free excursion just reaches the top code.
    Zero input then sits at the centre of code ``2**(b-1)``.
    """
    u_out = np.asarray(getattr(u_out, "u_out", u_out), dtype=float)
    baseline = float(np.mean(u_out))
    sums = p.responsivity * (u_out - baseline) * float(np.sum(pulse_kernel(p)))
    half = 2 ** (p.adc_bits - 1)
    q = float(np.max(np.abs(sums))) / (half - 1)
    if q <= 0:
        raise ValueError("calibration batch has no spread")
    return replace(p, ac_baseline=baseline, adc_range=(-half * q, (half - 1) * q))


def calibrate_noise_sigma(p: DetectorParams, target_bits: float = 0.7, n_pulses: int = 200_000,
                          seed: int = 0, tol: float = 1e-3, max_iter: int = 60) -> DetectorParams:
    """Bisect ``noise_sigma`` so the dark-reference entropy at full resolution hits ``target_bits``.

    A fixed set of normal draws is reused at every trial sigma so the
    objective is a deterministic step function of sigma.
    """
    z = np.random.default_rng(seed).standard_normal((n_pulses, p.samples_per_pulse)).sum(axis=1)
    dark = replace(p, ac_baseline=0.0)

    def entropy_at(sigma):
        codes, _ = quantize(sigma * z, dark)
        return shannon_entropy(codes, p.adc_bits, p.code_range)

    lo, hi = 0.0, p.lsb
    while entropy_at(hi) < target_bits:
        hi *= 2.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        h = entropy_at(mid)
        if abs(h - target_bits) < tol:
            break
        if h < target_bits:
            lo = mid
        else:
            hi = mid
    return replace(p, noise_sigma=mid)
