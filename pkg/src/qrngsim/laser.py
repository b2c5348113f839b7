"""Semiclassical gain-switching cycle of the laser diode.

Each period the cavity field is held below threshold, where it relaxes to a
thermal state (circular complex Gaussian, mean photon number ``n_thermal``),
then it is switched above threshold and amplified to saturation without
touching its phase. The quantum noise drive of the Langevin equation becomes
a complex Wiener increment normalised so that ``E|dW|^2 = dt``::

    da = -(gamma / 2) a dt + sqrt(gamma * n_thermal) dW

Two fixed-step integrators are provided. ``"exponential"`` (the default)
propagates the drift exactly over a step and draws the step's noise with its
exact variance; ``"euler"`` is the textbook Euler-Maruyama update. Because the
equation is linear, composing ``N`` exponential steps is equal in law to one
step of length ``N*dt``, which :func:`generate_pulse_train` uses to avoid
stepping ~10^5 times per pulse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .core import CavityField, LaserParams

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GainCycleConfig:
    t_low: float
    t_high: float
    dt: float
    laser: LaserParams = field(default_factory=LaserParams)
    energy_spread: float = 0.01
    phase_noise: float = 0.0

    def __post_init__(self):
        if self.t_low < 0 or self.t_high <= 0:
            raise ValueError("dwell times must be non-negative (t_high > 0)")
        if abs(self.t_low + self.t_high - self.laser.period) > 1e-12:
            raise ValueError(
                f"t_low + t_high = {self.t_low + self.t_high:.6e} s does not match "
                f"1/prf = {self.laser.period:.6e} s"
            )
        if self.dt <= 0 or self.dt > 0.01 / self.laser.gamma_total * (1 + 1e-9):
            raise ValueError(
                f"dt = {self.dt:.3e} s violates dt <= 0.01/gamma_total "
                f"= {0.01 / self.laser.gamma_total:.3e} s"
            )
        if self.energy_spread < 0 or self.phase_noise < 0:
            raise ValueError("energy_spread and phase_noise must be non-negative")

    @classmethod
    def for_laser(cls, laser: LaserParams | None = None, t_high: float = 1e-9, **kw) -> GainCycleConfig:
        """Cycle with ``t_high`` above threshold and the rest of the period below."""
        laser = LaserParams() if laser is None else laser
        kw.setdefault("dt", 0.01 / laser.gamma_total)
        return cls(t_low=laser.period - t_high, t_high=t_high, laser=laser, **kw)


@dataclass(frozen=True)
class OpticalPulse:
    energy: float
    phase: float
    envelope_width: float
    residual_fraction: float = 0.0


@dataclass
class PulseTrain:
    """Pulse-train columns; indexing yields :class:`OpticalPulse`."""

    energy: np.ndarray
    phase: np.ndarray
    residual_fraction: np.ndarray
    envelope_width: float
    prf: float
    seed: int | None = None

    def __len__(self):
        return len(self.energy)

    def __getitem__(self, i) -> OpticalPulse:
        return OpticalPulse(float(self.energy[i]), float(self.phase[i]),
                            self.envelope_width, float(self.residual_fraction[i]))

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self)) / self.prf

    @classmethod
    def from_pulses(cls, pulses, prf, seed=None) -> PulseTrain:
        pulses = list(pulses)
        return cls(
            energy=np.array([p.energy for p in pulses]),
            phase=np.array([p.phase for p in pulses]),
            residual_fraction=np.array([p.residual_fraction for p in pulses]),
            envelope_width=pulses[0].envelope_width,
            prf=prf,
            seed=seed,
        )


def _complex_normal(rng, size, var):
    # circular complex Gaussian with E|z|^2 = var
    s = np.sqrt(var / 2.0)
    return s * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def evolve_below_threshold(field: CavityField, cfg: GainCycleConfig, noise=None,
                           scheme: str = "exponential", duration: float | None = None) -> CavityField:
    """Integrate the below-threshold Langevin equation over ``cfg.t_low``.

    Parameters
    ----------
    field : CavityField
        Start state. ``amplitude`` may be a complex array to evolve an
        ensemble of independent fields in one call.
    cfg : GainCycleConfig
    noise : numpy.random.Generator or None
        Source of the Wiener increments; ``None`` switches the drive off.
    scheme : {"exponential", "euler"}
    duration : float, optional
        Overrides ``cfg.t_low``.

    Returns
    -------
    CavityField
        End state. Its ``coherent`` part is the deterministic remnant of the
        starting amplitude.
    """
    t = cfg.t_low if duration is None else duration
    a = np.asarray(field.amplitude, dtype=complex)
    coherent0 = a.copy()
    if t == 0:
        return CavityField(field.amplitude, field.t, field.coherent)
    gamma = cfg.laser.gamma_total
    n_th = cfg.laser.n_thermal
    n_steps = int(math.ceil(t / cfg.dt - 1e-9))
    h = t / n_steps
    if scheme == "exponential":
        decay = math.exp(-gamma * h / 2.0)
        step_var = n_th * (1.0 - math.exp(-gamma * h))
    elif scheme == "euler":
        decay = 1.0 - gamma * h / 2.0
        step_var = gamma * n_th * h
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    for _ in range(n_steps):
        a = decay * a
        if noise is not None:
            a = a + _complex_normal(noise, a.shape, step_var)
    coherent = coherent0 * decay ** n_steps
    if a.ndim == 0:
        a, coherent = complex(a), complex(coherent)
    return CavityField(a, field.t + t, coherent)


def amplify_above_threshold(field: CavityField, cfg: GainCycleConfig, noise=None) -> OpticalPulse:
    """Saturated, phase-preserving amplification of the thermal seed field.

    A zero seed has no phase; one is drawn uniformly (a measure-zero event
    for a noisy seed).
    """
    rng = np.random.default_rng() if noise is None else noise
    amp = complex(field.amplitude)
    phase = math.atan2(amp.imag, amp.real) if amp != 0 else rng.uniform(0.0, TWO_PI)
    if cfg.phase_noise > 0:
        phase += cfg.phase_noise * rng.standard_normal()
    eps = cfg.energy_spread * rng.standard_normal() if cfg.energy_spread > 0 else 0.0
    energy = cfg.laser.mean_pulse_photons * (1.0 + eps)
    residual = abs(complex(field.coherent)) ** 2 / cfg.laser.n_thermal
    return OpticalPulse(max(energy, np.finfo(float).tiny), phase % TWO_PI,
                        cfg.laser.pulse_width, residual)


def saturated_field(pulse: OpticalPulse, cfg: GainCycleConfig, t: float = 0.0) -> CavityField:
    """Intracavity field just after amplification, the next cycle's start."""
    amp = math.sqrt(cfg.laser.sat_cavity_photons) * complex(math.cos(pulse.phase), math.sin(pulse.phase))
    return CavityField(amp, t, amp)


@njit(cache=True)
def _chain(thermal, sat_amp, decay, phase_jitter, uniform_fallback, a0):
    n = thermal.shape[0]
    phases = np.empty(n)
    residual = np.empty(n)
    start = a0
    for i in range(n):
        remnant = decay * start
        a = remnant + thermal[i]
        if a == 0:
            ph = uniform_fallback[i]
        else:
            ph = math.atan2(a.imag, a.real)
        ph = (ph + phase_jitter[i]) % (2.0 * math.pi)
        phases[i] = ph
        residual[i] = remnant.real ** 2 + remnant.imag ** 2
        start = sat_amp * complex(math.cos(ph), math.sin(ph))
    return phases, residual


def generate_pulse_train(n_pulses: int, cfg: GainCycleConfig, seed: int, method: str = "aggregate",
                         initial: complex = 0j) -> PulseTrain:
    """Run ``n_pulses`` gain-switching cycles, each seeded by the previous one.

    ``method="aggregate"`` samples each dwell in one exact-variance draw
    (equal in law to the exponential stepper); ``method="step"`` calls
    :func:`evolve_below_threshold` step by step and is only practical for
    short trains. Both are deterministic for a fixed ``seed``.
    """
    if n_pulses < 1:
        raise ValueError("n_pulses must be >= 1")
    rng = np.random.default_rng(seed)
    laser = cfg.laser
    if method == "step":
        pulses = []
        fld = CavityField(initial, 0.0, initial)
        for _ in range(n_pulses):
            fld = evolve_below_threshold(fld, cfg, rng)
            pulse = amplify_above_threshold(fld, cfg, rng)
            pulses.append(pulse)
            fld = saturated_field(pulse, cfg, fld.t + cfg.t_high)
        return PulseTrain.from_pulses(pulses, laser.prf, seed)
    if method != "aggregate":
        raise ValueError(f"unknown method {method!r}")

    gamma, n_th = laser.gamma_total, laser.n_thermal
    decay = math.exp(-gamma * cfg.t_low / 2.0)
    thermal = _complex_normal(rng, n_pulses, n_th * (1.0 - math.exp(-gamma * cfg.t_low)))
    jitter = cfg.phase_noise * rng.standard_normal(n_pulses) if cfg.phase_noise > 0 else np.zeros(n_pulses)
    eps = cfg.energy_spread * rng.standard_normal(n_pulses) if cfg.energy_spread > 0 else np.zeros(n_pulses)
    fallback = rng.uniform(0.0, TWO_PI, n_pulses)
    phases, remnant = _chain(thermal, math.sqrt(laser.sat_cavity_photons), decay,
                             jitter, fallback, complex(initial))
    energy = np.maximum(laser.mean_pulse_photons * (1.0 + eps), np.finfo(float).tiny)
    return PulseTrain(energy, phases, remnant / n_th, laser.pulse_width, laser.prf, seed)


def circular_correlation(alpha, beta) -> float:
    """Jammalamadaka-SenGupta circular-circular correlation coefficient."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    ma = np.angle(np.mean(np.exp(1j * alpha)))
    mb = np.angle(np.mean(np.exp(1j * beta)))
    sa, sb = np.sin(alpha - ma), np.sin(beta - mb)
    den = math.sqrt(np.sum(sa * sa) * np.sum(sb * sb))
    return float(np.sum(sa * sb) / den) if den > 0 else 0.0


def successive_phase_correlation(phases) -> float:
    phases = np.asarray(phases)
    return circular_correlation(phases[:-1], phases[1:])
