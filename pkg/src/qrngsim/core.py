"""Physical constants, device parameter records and decay-rate arithmetic.

Everything here is a pure function over plain values. The simulation runs in a
frame rotating at the optical carrier, so the carrier frequency never appears;
it enters downstream only through the interferometer loop phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants as _sc

#: Power-to-decibel factor for an ``exp(-gamma t)`` decay, 10*log10(e).
DB_PER_NEPER_POWER = 10.0 * math.log10(math.e)


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = _sc.c
    h: float = _sc.h


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class LaserParams:
    """Gain-switched DFB laser diode.

    Defaults describe the 852 nm device: 25 mA bias against a 36 mA
    threshold, 400 ps / 3.5 mW pulses at 97.6 MHz.

    ``gamma_cav`` and ``gamma_total`` are stored values, not recomputed from
    ``R, n, L``; see :func:`cavity_decay_rate` for the formula.
    """

    R: float = 0.3
    n: float = 3.6
    L: float = 300e-6
    alpha_abs: float = 1e6
    gamma_cav: float = 5e10
    gamma_total: float = 1e11
    bias_fraction: float = 25.0 / 36.0
    peak_power_photons_per_s: float = 1.5e16
    sat_cavity_photons: float = 3e5
    pulse_width: float = 400e-12
    prf: float = 97.6e6
    n_thermal: float = 1.0
    wavelength: float = 852e-9

    def __post_init__(self):
        if not 0.0 < self.R < 1.0:
            raise ValueError(f"R must lie in (0, 1), got {self.R}")
        if self.gamma_cav <= 0:
            raise ValueError("gamma_cav must be positive")
        if self.gamma_total <= 0:
            raise ValueError("gamma_total must be positive below threshold")
        if self.prf <= 0:
            raise ValueError("prf must be positive")
        if not self.pulse_width < 1.0 / self.prf:
            raise ValueError("pulse_width must be shorter than the pulse period")
        if self.n_thermal <= 0 or self.sat_cavity_photons <= 0:
            raise ValueError("photon numbers must be positive")

    @property
    def period(self) -> float:
        return 1.0 / self.prf

    @property
    def mean_pulse_photons(self) -> float:
        """Photons per pulse, peak flux times pulse width."""
        return self.peak_power_photons_per_s * self.pulse_width


@dataclass(frozen=True)
class CavityField:
    """Complex intracavity amplitude in sqrt-photon units at time ``t``.

    ``coherent`` is the part of ``amplitude`` that is the deterministic,
    decayed remnant of an earlier state (zero for a freshly thermal field).
    """

    amplitude: complex
    t: float = 0.0
    coherent: complex = 0j

    @property
    def photons(self) -> float:
        return abs(self.amplitude) ** 2


def photon_energy(wavelength: float, c: float = CONSTANTS.c, h: float = CONSTANTS.h) -> float:
    return h * c / wavelength


def cavity_decay_rate(R: float, n: float, L: float, c: float = CONSTANTS.c) -> float:
    """Energy decay rate through the out-coupler, ``-c ln(R) / (2 n L)``.

    Raises
    ------
    ValueError
        If ``R`` is outside (0, 1), ``L <= 0`` or ``n < 1``.
    """
    if not 0.0 < R < 1.0:
        raise ValueError(f"reflectivity must lie in (0, 1), got {R}")
    if L <= 0:
        raise ValueError(f"cavity length must be positive, got {L}")
    if n < 1:
        raise ValueError(f"refractive index must be >= 1, got {n}")
    return -c * math.log(R) / (2.0 * n * L)


def material_decay_rate(
    bias_fraction: float,
    alpha_abs: float,
    n: float,
    gamma_cav: float,
    c: float = CONSTANTS.c,
) -> float:
    """Material contribution to the field decay at a given pump level.

    Linear interpolation between intrinsic absorption ``c*alpha/n`` at zero
    current and ``-gamma_cav`` (gain exactly compensating loss) at threshold.
    """
    if not 0.0 <= bias_fraction <= 1.0:
        raise ValueError(f"bias_fraction must lie in [0, 1], got {bias_fraction}")
    zero_current = c * alpha_abs / n
    return zero_current + bias_fraction * (-gamma_cav - zero_current)


def total_decay_rate(laser: LaserParams, bias_fraction: float | None = None,
                     gamma_cav: float | None = None) -> float:
    """``gamma_cav + gamma_mat`` at ``bias_fraction`` (defaults from ``laser``)."""
    f = laser.bias_fraction if bias_fraction is None else bias_fraction
    g_cav = laser.gamma_cav if gamma_cav is None else gamma_cav
    return g_cav + material_decay_rate(f, laser.alpha_abs, laser.n, g_cav)


def attenuation_db(gamma: float, duration: float) -> float:
    """Power attenuation in dB of ``exp(-gamma * duration)``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if duration < 0:
        raise ValueError("duration must be non-negative")
    return DB_PER_NEPER_POWER * gamma * duration


def residual_photons(sat_photons: float, attenuation: float) -> float:
    return sat_photons * 10.0 ** (-attenuation / 10.0)


def residual_coherence_bits(sat_photons: float, attenuation: float, n_thermal: float) -> float:
    """How many bits the leftover coherent field sits below the thermal floor.

    ``log2(n_thermal / residual)`` with ``residual = sat * 10**(-dB/10)``.
    """
    if sat_photons <= 0 or attenuation <= 0 or n_thermal <= 0:
        raise ValueError("all inputs must be positive")
    return float(np.log2(n_thermal / residual_photons(sat_photons, attenuation)))
