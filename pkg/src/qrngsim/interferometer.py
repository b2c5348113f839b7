"""Unbalanced Mach-Zehnder interferometer acting on consecutive pulses.

Pulse ``i`` reaches the output through the short arm and pulse ``i+1``
through the delay loop, so the output energy of record ``i`` is::

    u_out = u + v + 2 |g| sqrt(u v) cos(dphi - phi_loop)

with ``u = r_sq * G_i``, ``v = t_sq * G_{i+1}``, ``dphi = phi_i - phi_{i+1}``.
A mismatch between the loop delay and the pulse period is not simulated
separately; it is absorbed into the visibility ``|g|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .laser import PulseTrain


@dataclass(frozen=True)
class MziParams:
    t_sq: float = 0.498
    r_sq: float = 0.403
    visibility: float = 0.9022
    phi_loop: float = 0.0
    t_loop: float = 1.0 / 97.6e6
    thermal_coeff: float = 2.0 * math.pi / 0.03
    temp_ref: float = 25.0

    def __post_init__(self):
        for name in ("t_sq", "r_sq", "visibility"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {val}")
        if self.t_sq + self.r_sq > 1.0 + 1e-12:
            raise ValueError("t_sq + r_sq must not exceed 1")


@dataclass(frozen=True)
class EnergyRecord:
    u_out: float
    u_in: float
    v_in: float
    dphi: float


@dataclass
class EnergyRecords:
    """Column store of :class:`EnergyRecord` values."""

    u_out: np.ndarray
    u_in: np.ndarray
    v_in: np.ndarray
    dphi: np.ndarray

    def __len__(self):
        return len(self.u_out)

    def __getitem__(self, i) -> EnergyRecord:
        return EnergyRecord(float(self.u_out[i]), float(self.u_in[i]),
                            float(self.v_in[i]), float(self.dphi[i]))


def interfere(u, v, dphi, p: MziParams, phi_loop=None):
    """Energy at the measured output port; broadcasts over arrays."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u < 0) or np.any(v < 0):
        raise ValueError("arm energies must be non-negative")
    phi = p.phi_loop if phi_loop is None else phi_loop
    out = u + v + 2.0 * p.visibility * np.sqrt(u * v) * np.cos(np.asarray(dphi) - phi)
    return out if out.ndim else float(out)


def output_ports(g_i, g_next, dphi, p: MziParams, phi_loop=None):
    """Both output ports for consecutive pulse energies ``g_i, g_next``.

    The unmeasured port swaps the arm weights and flips the sign of the
    interference term, so a lossless interferometer conserves energy.
    """
    g_i = np.asarray(g_i, dtype=float)
    g_next = np.asarray(g_next, dtype=float)
    phi = p.phi_loop if phi_loop is None else phi_loop
    measured = interfere(p.r_sq * g_i, p.t_sq * g_next, dphi, p, phi)
    cross = 2.0 * p.visibility * np.sqrt(p.r_sq * p.t_sq * g_i * g_next) * np.cos(np.asarray(dphi) - phi)
    other = p.t_sq * g_i + p.r_sq * g_next - cross
    return measured, other


def _pairs(train: PulseTrain, p: MziParams):
    if len(train) < 2:
        raise ValueError("need at least two pulses to interfere")
    u = p.r_sq * train.energy[:-1]
    v = p.t_sq * train.energy[1:]
    dphi = train.phase[:-1] - train.phase[1:]
    return u, v, dphi


def transform_train(train: PulseTrain, p: MziParams) -> EnergyRecords:
    """Interfere each pulse with its successor; returns ``len(train) - 1`` records."""
    u, v, dphi = _pairs(train, p)
    return EnergyRecords(interfere(u, v, dphi, p), u, v, dphi)


def sweep_loop_phase(train: PulseTrain, p: MziParams, temp_profile) -> EnergyRecords:
    """Like :func:`transform_train` with a per-record loop temperature (deg C)."""
    temps = np.asarray(temp_profile, dtype=float)
    if temps.shape != (len(train) - 1,):
        raise ValueError(f"temperature profile has {temps.size} entries, expected {len(train) - 1}")
    u, v, dphi = _pairs(train, p)
    phi = p.phi_loop + p.thermal_coeff * (temps - p.temp_ref)
    return EnergyRecords(interfere(u, v, dphi, p, phi_loop=phi), u, v, dphi)


def estimate_visibility(u_out, u_mean: float, v_mean: float, min_records: int = 1000) -> float:
    """Moment estimate of ``|g|`` from the spread of output energies.

    For a uniformly random phase ``Var(cos) = 1/2``, so
    ``std(u_out) = |g| sqrt(2 u_mean v_mean)``.
    """
    u_out = np.asarray(u_out.u_out if isinstance(u_out, EnergyRecords) else u_out, dtype=float)
    if u_out.size < min_records:
        raise ValueError(f"need at least {min_records} records, got {u_out.size}")
    if u_mean <= 0 or v_mean <= 0:
        raise ValueError("mean arm energies must be positive")
    return float(np.std(u_out) / math.sqrt(2.0 * u_mean * v_mean))


def arcsine_cdf(x, center: float, half_width: float):
    """CDF of ``center + half_width * cos(theta)`` for uniform ``theta``."""
    y = np.clip((np.asarray(x, dtype=float) - center) / half_width, -1.0, 1.0)
    return 1.0 - np.arccos(y) / math.pi
