"""
Phase randomisation in a gain-switched laser
============================================

Below threshold the cavity field decays at ~1e11 s^-1 towards a thermal
equilibrium with amplified spontaneous emission. Each pulse is then
amplified out of that equilibrium, so its phase owes nothing to the
previous pulse.
"""

import math

import numpy as np

from qrngsim import CavityField, GainCycleConfig, LaserParams
from qrngsim.core import attenuation_db, residual_coherence_bits
from qrngsim.laser import evolve_below_threshold, generate_pulse_train, successive_phase_correlation

cfg = GainCycleConfig.for_laser()
gamma = cfg.laser.gamma_total
print(f"cycle: {cfg.t_low * 1e9:.2f} ns below threshold, {cfg.t_high * 1e9:.2f} ns above")

# how much of the saturated field survives one dwell
db = attenuation_db(gamma, cfg.t_low)
print(f"attenuation over the dwell: {db:.0f} dB")
print(f"after 100 dB the remnant sits {residual_coherence_bits(3e5, 100.0, 1.0):.1f} bits below vacuum")

# noiseless decay of a saturated field against the closed form
a0 = math.sqrt(cfg.laser.sat_cavity_photons)
for t in (0.05e-9, 0.5e-9, 2e-9):
    out = evolve_below_threshold(CavityField(a0), cfg, None, duration=t)
    print(f"t = {t * 1e9:5.2f} ns  |a|^2 = {abs(out.amplitude) ** 2:10.3e}  "
          f"closed form {a0 ** 2 * math.exp(-gamma * t):10.3e}")

# an ensemble settles to a thermal state: exponential photon number, uniform phase
rng = np.random.default_rng(1)
ens = evolve_below_threshold(CavityField(np.zeros(50_000, complex)), cfg, rng, duration=10 / gamma)
n = np.abs(ens.amplitude) ** 2
print(f"thermal ensemble: <n> = {n.mean():.3f}, var(n) = {n.var():.3f} (exponential law: 1, 1)")

# successive pulses: fast decay versus a deliberately slow one
train = generate_pulse_train(200_000, cfg, seed=2)
print(f"gamma = {gamma:.0e}: successive phase correlation {successive_phase_correlation(train.phase):+.4f}")
slow = GainCycleConfig.for_laser(LaserParams(gamma_total=1.0 / cfg.t_low))
train = generate_pulse_train(200_000, slow, seed=2)
print(f"gamma = {slow.laser.gamma_total:.0e}: successive phase correlation "
      f"{successive_phase_correlation(train.phase):+.4f}")
