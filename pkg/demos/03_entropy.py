"""
How many bits does a pulse carry?
=================================

Digitise the interferometer output, histogram it at 2^b bins and subtract
the entropy of the detector's own noise measured with the light blocked.
"""

from dataclasses import replace

import numpy as np

from qrngsim.pipeline import PipelineConfig, RunSettings, analyze, calibrate, noise_reference, simulate

cfg = replace(PipelineConfig(), run=RunSettings(n_pulses=500_000))
# fix the noise floor at 0.7 bits and fit the ADC range to the signal
cal = calibrate(cfg, 0.7)
print(f"noise sigma {cal.detector.noise_sigma:.3g} per sample, "
      f"ADC range [{cal.detector.adc_min:.4g}, {cal.detector.adc_max:.4g}]")

sim = simulate(cal)
dark = noise_reference(cal)
res = analyze(sim.codes, dark, 12)
print(" b   total   noise  quantum")
for rep in res.curve:
    print(f"{rep.b:2d}  {rep.total_entropy:6.3f}  {rep.noise_entropy:6.3f}  {rep.quantum_entropy:7.3f}")

# an arcsine histogram is never flat, so the curve runs about a third of a bit under b
r = res.correlation.r
print(f"max |r[k]| for 1 <= k <= 1000: {np.max(np.abs(r[1:1001])):.2e} "
      f"(white-noise scale {4 / np.sqrt(r.size):.0e})")
