"""Simulation and post-processing of an amplified-vacuum random number generator.

A gain-switched laser emits phase-randomised pulses, an unbalanced
Mach-Zehnder interferometer turns consecutive phase differences into pulse
energies, and a digitiser records them. The analysis side estimates the
extractable entropy, hashes raw bits down with Whirlpool, and screens the
output with a small randomness battery.
"""

__version__ = "0.1.0"

from .core import (CONSTANTS, CavityField, LaserParams, attenuation_db, cavity_decay_rate,
                   material_decay_rate, residual_coherence_bits, total_decay_rate)
from .detection import (DetectorParams, DigitizedRecord, capture_noise_reference,
                        integrate_and_quantize, synthesize_waveform)
from .entropy import (CorrelationReport, EntropyReport, circular_autocorrelation, entropy_curve,
                      quantum_entropy, shannon_entropy)
from .extractor import BitStream, ExtractorConfig, codes_to_bits, extract, output_rate
from .interferometer import (EnergyRecord, MziParams, estimate_visibility, interfere,
                             sweep_loop_phase, transform_train)
from .laser import (GainCycleConfig, OpticalPulse, PulseTrain, amplify_above_threshold,
                    evolve_below_threshold, generate_pulse_train)
from .stattests import (BatteryReport, TestResult, block_frequency, longest_run, monobit,
                        run_battery, runs_test, serial_test)
from .whirlpool import whirlpool
