"""Configuration, record files and the end-to-end pipeline stages.

Config files are flat ``section.key = value`` lines; ``#`` starts a comment.
Unknown keys are errors. Sections: ``laser``, ``cycle``, ``mzi``,
``detector``, ``extractor``, ``run``.

Record files are little-endian binary with a 32-octet header::

    magic "QRNG" | version u16 | adc_bits u16 | kind u32 | reserved u32 |
    count u64 | config hash (8 octets)

followed by ``count`` packed records: for signal files
``u_out, u_in, v_in, dphi`` (float64) and ``code`` (uint16); for dark-noise
files only ``code``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
import struct
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .core import LaserParams
from .detection import (DetectorParams, calibrate_adc, calibrate_noise_sigma,
                        capture_noise_reference, digitize)
from .entropy import circular_autocorrelation, quantum_entropy
from .extractor import ExtractorConfig, codes_to_bits, extract, output_rate
from .interferometer import EnergyRecords, MziParams, estimate_visibility, transform_train
from .laser import GainCycleConfig, generate_pulse_train
from .stattests import run_battery

FORMAT_VERSION = 1
RECORD_MAGIC = b"QRNG"
KIND_SIGNAL = 1
KIND_NOISE = 2
_HEADER = struct.Struct("<4sHHIIQ8s")
SIGNAL_DTYPE = np.dtype([("u_out", "<f8"), ("u_in", "<f8"), ("v_in", "<f8"),
                         ("dphi", "<f8"), ("code", "<u2")])
NOISE_DTYPE = np.dtype([("code", "<u2")])

PUBLISHED_RATE = 1.11e9


class ConfigError(ValueError):
    pass


class RecordFileError(ValueError):
    pass


@dataclass(frozen=True)
class CycleSettings:
    t_high: float = 1e-9
    dt: float | None = None
    energy_spread: float = 0.01
    phase_noise: float = 0.0


@dataclass(frozen=True)
class DetectorSettings:
    """Detector keys accepted in config files; prf and pulse width come from the laser."""

    sample_rate: float = 2.5e9
    adc_bits: int = 12
    adc_min: float = -2048.0
    adc_max: float = 2047.0
    highpass_cutoff: float = 40e6
    input_bandwidth: float = 200e6
    noise_sigma: float = 0.0
    responsivity: float = 1e-6
    samples_per_pulse: int = 25
    pulse_delay: float = 2e-9
    ac_baseline: float = 0.0
    drift_amplitude: float = 0.0
    drift_period: float = 1e4
    auto_calibrate: bool = True


@dataclass(frozen=True)
class ExtractorSettings:
    input_block_bits: int = 553
    digest_bits: int = 512


@dataclass(frozen=True)
class RunSettings:
    n_pulses: int = 1_000_000
    seed: int = 20120103
    output_dir: str = "out"
    bits_per_pulse: int = 12
    calibration_pulses: int = 200_000


@dataclass(frozen=True)
class PipelineConfig:
    laser: LaserParams = field(default_factory=LaserParams)
    cycle: CycleSettings = field(default_factory=CycleSettings)
    mzi: MziParams = field(default_factory=MziParams)
    detector: DetectorSettings = field(default_factory=DetectorSettings)
    extractor: ExtractorSettings = field(default_factory=ExtractorSettings)
    run: RunSettings = field(default_factory=RunSettings)

    def __post_init__(self):
        violations = []
        if not math.isclose(self.mzi.t_loop, 1.0 / self.laser.prf, rel_tol=1e-6):
            violations.append(f"mzi.t_loop={self.mzi.t_loop:.9e} s does not match 1/laser.prf="
                              f"{1.0 / self.laser.prf:.9e} s")
        spp = int(self.detector.sample_rate // self.laser.prf)
        if self.detector.samples_per_pulse != spp:
            violations.append(f"detector.samples_per_pulse={self.detector.samples_per_pulse} but "
                              f"floor(sample_rate/prf)={spp}")
        if not 1 <= self.run.bits_per_pulse <= self.detector.adc_bits:
            violations.append("run.bits_per_pulse must lie in [1, detector.adc_bits]")
        if self.run.n_pulses < 2:
            violations.append("run.n_pulses must be >= 2")
        if violations:
            raise ConfigError("; ".join(violations))

    # component builders -------------------------------------------------
    def gain_cycle(self) -> GainCycleConfig:
        c = self.cycle
        kw = dict(energy_spread=c.energy_spread, phase_noise=c.phase_noise)
        if c.dt is not None:
            kw["dt"] = c.dt
        return GainCycleConfig.for_laser(self.laser, t_high=c.t_high, **kw)

    def detector_params(self) -> DetectorParams:
        d = self.detector
        return DetectorParams(
            sample_rate=d.sample_rate, adc_bits=d.adc_bits, adc_range=(d.adc_min, d.adc_max),
            highpass_cutoff=d.highpass_cutoff, input_bandwidth=d.input_bandwidth,
            noise_sigma=d.noise_sigma, responsivity=d.responsivity,
            samples_per_pulse=d.samples_per_pulse, prf=self.laser.prf,
            pulse_width=self.laser.pulse_width, pulse_delay=d.pulse_delay,
            ac_baseline=d.ac_baseline, drift_amplitude=d.drift_amplitude,
            drift_period=d.drift_period,
        )

    def extractor_config(self) -> ExtractorConfig:
        e = self.extractor
        return ExtractorConfig(digest_bits=e.digest_bits, input_block_bits=e.input_block_bits)

    def with_detector(self, p: DetectorParams, auto_calibrate: bool = False) -> PipelineConfig:
        lo, hi = p.adc_range
        det = replace(self.detector, adc_min=lo, adc_max=hi, noise_sigma=p.noise_sigma,
                      ac_baseline=p.ac_baseline, auto_calibrate=auto_calibrate)
        return replace(self, detector=det)

    def seeds(self) -> dict:
        """Independent integer seeds per stage, derived from ``run.seed``."""
        names = ("train", "detection", "noise", "calibration", "calibration_noise")
        children = np.random.SeedSequence(self.run.seed).spawn(len(names))
        return {n: int(c.generate_state(1, np.uint64)[0]) for n, c in zip(names, children)}


_SECTIONS = {
    "laser": LaserParams,
    "cycle": CycleSettings,
    "mzi": MziParams,
    "detector": DetectorSettings,
    "extractor": ExtractorSettings,
    "run": RunSettings,
}


def _coerce(raw: str, default, key: str):
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        try:
            val = float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
        if val != int(val):
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
        return int(val)
    if isinstance(default, str):
        return raw
    if raw.lower() in ("none", "auto"):
        return None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    base = PipelineConfig() if base is None else base
    updates = {name: {} for name in _SECTIONS}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        section, _, name = key.partition(".")
        if section not in _SECTIONS or not name:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        current = getattr(base, section)
        valid = {f.name: f for f in fields(current)}
        if name not in valid:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        default = getattr(current, name)
        if default is None:
            default = 0.0
        updates[section][name] = _coerce(value, default, key)
    sections = {}
    try:
        for section, kw in updates.items():
            sections[section] = replace(getattr(base, section), **kw) if kw else getattr(base, section)
        return PipelineConfig(**sections)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> PipelineConfig:
    return parse_config(Path(path).read_text())


def dump_config(cfg: PipelineConfig) -> str:
    lines = []
    for section in _SECTIONS:
        obj = getattr(cfg, section)
        for f in fields(obj):
            val = getattr(obj, f.name)
            if isinstance(val, bool):
                val = "true" if val else "false"
            elif isinstance(val, float):
                val = repr(val)
            elif val is None:
                val = "auto"
            lines.append(f"{section}.{f.name} = {val}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: PipelineConfig) -> bytes:
    return hashlib.sha256(dump_config(cfg).encode()).digest()[:8]


# record files ---------------------------------------------------------------

@dataclass
class RecordFile:
    kind: int
    adc_bits: int
    config_hash: bytes
    codes: np.ndarray
    energies: EnergyRecords | None = None

    def __len__(self):
        return len(self.codes)


def write_records(path, codes, adc_bits: int, chash: bytes, energies: EnergyRecords | None = None):
    codes = np.asarray(codes)
    if energies is None:
        body = np.empty(codes.size, dtype=NOISE_DTYPE)
        kind = KIND_NOISE
    else:
        body = np.empty(codes.size, dtype=SIGNAL_DTYPE)
        for name in ("u_out", "u_in", "v_in", "dphi"):
            body[name] = getattr(energies, name)
        kind = KIND_SIGNAL
    body["code"] = codes
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(RECORD_MAGIC, FORMAT_VERSION, adc_bits, kind, 0, codes.size, chash))
        fh.write(body.tobytes())


def read_records(path) -> RecordFile:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise RecordFileError(f"{path}: file too short for a record header")
    magic, version, adc_bits, kind, _, count, chash = _HEADER.unpack_from(blob)
    if magic != RECORD_MAGIC:
        raise RecordFileError(f"{path}: not a record file")
    if version != FORMAT_VERSION:
        raise RecordFileError(f"{path}: record format version {version}, this tool reads {FORMAT_VERSION}")
    dtype = {KIND_SIGNAL: SIGNAL_DTYPE, KIND_NOISE: NOISE_DTYPE}.get(kind)
    if dtype is None:
        raise RecordFileError(f"{path}: unknown record kind {kind}")
    if len(blob) - _HEADER.size != count * dtype.itemsize:
        raise RecordFileError(f"{path}: header announces {count} records but body size disagrees")
    body = np.frombuffer(blob, dtype=dtype, offset=_HEADER.size)
    energies = None
    if kind == KIND_SIGNAL:
        energies = EnergyRecords(*(np.array(body[n]) for n in ("u_out", "u_in", "v_in", "dphi")))
    return RecordFile(kind, adc_bits, chash, body["code"].astype(np.int64), energies)


def csv_header(cfg_or_hash) -> list:
    chash = cfg_or_hash if isinstance(cfg_or_hash, bytes) else config_hash(cfg_or_hash)
    return [f"qrngsim {__version__} format {FORMAT_VERSION} config {chash.hex()}"]


def check_csv_header(path) -> str:
    """Return the config hash of a CSV artifact, refusing other tool versions."""
    with open(path) as fh:
        first = fh.readline()
    parts = first.lstrip("# ").split()
    if len(parts) < 6 or parts[0] != "qrngsim":
        raise RecordFileError(f"{path}: missing qrngsim header")
    if parts[1] != __version__ or parts[3] != str(FORMAT_VERSION):
        raise RecordFileError(f"{path}: written by qrngsim {parts[1]} format {parts[3]}")
    return parts[5]


# stages ---------------------------------------------------------------------

@dataclass
class SimulationResult:
    records: EnergyRecords
    codes: np.ndarray
    clipped: int
    detector: DetectorParams
    visibility: float


def calibrate_detector(cfg: PipelineConfig, noise_target_bits: float | None = None) -> DetectorParams:
    """ADC baseline/range pass, plus the noise-floor bisection when a target is given."""
    seeds = cfg.seeds()
    p = cfg.detector_params()
    n_cal = max(cfg.run.calibration_pulses, 1001)
    train = generate_pulse_train(n_cal + 1, cfg.gain_cycle(), seeds["calibration"])
    p = calibrate_adc(transform_train(train, cfg.mzi), p)
    if noise_target_bits is not None:
        p = calibrate_noise_sigma(p, noise_target_bits, n_pulses=n_cal, seed=seeds["calibration_noise"])
    return p


def calibrate(cfg: PipelineConfig, noise_target_bits: float = 0.7) -> PipelineConfig:
    """Config with a calibrated ADC range, AC baseline and noise floor."""
    return cfg.with_detector(calibrate_detector(cfg, noise_target_bits))


def active_detector(cfg: PipelineConfig) -> DetectorParams:
    if cfg.detector.auto_calibrate:
        return calibrate_detector(cfg)
    return cfg.detector_params()


def simulate(cfg: PipelineConfig, detector: DetectorParams | None = None) -> SimulationResult:
    seeds = cfg.seeds()
    p = active_detector(cfg) if detector is None else detector
    train = generate_pulse_train(cfg.run.n_pulses + 1, cfg.gain_cycle(), seeds["train"])
    records = transform_train(train, cfg.mzi)
    codes, clipped = digitize(records, p, np.random.default_rng(seeds["detection"]))
    vis = estimate_visibility(records.u_out, float(records.u_in.mean()), float(records.v_in.mean()),
                              min_records=min(1000, len(records)))
    return SimulationResult(records, codes, clipped, p, vis)


def noise_reference(cfg: PipelineConfig, detector: DetectorParams | None = None) -> np.ndarray:
    p = active_detector(cfg) if detector is None else detector
    return capture_noise_reference(cfg.run.n_pulses, p, np.random.default_rng(cfg.seeds()["noise"]))


@dataclass
class AnalysisResult:
    curve: list
    report: object
    correlation: object


def analyze(codes, noise_codes, adc_bits: int, b_max: int | None = None) -> AnalysisResult:
    codes = np.asarray(codes)
    if codes.size < 2:
        raise ValueError("insufficient samples: need at least two records")
    b_max = adc_bits if b_max is None else b_max
    span = (0, 2 ** adc_bits)
    if noise_codes is None:
        noise_codes = np.zeros(1, dtype=np.int64)
    if b_max > adc_bits:
        raise ValueError(f"b_max={b_max} exceeds the ADC resolution {adc_bits}")
    curve = [quantum_entropy(codes, noise_codes, b, span) for b in range(1, b_max + 1)]
    return AnalysisResult(curve, curve[-1], circular_autocorrelation(codes))


@dataclass
class PipelineResult:
    simulation: SimulationResult
    noise_codes: np.ndarray
    analysis: AnalysisResult
    raw_bits: object
    extracted: object
    raw_battery: object
    battery: object
    rate: float
    realized_reduction: float


def run_pipeline(cfg: PipelineConfig, alpha: float = 0.01, workers: int = 1) -> PipelineResult:
    p = active_detector(cfg)
    sim = simulate(cfg, p)
    noise = noise_reference(cfg, p)
    analysis = analyze(sim.codes, noise, p.adc_bits)
    raw = codes_to_bits(sim.codes, cfg.run.bits_per_pulse, p.adc_bits)
    ecfg = cfg.extractor_config()
    extracted = extract(raw, ecfg, workers=workers)
    return PipelineResult(
        simulation=sim,
        noise_codes=noise,
        analysis=analysis,
        raw_bits=raw,
        extracted=extracted,
        raw_battery=run_battery(raw, alpha),
        battery=run_battery(extracted, alpha),
        rate=output_rate(cfg.laser.prf, cfg.run.bits_per_pulse, 1.08),
        realized_reduction=ecfg.reduction_factor,
    )


def histogram_csv(values, bins: int = 256, header=()) -> str:
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins)
    lines = [f"# {h}" for h in header] + ["bin_low,bin_high,count"]
    lines += [f"{edges[i]!r},{edges[i + 1]!r},{counts[i]}" for i in range(bins)]
    return "\n".join(lines) + "\n"


def asdict(cfg: PipelineConfig) -> dict:
    return dataclasses.asdict(cfg)
