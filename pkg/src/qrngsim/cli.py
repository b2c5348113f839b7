"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 I/O or file-format error,
3 randomness battery failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .entropy import correlation_csv, entropy_csv, shannon_entropy
from .extractor import BitStream, codes_to_bits, extract, output_rate
from .pipeline import (PUBLISHED_RATE, ConfigError, PipelineConfig, RecordFileError,
                       active_detector, analyze, calibrate, config_hash, csv_header, dump_config,
                       histogram_csv, load_config, noise_reference, read_records, run_pipeline,
                       simulate, write_records)
from .stattests import run_battery

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_BATTERY = 0, 1, 2, 3


class StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"stage '{stage}' failed: {exc}")
        self.stage = stage
        self.cause = exc


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    run = cfg.run
    if args.seed is not None:
        run = replace(run, seed=args.seed)
    if args.pulses is not None:
        run = replace(run, n_pulses=args.pulses)
    if args.out is not None:
        run = replace(run, output_dir=args.out)
    if args.bits_per_pulse is not None:
        run = replace(run, bits_per_pulse=args.bits_per_pulse)
    try:
        return replace(cfg, run=run)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _outdir(cfg) -> Path:
    out = Path(cfg.run.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    path.write_text(text)
    print(f"wrote {path}")


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = _outdir(cfg)
    t0 = time.perf_counter()
    sim = simulate(cfg)
    elapsed = time.perf_counter() - t0
    chash = config_hash(cfg)
    write_records(out / "records.bin", sim.codes, sim.detector.adc_bits, chash, sim.records)
    _write(out / "histogram.csv", histogram_csv(sim.records.u_out, header=csv_header(chash)))
    n = len(sim.records)
    print(f"records: {n}")
    print(f"mean output energy: {sim.records.u_out.mean():.6g} photons")
    print(f"visibility estimate: {sim.visibility:.4f}")
    print(f"ADC saturation events: {sim.clipped}")
    print(f"elapsed: {elapsed:.2f} s ({n / elapsed:.3g} pulses/s)")
    return EXIT_OK


def cmd_noise_ref(args) -> int:
    cfg = _config(args)
    out = _outdir(cfg)
    p = active_detector(cfg)
    codes = noise_reference(cfg, p)
    write_records(out / "noise.bin", codes, p.adc_bits, config_hash(cfg))
    h = shannon_entropy(codes, p.adc_bits, p.code_range)
    print(f"dark records: {codes.size}; entropy at b={p.adc_bits}: {h:.4f} bits")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _config(args)
    out = _outdir(cfg)
    cal = calibrate(cfg, args.noise_bits)
    path = out / "calibrated.cfg"
    _write(path, dump_config(cal))
    print(f"noise_sigma = {cal.detector.noise_sigma:.6g} detector units per sample")
    print(f"adc range = [{cal.detector.adc_min:.6g}, {cal.detector.adc_max:.6g}]")
    print(f"ac baseline = {cal.detector.ac_baseline:.6g} photons")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _config(args)
    out = _outdir(cfg)
    rec = read_records(args.records)
    if len(rec) < 2:
        raise RecordFileError(f"{args.records}: insufficient samples ({len(rec)} record)")
    noise = read_records(args.noise).codes if args.noise else None
    res = analyze(rec.codes, noise, rec.adc_bits, args.b_max)
    header = csv_header(rec.config_hash)
    _write(out / "entropy_curve.csv", entropy_csv(res.curve, header))
    _write(out / "entropy_report.csv", entropy_csv([res.report], header))
    _write(out / "correlation.csv", correlation_csv(res.correlation, args.max_lag, header))
    r = res.report
    print(f"b={r.b}: total {r.total_entropy:.4f} bits, noise {r.noise_entropy:.4f} bits, "
          f"quantum {r.quantum_entropy:.4f} bits{' (clamped)' if r.clamped else ''}")
    print(f"plug-in bias ~{r.plugin_bias:.4f} bits; min-entropy {r.min_entropy:.4f} bits")
    lags = res.correlation.r[1:args.max_lag + 1]
    print(f"max |r[k]|, 1 <= k <= {args.max_lag}: {np.max(np.abs(lags)):.3e}")
    return EXIT_OK


def cmd_extract(args) -> int:
    cfg = _config(args)
    out = _outdir(cfg)
    rec = read_records(args.records)
    raw = codes_to_bits(rec.codes, cfg.run.bits_per_pulse, rec.adc_bits)
    ecfg = cfg.extractor_config()
    res = extract(raw, ecfg, workers=args.workers, details=True)
    raw.to_file(out / "raw.bits", raw=args.raw)
    res.stream.to_file(out / "extracted.bits", raw=args.raw)
    print(f"raw bits: {raw.bit_len}; blocks: {res.blocks}; discarded tail: {res.discarded_bits} bits")
    print(f"extracted bits: {res.stream.bit_len}; realized reduction {ecfg.reduction_factor:.4f}")
    return EXIT_OK


def _battery(stream: BitStream, alpha: float, path: Path, label: str):
    rep = run_battery(stream, alpha)
    _write(path, rep.to_csv())
    print(f"[{label}] " + rep.summary())
    return rep


def cmd_test(args) -> int:
    cfg = _config(args)
    out = _outdir(cfg)
    stream = BitStream.from_file(args.bits, raw=True if args.raw else None)
    rep = _battery(stream, args.alpha, out / "battery.csv", Path(args.bits).name)
    return EXIT_OK if rep.all_passed else EXIT_BATTERY


def cmd_pipeline(args) -> int:
    cfg = _config(args)
    out = _outdir(cfg)
    try:
        res = run_pipeline(cfg, args.alpha, workers=args.workers)
    except (ValueError, RuntimeError) as exc:
        raise StageError("pipeline", exc) from exc
    chash = config_hash(cfg)
    p = res.simulation.detector
    write_records(out / "records.bin", res.simulation.codes, p.adc_bits, chash, res.simulation.records)
    write_records(out / "noise.bin", res.noise_codes, p.adc_bits, chash)
    header = csv_header(chash)
    _write(out / "histogram.csv", histogram_csv(res.simulation.records.u_out, header=header))
    _write(out / "entropy_curve.csv", entropy_csv(res.analysis.curve, header))
    _write(out / "correlation.csv", correlation_csv(res.analysis.correlation, 1000, header))
    res.raw_bits.to_file(out / "raw.bits", raw=args.raw)
    res.extracted.to_file(out / "extracted.bits", raw=args.raw)
    _write(out / "battery_raw.csv", res.raw_battery.to_csv())
    _write(out / "battery.csv", res.battery.to_csv())
    r = res.analysis.report
    print(f"visibility estimate: {res.simulation.visibility:.4f}")
    print(f"entropy at b={r.b}: total {r.total_entropy:.4f}, noise {r.noise_entropy:.4f}, "
          f"quantum {r.quantum_entropy:.4f} bits")
    print("[raw] " + res.raw_battery.summary())
    print("[extracted] " + res.battery.summary())
    realized = output_rate(cfg.laser.prf, cfg.run.bits_per_pulse, res.realized_reduction)
    print(f"rate: prf x {cfg.run.bits_per_pulse} bits / 1.08 = {res.rate / 1e9:.4f} Gbps "
          f"(block geometry {res.realized_reduction:.4f}: {realized / 1e9:.4f} Gbps); "
          f"published figure {PUBLISHED_RATE / 1e9:.2f} Gbps, "
          f"difference {(PUBLISHED_RATE - res.rate) / 1e6:.0f} Mbps")
    return EXIT_OK if res.battery.all_passed else EXIT_BATTERY


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--seed", type=int)
    common.add_argument("--pulses", type=int)
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--bits-per-pulse", type=int)
    common.add_argument("--alpha", type=float, default=0.01)
    common.add_argument("--raw", action="store_true", help="headerless bitstream files")
    common.add_argument("--workers", type=int, default=1)

    parser = argparse.ArgumentParser(prog="qrngsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common]).set_defaults(func=cmd_simulate)
    sub.add_parser("noise-ref", parents=[common]).set_defaults(func=cmd_noise_ref)
    p = sub.add_parser("calibrate", parents=[common])
    p.add_argument("--noise-bits", type=float, default=0.7)
    p.set_defaults(func=cmd_calibrate)
    p = sub.add_parser("analyze", parents=[common])
    p.add_argument("records")
    p.add_argument("--noise", metavar="PATH")
    p.add_argument("--b-max", type=int)
    p.add_argument("--max-lag", type=int, default=1000)
    p.set_defaults(func=cmd_analyze)
    p = sub.add_parser("extract", parents=[common])
    p.add_argument("records")
    p.set_defaults(func=cmd_extract)
    p = sub.add_parser("test", parents=[common])
    p.add_argument("bits")
    p.set_defaults(func=cmd_test)
    sub.add_parser("pipeline", parents=[common]).set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, RecordFileError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(exc.cause, ConfigError) else EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
