"""Command-line front end: `ebi-unmix {run,synth,eval,filter-design}`.

run           process a CSV recording through the separation pipeline
synth         generate a synthetic mixture + ground-truth CSV pair
eval          score estimated components against ground-truth sources
filter-design print biquad coefficients and a frequency-response table

Config precedence for `run`: command-line flags > --config JSON file >
built-in defaults. The ICA seed falls back to the EBI_UNMIX_SEED
environment variable when neither flag nor config file provides one.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .dsp import SignalMatrix, design_butterworth_lp2, frequency_response
from .fastica import CONTRASTS, IcaConfig
from .metrics import match_components
from .pipeline import (
    FILTER_POSITIONS,
    MODES,
    PipelineConfig,
    read_csv,
    run_pipeline,
    write_csv,
)
from .synth import SourceSpec, default_scenario

SEED_ENV_VAR = "EBI_UNMIX_SEED"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ebi-unmix",
        description="Separate cardiac and respiratory components from multichannel recordings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the separation pipeline on a CSV recording")
    run.add_argument("--input", required=True, help="input CSV (see README for format)")
    run.add_argument("--config", help="JSON config file; flags override its values")
    run.add_argument("--truth", help="ground-truth source CSV for scoring")
    run.add_argument("--out-dir", default=".", help="directory for outputs (default: cwd)")
    run.add_argument("--frame-len", type=int, help="samples per frame (default 10000)")
    run.add_argument("--decimate", type=int, help="decimation factor (default 10)")
    run.add_argument("--cutoff-hz", type=float, help="low-pass cutoff in Hz (default 40)")
    run.add_argument("--filter-position", choices=FILTER_POSITIONS,
                     help="filter after (default) or before decimation")
    run.add_argument("--components", type=int, help="retained dimension (default 2)")
    run.add_argument("--contrast", choices=CONTRASTS, help="ICA contrast (default logcosh)")
    run.add_argument("--tol", type=float, help="ICA convergence tolerance (default 1e-6)")
    run.add_argument("--max-iter", type=int, help="ICA iteration cap (default 200)")
    run.add_argument("--seed", type=int, help=f"ICA seed (fallback: ${SEED_ENV_VAR}, then 0)")
    run.add_argument("--mode", choices=MODES, help="pipeline mode (default pca_then_ica)")

    synth = sub.add_parser("synth", help="generate a synthetic mixture and its ground truth")
    synth.add_argument("--out-dir", default=".", help="output directory")
    synth.add_argument("--stem", default="ebi_synth", help="output file stem")
    synth.add_argument("--n", type=int, default=25000, help="number of samples")
    synth.add_argument("--rate", type=float, default=1000.0, help="sample rate in Hz")
    synth.add_argument("--seed", type=int, default=None, help="generation seed")
    synth.add_argument("--noise-sigma", type=float, default=0.05, help="channel noise sigma")
    synth.add_argument("--correlation-injection", type=float, default=0.0,
                       help="respiratory->cardiac amplitude modulation depth in [0,1)")
    synth.add_argument("--cardiac-hz", type=float, default=1.2, help="cardiac fundamental")
    synth.add_argument("--resp-hz", type=float, default=0.25, help="respiratory fundamental")
    synth.add_argument("--jitter-pct", type=float, default=2.0, help="beat interval jitter %%")
    synth.add_argument("--harmonics", type=int, default=3, help="respiratory harmonic count")

    ev = sub.add_parser("eval", help="score component CSV against ground-truth CSV")
    ev.add_argument("--components", required=True, help="estimated components CSV")
    ev.add_argument("--truth", required=True, help="ground-truth sources CSV")
    ev.add_argument("--out", help="write the JSON report here instead of stdout")

    fd = sub.add_parser("filter-design", help="print biquad coefficients and response table")
    fd.add_argument("--cutoff-hz", type=float, required=True)
    fd.add_argument("--rate", type=float, required=True)
    fd.add_argument("--points", type=int, default=25, help="response table rows")

    return parser


def _resolve_seed(flag_value, file_value) -> int:
    if flag_value is not None:
        return int(flag_value)
    if file_value is not None:
        return int(file_value)
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        return int(env)
    return 0


def _build_config(args) -> PipelineConfig:
    file_cfg: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
    file_ica = file_cfg.get("ica", {})

    def pick(flag, file_key, default, section=None):
        if flag is not None:
            return flag
        source = file_ica if section == "ica" else file_cfg
        return source.get(file_key, default)

    ica = IcaConfig(
        contrast=pick(args.contrast, "contrast", "logcosh", "ica"),
        max_iterations=pick(args.max_iter, "max_iterations", 200, "ica"),
        tolerance=pick(args.tol, "tolerance", 1e-6, "ica"),
        orthogonalization=file_ica.get("orthogonalization", "symmetric"),
        seed=_resolve_seed(args.seed, file_ica.get("seed")),
    )
    return PipelineConfig(
        frame_len=pick(args.frame_len, "frame_len", 10000),
        decimation_factor=pick(args.decimate, "decimation_factor", 10),
        filter_order=file_cfg.get("filter_order", 2),
        cutoff_hz=pick(args.cutoff_hz, "cutoff_hz", 40.0),
        filter_position=pick(args.filter_position, "filter_position", "after_decimate"),
        retained_components=pick(args.components, "retained_components", 2),
        ica=ica,
        mode=pick(args.mode, "mode", "pca_then_ica"),
    )


def _with_time_column(signal: SignalMatrix) -> SignalMatrix:
    extended = np.column_stack([signal.times(), signal.samples])
    return SignalMatrix(
        extended, signal.sample_rate_hz, ("time_s",) + signal.channel_labels
    )


def _drop_time_column(signal: SignalMatrix) -> SignalMatrix:
    if "time_s" not in signal.channel_labels:
        return signal
    keep = [i for i, lab in enumerate(signal.channel_labels) if lab != "time_s"]
    return SignalMatrix(
        signal.samples[:, keep],
        signal.sample_rate_hz,
        tuple(signal.channel_labels[i] for i in keep),
    )


def _write_periodogram(signal: SignalMatrix, path) -> None:
    n = signal.n_samples
    freqs = np.fft.rfftfreq(n, d=1.0 / signal.sample_rate_hz)
    power = np.abs(np.fft.rfft(signal.samples, axis=0)) ** 2 / n
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("freq_hz," + ",".join(signal.channel_labels) + "\n")
        for i, f in enumerate(freqs):
            fh.write(f"{f:.17g}," + ",".join(f"{v:.17g}" for v in power[i]) + "\n")


def _cmd_run(args) -> int:
    config = _build_config(args)
    signal = read_csv(args.input)
    truth = read_csv(args.truth) if args.truth else None

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem

    components, report = run_pipeline(signal, config, truth)

    for idx, comp in enumerate(components):
        if comp is None:
            continue
        write_csv(_with_time_column(comp), out_dir / f"{stem}_f{idx}_components.csv")
        _write_periodogram(comp, out_dir / f"{stem}_f{idx}_periodogram.csv")

    report_path = out_dir / f"{stem}_report.json"
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    for frame in report.frames:
        if frame.ok:
            conv = frame.convergence or {}
            status = "converged" if conv.get("converged") else (
                "no ICA" if frame.convergence is None else "NOT converged")
            print(f"frame {frame.index}: ok ({status}, {frame.seconds:.3f}s)")
        else:
            print(f"frame {frame.index}: FAILED at {frame.stage}: {frame.error}")
    print(f"report: {report_path}")
    return 2 if report.any_frame_failed else 0


def _cmd_synth(args) -> int:
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get(SEED_ENV_VAR, "0"))
    mixture, truth = default_scenario(
        n=args.n,
        rate_hz=args.rate,
        seed=seed,
        noise_sigma=args.noise_sigma,
        correlation_injection=args.correlation_injection,
        cardiac=SourceSpec.cardiac(args.cardiac_hz, jitter_pct=args.jitter_pct),
        respiratory=SourceSpec.respiratory(args.resp_hz, harmonics=args.harmonics),
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    mixture_path = out_dir / f"{args.stem}_mixture.csv"
    truth_path = out_dir / f"{args.stem}_truth.csv"
    write_csv(mixture, mixture_path)
    write_csv(truth, truth_path)
    print(f"wrote {mixture_path} ({mixture.n_samples} x {mixture.n_channels} @ {args.rate} Hz)")
    print(f"wrote {truth_path}")
    return 0


def _cmd_eval(args) -> int:
    components = _drop_time_column(read_csv(args.components))
    truth = _drop_time_column(read_csv(args.truth))
    report = match_components(components.samples, truth.samples)
    payload = report.to_dict()
    payload["estimated_labels"] = list(components.channel_labels)
    payload["truth_labels"] = list(truth.channel_labels)
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
        print(f"report: {args.out}")
    else:
        print(text)
    return 0


def _cmd_filter_design(args) -> int:
    coeffs = design_butterworth_lp2(args.cutoff_hz, args.rate)
    print(f"# 2nd-order Butterworth low-pass, cutoff {args.cutoff_hz} Hz @ {args.rate} Hz")
    for name in ("b0", "b1", "b2", "a1", "a2"):
        print(f"{name} = {getattr(coeffs, name):.17g}")
    nyquist = args.rate / 2.0
    freqs = np.logspace(np.log10(args.cutoff_hz / 10.0), np.log10(nyquist * 0.999), args.points)
    mag = np.abs(frequency_response(coeffs, freqs, args.rate))
    print("freq_hz,magnitude,db")
    for f, m in zip(freqs, mag):
        db = -np.inf if m == 0 else 20.0 * np.log10(m)
        print(f"{f:.6g},{m:.6g},{db:.4g}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "synth": _cmd_synth,
        "eval": _cmd_eval,
        "filter-design": _cmd_filter_design,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
