"""Command-line front end: synth, estimate, sweep, weights, list-experiments."""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import fields, replace

from .acf import write_acf_csv
from .combine import (
    rc_chord_crossings,
    weights_slope_analytic,
    weights_slope_online,
    weights_slope_zc,
)
from .core import WEIGHTS_MODES, BaudscopeError, EchoProfile, SignalSpec
from .estimator import DEFAULT_MIN_RATE_HZ, SymbolRateEstimator
from .harness import EXPERIMENTS, ingest_iq, load_config, preset_config, rows_to_csv, run_sweep
from .iqfile import write_iq
from .synth import n_symbols_for, synthesize

ESTIMATE_COLUMNS = (
    "symbol_rate_hz",
    "combined_period_samples",
    "freq_offset_hz",
    "sample_rate_hz",
    "interpolator",
    "weights_mode",
)


def _float(text: str) -> float:
    return float(text)


def _add_spec_args(p: argparse.ArgumentParser) -> None:
    defaults = SignalSpec()
    for f in fields(SignalSpec):
        default = getattr(defaults, f.name)
        p.add_argument(
            f"--{f.name.replace('_', '-')}",
            type=int if isinstance(default, int) else _float,
            default=default,
            help=f"default {default}",
        )


def _add_estimator_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--interpolator", choices=("spline", "linear"), default="spline")
    p.add_argument("--max-zero-crossing", type=int, default=5)
    p.add_argument("--points-before", type=int, default=4)
    p.add_argument("--points-after", type=int, default=1)
    p.add_argument("--combine-weights", choices=WEIGHTS_MODES, default="single")
    p.add_argument("--rolloff-hint", type=float, default=None)
    p.add_argument("--crossing", type=int, default=1)
    p.add_argument("--no-compensation", action="store_true", help="skip frequency-offset removal")


def cmd_synth(args) -> int:
    spec_kw = {f.name: getattr(args, f.name) for f in fields(SignalSpec)}
    spec = SignalSpec(**spec_kw)
    if args.n_samples is not None:
        spec = replace(spec, n_symbols=n_symbols_for(args.n_samples, spec))
    echo = EchoProfile.preset(args.echo_preset) if args.echo_preset is not None else None
    buf = synthesize(spec, echo, pulse=args.pulse)
    write_iq(buf, args.output)
    print(f"wrote {len(buf)} samples at {buf.sample_rate_hz:g} Hz to {args.output}")
    return 0


def cmd_estimate(args) -> int:
    buf = ingest_iq(args.input, args.sample_rate_hz)
    est = SymbolRateEstimator(
        sample_rate_hz=args.sample_rate_hz,
        min_rate_hz=args.min_rate_hz,
        interpolator=args.interpolator,
        max_zero_crossing=args.max_zero_crossing,
        points_before=args.points_before,
        points_after=args.points_after,
        combine_weights=args.combine_weights,
        rolloff_hint=args.rolloff_hint,
        crossing=args.crossing,
        compensate_offset=not args.no_compensation,
        n_jobs=args.jobs,
    ).fit(buf)
    result = est.estimate_
    d = result.as_dict()
    for key, value in d.items():
        if isinstance(value, list):
            value = " ".join(repr(v) for v in value)
        print(f"{key} = {value}")
    print()
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(ESTIMATE_COLUMNS)
    writer.writerow([d[c] for c in ESTIMATE_COLUMNS])
    if args.acf_out:
        write_acf_csv(est.acf_, args.acf_out)
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config) if args.config else preset_config(args.experiment)
    if args.trials is not None or args.out is not None:
        cfg = replace(
            cfg,
            trials=args.trials if args.trials is not None else cfg.trials,
            out_path=args.out if args.out is not None else cfg.out_path,
        )
    rows = run_sweep(cfg)
    if not cfg.out_path:
        sys.stdout.write(rows_to_csv(rows))
    else:
        print(f"wrote {len(rows)} rows to {cfg.out_path}", file=sys.stderr)
    return 0


def cmd_weights(args) -> int:
    p, a = args.p, args.rolloff
    table = {
        "slope_analytic": weights_slope_analytic(a, p),
        "slope_online": weights_slope_online(rc_chord_crossings(a, args.period, p)),
        "slope_zc": weights_slope_zc(a, p),
    }
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["m", *table])
    for m in range(p):
        writer.writerow([m + 1, *(f"{w[m]:.6f}" for w in table.values())])
    return 0


def cmd_list(args) -> int:
    for name, exp in EXPERIMENTS.items():
        print(f"{name:18s} grid over {exp.grid_key:15s} {exp.description}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="baudscope", description="Blind symbol-rate estimation from ACF zero crossings."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic IQ file")
    _add_spec_args(p)
    p.add_argument("--n-samples", type=int, default=None, help="override n_symbols by length")
    p.add_argument("--echo-preset", type=int, default=None, choices=range(10))
    p.add_argument("--pulse", action="store_true", help="single isolated pulse instead of data")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("estimate", help="estimate the symbol rate of an IQ file")
    p.add_argument("input")
    p.add_argument("--sample-rate-hz", type=float, required=True)
    p.add_argument("--min-rate-hz", type=float, default=DEFAULT_MIN_RATE_HZ)
    _add_estimator_args(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--acf-out", default=None, help="also dump the ACF as CSV")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep and emit CSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="flat key = value config file")
    src.add_argument("--experiment", choices=sorted(EXPERIMENTS), help="run a preset as is")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("weights", help="print combining weight tables as CSV")
    p.add_argument("--rolloff", type=float, default=0.15)
    p.add_argument("-p", type=int, default=5)
    p.add_argument("--period", type=float, default=8.0, help="RC period for chord slopes")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("list-experiments", help="list the named sweep presets")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BaudscopeError, ValueError, OSError) as exc:
        print(f"baudscope: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
