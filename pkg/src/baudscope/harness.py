"""Monte Carlo sweeps over signal and estimator parameters, written as CSV.

Each named experiment fixes which parameter its grid varies and which
signal it synthesizes.  Every trial computes one ACF and then evaluates
all requested variants, interpolators, crossing indices and weight modes
on it, so the rows of one grid point share their noise realizations.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Iterable, Sequence

import numpy as np

from .acf import estimate_acf
from .combine import combine_estimates, weights_for
from .core import (
    WEIGHTS_MODES,
    WORST_ECHO_PRESET,
    BaudscopeError,
    EchoProfile,
    EmptyInput,
    EstimatorConfig,
    IqBuffer,
    SignalSpec,
)
from .estimator import estimate_from_acf, required_max_lag
from .foc import estimate_freq_offset
from .iqfile import read_iq
from .synth import n_symbols_for, realized_period_samples, synthesize

ERR = "ERR"
CSV_COLUMNS = (
    "experiment",
    "grid_value",
    "symbol_rate_hz",
    "variant",
    "interpolator",
    "zc_index",
    "weights_mode",
    "trials",
    "failed",
    "nmse",
    "nrmse",
    "mean_ppm",
    "max_ppm",
)
VARIANTS = ("compensated", "uncompensated")
SIGNALS = ("data", "pulse")


def metric_nmse(true_period: float, estimates: Sequence[float]) -> float:
    """Mean squared relative error ``E[((z - z_est) / z) ** 2]``."""
    if not true_period > 0:
        raise ValueError("true_period must be positive")
    est = np.asarray(estimates, dtype=np.float64)
    if est.size == 0:
        raise EmptyInput("no estimates")
    return float(np.mean(((true_period - est) / true_period) ** 2))


def metric_nrmse(true_period: float, estimates: Sequence[float]) -> float:
    return math.sqrt(metric_nmse(true_period, estimates))


def metric_ppm(true_period: float, estimate):
    """Signed error in parts per million, ``1e6 * (z_est - z) / z``."""
    if not true_period > 0:
        raise ValueError("true_period must be positive")
    return 1e6 * (np.asarray(estimate, dtype=np.float64) - true_period) / true_period


def ingest_iq(path, fs: float) -> IqBuffer:
    """Load a raw interleaved float32 IQ capture sampled at ``fs``."""
    return read_iq(path, fs)


@dataclass(frozen=True)
class Experiment:
    """Recipe of a named sweep.

    ``grid_key`` names the parameter the grid varies: a SignalSpec field,
    ``n_samples`` or ``echo_preset``.  ``overrides`` are applied on top of
    the user configuration's defaults.
    """

    name: str
    grid_key: str
    default_grid: tuple
    description: str
    overrides: dict = field(default_factory=dict)


EXPERIMENTS: dict[str, Experiment] = {
    e.name: e
    for e in (
        Experiment(
            "CorrLength",
            "n_samples",
            (50_000, 500_000, 5_000_000),
            "error vs number of samples averaged by the ACF",
            {"esno_db": 15.0},
        ),
        Experiment(
            "FilterSpan",
            "span_symbols",
            (4, 6, 8, 10, 12),
            "error vs one-sided transmit filter span",
            {"esno_db": 15.0},
        ),
        Experiment(
            "RollOff",
            "rolloff",
            (0.05, 0.15, 0.25, 0.35, 0.5),
            "error vs roll-off factor, spline and linear",
            {"interpolators": ("spline", "linear")},
        ),
        Experiment(
            "RateSweep",
            "symbol_rate_hz",
            tuple(float(r) for r in np.arange(1e6, 7.0001e6, 0.5e6)),
            "error vs symbol rate, spline and linear",
            {"interpolators": ("spline", "linear")},
        ),
        Experiment(
            "EsNoSweep",
            "esno_db",
            (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
            "error vs symbol-level Es/N0",
        ),
        Experiment(
            "FreqOffset",
            "freq_offset_hz",
            (0.0, 50e3, 100e3, 150e3),
            "error vs carrier offset with and without ACF compensation",
            {"variants": VARIANTS, "symbol_rate_hz": 1e6, "esno_db": 15.0},
        ),
        Experiment(
            "EchoChannels",
            "echo_preset",
            tuple(range(10)),
            "single-pulse error for every cable echo preset at several rates",
            {"signal": "pulse", "rates": (1e6, 3e6, 5e6, 6e6, 6.58e6)},
        ),
        Experiment(
            "ZcSweep",
            "echo_preset",
            (WORST_ECHO_PRESET,),
            "per-crossing error under an echo channel",
            {"signal": "pulse", "zc_indices": (1, 2, 3, 4, 5)},
        ),
        Experiment(
            "TruncationOnly",
            "span_symbols",
            (4, 8, 12, 16),
            "per-crossing truncation error: single pulse sampled at 560 MHz",
            {
                "signal": "pulse",
                "sample_rate_hz": 560e6,
                "zc_indices": (1, 2, 3, 4, 5, 6, 7),
                "interpolators": ("spline", "linear"),
            },
        ),
        Experiment(
            "InterpolationOnly",
            "symbol_rate_hz",
            (5e6, 6e6, 6.5882e6, 7e6),
            "per-crossing interpolation error: single pulse with a 12000-symbol span",
            {
                "signal": "pulse",
                "span_symbols": 12000,
                "zc_indices": (1, 2, 3, 4, 5, 6, 7),
                "interpolators": ("spline", "linear"),
            },
        ),
        Experiment(
            "CombineCompare",
            "esno_db",
            (5.0, 10.0, 15.0, 20.0),
            "crossing 1 against every combining weight mode",
            {"weights_modes": WEIGHTS_MODES, "rolloff_hint": 0.15},
        ),
    )
}


@dataclass(frozen=True)
class SweepConfig:
    """Everything that determines a sweep's CSV output.

    Attributes
    ----------
    experiment : str
        Key of :data:`EXPERIMENTS`.
    grid : tuple
        Values taken by the experiment's grid parameter.
    trials : int
        Monte Carlo trials per grid point; trial ``k`` uses seed
        ``base.seed + k``.
    base : SignalSpec
        Signal parameters not set by the grid.
    estimator : EstimatorConfig
        Estimator parameters; ``max_zero_crossing`` is raised to cover
        ``zc_indices`` when needed.
    out_path : str or None
        CSV destination; ``None`` keeps the rows in memory only.
    n_samples : int or None
        Received length; overrides ``base.n_symbols`` when set.
    signal : {"data", "pulse"}
        Random QAM data or one isolated pulse.
    echo_preset : int or None
        Cable echo applied to the signal.
    interpolators, variants, rates, zc_indices, weights_modes : tuple
        What each trial evaluates.  Empty ``rates`` means ``base.symbol_rate_hz``.
    min_rate_hz : float or None
        ACF sizing bound; defaults to half the true rate.
    """

    experiment: str
    grid: tuple
    trials: int = 1
    base: SignalSpec = field(default_factory=SignalSpec)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    out_path: str | None = None
    n_samples: int | None = None
    signal: str = "data"
    echo_preset: int | None = None
    interpolators: tuple[str, ...] = ("spline",)
    variants: tuple[str, ...] = ("compensated",)
    rates: tuple[float, ...] = ()
    zc_indices: tuple[int, ...] = (1,)
    weights_modes: tuple[str, ...] = ()
    min_rate_hz: float | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.grid) == 0:
            raise ValueError("grid must not be empty")
        if self.signal not in SIGNALS:
            raise ValueError(f"signal must be one of {SIGNALS}")
        if any(v not in VARIANTS for v in self.variants) or not self.variants:
            raise ValueError(f"variants must be drawn from {VARIANTS}")
        if any(i not in ("spline", "linear") for i in self.interpolators) or not self.interpolators:
            raise ValueError("interpolators must be drawn from ('spline', 'linear')")
        if any(m not in WEIGHTS_MODES for m in self.weights_modes):
            raise ValueError(f"weights_modes must be drawn from {WEIGHTS_MODES}")
        if any(m < 1 for m in self.zc_indices):
            raise ValueError("zc_indices must be >= 1")


def preset_config(name: str, **kwargs) -> SweepConfig:
    """SweepConfig for experiment ``name`` with its recipe defaults applied.

    Keyword arguments use the flat config-file keys and win over the recipe.
    """
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}")
    exp = EXPERIMENTS[name]
    flat: dict[str, Any] = {"grid": exp.default_grid}
    flat.update(exp.overrides)
    flat.update(kwargs)
    flat["experiment"] = name
    return build_config(flat)


_SPEC_KEYS = {f.name for f in fields(SignalSpec)}
_EST_KEYS = {f.name for f in fields(EstimatorConfig)}
_SWEEP_KEYS = {f.name for f in fields(SweepConfig)} - {"base", "estimator"}
_TUPLE_KEYS = {"grid", "interpolators", "variants", "rates", "zc_indices", "weights_modes"}


def build_config(flat: dict[str, Any]) -> SweepConfig:
    """SweepConfig from flat keys naming SweepConfig, SignalSpec or EstimatorConfig fields."""
    spec_kw, est_kw, sweep_kw = {}, {}, {}
    for key, value in flat.items():
        if key in _SPEC_KEYS:
            spec_kw[key] = value
        elif key in _EST_KEYS:
            est_kw[key] = value
        elif key in _SWEEP_KEYS:
            sweep_kw[key] = tuple(value) if key in _TUPLE_KEYS else value
        else:
            raise ValueError(f"unknown config key {key!r}")
    if sweep_kw.get("experiment") not in EXPERIMENTS:
        raise ValueError(f"config needs a known experiment, got {sweep_kw.get('experiment')!r}")
    if "grid" not in sweep_kw:
        sweep_kw["grid"] = EXPERIMENTS[sweep_kw["experiment"]].default_grid
    return SweepConfig(base=SignalSpec(**spec_kw), estimator=EstimatorConfig(**est_kw), **sweep_kw)


def _parse_scalar(text: str):
    low = text.lower()
    if low in ("none", "null"):
        return None
    if low in ("true", "false"):
        return low == "true"
    if low in ("inf", "+inf"):
        return float("inf")
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text.strip("\"'")


def parse_config_text(text: str) -> dict[str, Any]:
    """Flat ``key = value`` lines; ``#`` starts a comment, commas make lists."""
    flat: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        items = [v.strip() for v in value.split(",") if v.strip()]
        if key in _TUPLE_KEYS:
            flat[key] = tuple(_parse_scalar(v) for v in items)
        else:
            flat[key] = _parse_scalar(value)
    return flat


def load_config(path) -> SweepConfig:
    with open(path) as fh:
        flat = parse_config_text(fh.read())
    if "experiment" in flat:
        name = flat.pop("experiment")
        return preset_config(name, **flat)
    return build_config(flat)


def max_threads() -> int:
    env = os.environ.get("BAUDSCOPE_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("BAUDSCOPE_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def _point_spec(cfg: SweepConfig, grid_value, rate: float | None) -> tuple[SignalSpec, int | None]:
    key = EXPERIMENTS[cfg.experiment].grid_key
    spec = cfg.base
    echo = cfg.echo_preset
    n_samples = cfg.n_samples
    if key == "echo_preset":
        echo = int(grid_value)
    elif key == "n_samples":
        n_samples = int(grid_value)
    else:
        typ = type(getattr(spec, key))
        spec = replace(spec, **{key: typ(grid_value)})
    if rate is not None:
        spec = replace(spec, symbol_rate_hz=float(rate))
    if n_samples is not None and cfg.signal == "data":
        spec = replace(spec, n_symbols=n_symbols_for(n_samples, spec))
    return spec, echo


def _trial_estimator(cfg: SweepConfig) -> EstimatorConfig:
    need = max([cfg.estimator.max_zero_crossing, *cfg.zc_indices])
    return replace(cfg.estimator, max_zero_crossing=need)


def _outcome_keys(cfg: SweepConfig) -> list[tuple[str, str, str, str]]:
    """(variant, interpolator, zc_index, weights_mode) for every CSV row of a point."""
    keys = []
    for variant in cfg.variants:
        for interp in cfg.interpolators:
            for m in cfg.zc_indices:
                keys.append((variant, interp, str(m), "single"))
            for mode in cfg.weights_modes:
                keys.append((variant, interp, "all", mode))
    return keys


def run_trial(cfg: SweepConfig, spec: SignalSpec, echo: int | None) -> dict:
    """Period estimates of one trial keyed like :func:`_outcome_keys`; failures map to None."""
    est_cfg = _trial_estimator(cfg)
    keys = _outcome_keys(cfg)
    out: dict = {k: None for k in keys}
    try:
        profile = EchoProfile.preset(echo) if echo is not None else None
        buf = synthesize(spec, profile, pulse=cfg.signal == "pulse")
        min_rate = cfg.min_rate_hz or spec.symbol_rate_hz / 2
        acf = estimate_acf(buf, required_max_lag(est_cfg, spec.sample_rate_hz, min_rate))
        f_o = estimate_freq_offset(acf)
    except BaudscopeError:
        return out
    for variant in cfg.variants:
        for interp in cfg.interpolators:
            run_cfg = replace(
                est_cfg,
                interpolator=interp,
                compensate_offset=variant == "compensated",
                combine_weights="single",
                crossing=1,
            )
            try:
                est, crossings = estimate_from_acf(acf, run_cfg, freq_offset_hz=f_o)
            except BaudscopeError:
                continue
            for m in cfg.zc_indices:
                out[(variant, interp, str(m), "single")] = float(est.per_zc_period_samples[m - 1])
            for mode in cfg.weights_modes:
                try:
                    w = weights_for(replace(run_cfg, combine_weights=mode), crossings)
                    period = combine_estimates(est.per_zc_period_samples, w)
                except (BaudscopeError, ValueError):
                    continue
                out[(variant, interp, "all", mode)] = period
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def _aggregate(true_period: float, values: list[float | None]) -> dict[str, str]:
    good = [v for v in values if v is not None and math.isfinite(v)]
    failed = len(values) - len(good)
    if not good:
        return {"failed": str(failed), "nmse": ERR, "nrmse": ERR, "mean_ppm": ERR, "max_ppm": ERR}
    ppm = metric_ppm(true_period, good)
    nmse = metric_nmse(true_period, good)
    return {
        "failed": str(failed),
        "nmse": _fmt(nmse),
        "nrmse": _fmt(math.sqrt(nmse)),
        "mean_ppm": _fmt(np.mean(ppm)),
        "max_ppm": _fmt(np.max(np.abs(ppm))),
    }


def _format_grid(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def run_sweep(cfg: SweepConfig, max_workers: int | None = None) -> list[dict[str, str]]:
    """Run every grid point and trial of ``cfg``; return the CSV rows.

    Trials run on a thread pool capped by ``BAUDSCOPE_THREADS``.  Rows
    are aggregated in trial order, so the output does not depend on
    scheduling.  When ``cfg.out_path`` is set the CSV is also written.
    """
    workers = max(1, min(max_workers or max_threads(), cfg.trials))
    rates: Iterable = cfg.rates or (None,)
    keys = _outcome_keys(cfg)
    rows: list[dict[str, str]] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for grid_value in cfg.grid:
            for rate in rates:
                spec, echo = _point_spec(cfg, grid_value, rate)
                specs = [replace(spec, seed=spec.seed + k) for k in range(cfg.trials)]
                outcomes = list(pool.map(lambda s: run_trial(cfg, s, echo), specs))
                true_period = realized_period_samples(spec)
                for key in keys:
                    variant, interp, zc, mode = key
                    row = {
                        "experiment": cfg.experiment,
                        "grid_value": _format_grid(grid_value),
                        "symbol_rate_hz": _fmt(spec.symbol_rate_hz),
                        "variant": variant,
                        "interpolator": interp,
                        "zc_index": zc,
                        "weights_mode": mode,
                        "trials": str(cfg.trials),
                    }
                    row.update(_aggregate(true_period, [o[key] for o in outcomes]))
                    rows.append(row)
    if cfg.out_path:
        with open(cfg.out_path, "w", newline="") as fh:
            fh.write(rows_to_csv(rows))
    return rows


def rows_to_csv(rows: list[dict[str, str]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def describe_config(cfg: SweepConfig) -> dict[str, Any]:
    flat = asdict(cfg)
    flat.update(flat.pop("base"))
    flat.update(flat.pop("estimator"))
    return flat
