"""Shared value types, validation and the error taxonomy.

Periods and lags are kept in samples everywhere inside the library; Hz
conversions happen only where a value enters or leaves the public API.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

MIN_OVERSAMPLING = 8.0
QAM_ORDERS = (4, 16, 64, 256)

Interpolator = Literal["linear", "spline"]
WeightsMode = Literal["single", "slope_analytic", "slope_online", "slope_zc", "uniform_far"]
WEIGHTS_MODES: tuple[str, ...] = (
    "single",
    "slope_analytic",
    "slope_online",
    "slope_zc",
    "uniform_far",
)


class BaudscopeError(Exception):
    """Base class for every error raised by this package."""


class OversamplingTooLow(BaudscopeError, ValueError):
    pass


class BadRolloff(BaudscopeError, ValueError):
    pass


class BadOrder(BaudscopeError, ValueError):
    pass


class ResamplingOverflow(BaudscopeError, ValueError):
    pass


class BufferTooShort(BaudscopeError, ValueError):
    pass


class DegenerateAcf(BaudscopeError, ValueError):
    pass


class NotEnoughCrossings(BaudscopeError, ValueError):
    pass


class NoRootInBracket(BaudscopeError, ValueError):
    pass


class DegenerateSlope(BaudscopeError, ValueError):
    pass


class EmptyInput(BaudscopeError, ValueError):
    pass


class MalformedFile(BaudscopeError, ValueError):
    pass


class EmptyFile(BaudscopeError, ValueError):
    pass


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class IqBuffer:
    """Uniformly sampled complex baseband samples.

    Attributes
    ----------
    samples : np.ndarray
        Complex samples, stored read-only as ``complex128``.
    sample_rate_hz : float
        Sampling frequency in Hz.
    """

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        samples = np.asarray(self.samples)
        if samples.ndim != 1:
            raise ValueError(f"samples must be one-dimensional, got shape {samples.shape}")
        object.__setattr__(self, "samples", _frozen_array(samples, np.complex128))
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def with_samples(self, samples: np.ndarray) -> "IqBuffer":
        return IqBuffer(samples, self.sample_rate_hz)


@dataclass(frozen=True)
class SignalSpec:
    """Full description of one synthetic transmission.

    ``span_symbols`` is the one-sided SRRC span.  ``esno_db`` may be
    ``inf`` for a noiseless signal.
    """

    symbol_rate_hz: float = 7e6
    qam_order: int = 256
    rolloff: float = 0.15
    span_symbols: int = 8
    n_symbols: int = 100_000
    freq_offset_hz: float = 0.0
    esno_db: float = float("inf")
    seed: int = 0
    sample_rate_hz: float = 56e6

    @property
    def samples_per_symbol(self) -> float:
        return self.sample_rate_hz / self.symbol_rate_hz

    @property
    def period_samples(self) -> float:
        return self.samples_per_symbol


def validate_spec(spec: SignalSpec) -> None:
    """Raise if ``spec`` violates any of the SignalSpec invariants."""
    if not spec.symbol_rate_hz > 0 or not spec.sample_rate_hz > 0:
        raise ValueError("symbol and sample rates must be positive")
    if spec.sample_rate_hz / spec.symbol_rate_hz < MIN_OVERSAMPLING:
        raise OversamplingTooLow(
            f"oversampling {spec.sample_rate_hz / spec.symbol_rate_hz:.4g} is below "
            f"the minimum of {MIN_OVERSAMPLING:g} samples per symbol"
        )
    check_rolloff(spec.rolloff)
    if spec.qam_order not in QAM_ORDERS:
        raise BadOrder(f"unsupported QAM order {spec.qam_order}; expected one of {QAM_ORDERS}")
    if spec.span_symbols < 1:
        raise ValueError("span_symbols must be >= 1")
    if spec.n_symbols < 1:
        raise ValueError("n_symbols must be >= 1")
    if not 0 <= spec.seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")


def check_rolloff(rolloff: float, allow_zero: bool = True) -> float:
    rolloff = float(rolloff)
    lower_ok = rolloff >= 0 if allow_zero else rolloff > 0
    if not (lower_ok and rolloff <= 1):
        interval = "[0, 1]" if allow_zero else "(0, 1]"
        raise BadRolloff(f"rolloff must lie in {interval}, got {rolloff}")
    return rolloff


# Attenuation (dB) and delay (ns) of the standard cable echo paths.
ECHO_TABLE: tuple[tuple[float, float], ...] = (
    (12.0, 0.0),
    (12.6, 40.0),
    (13.7, 50.0),
    (19.4, 100.0),
    (25.0, 150.0),
    (30.7, 200.0),
    (36.3, 250.0),
    (39.7, 280.0),
    (42.0, 300.0),
    (42.0, 350.0),
)
WORST_ECHO_PRESET = 3


@dataclass(frozen=True)
class EchoProfile:
    """Direct path plus delayed, attenuated replicas.

    ``taps`` holds ``(amplitude, delay_s)`` pairs; the first one is the
    unit-gain direct path.
    """

    taps: tuple[tuple[float, float], ...]

    def __post_init__(self):
        taps = tuple((float(a), float(d)) for a, d in self.taps)
        if not taps or taps[0] != (1.0, 0.0):
            raise ValueError("first echo tap must be the unit direct path (1.0, 0.0)")
        delays = [d for _, d in taps]
        if any(d < 0 for d in delays):
            raise ValueError("echo delays must be non-negative")
        # preset 0 places its echo on the direct path, so equal delays are allowed
        if any(b < a for a, b in zip(delays, delays[1:])):
            raise ValueError("echo delays must be non-decreasing")
        object.__setattr__(self, "taps", taps)

    @classmethod
    def direct(cls) -> "EchoProfile":
        return cls(((1.0, 0.0),))

    @classmethod
    def preset(cls, index: int) -> "EchoProfile":
        """Unit direct path plus the single echo ``index`` of the cable table."""
        if not 0 <= index < len(ECHO_TABLE):
            raise ValueError(f"echo preset must be in 0..{len(ECHO_TABLE) - 1}, got {index}")
        att_db, delay_ns = ECHO_TABLE[index]
        return cls(((1.0, 0.0), (10.0 ** (-att_db / 20.0), delay_ns * 1e-9)))


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs of the zero-crossing estimator.

    ``combine_weights="single"`` reports crossing ``crossing`` alone;
    the slope-based modes fuse all ``max_zero_crossing`` crossings.
    """

    interpolator: Interpolator = "spline"
    max_zero_crossing: int = 5
    points_before: int = 4
    points_after: int = 1
    combine_weights: WeightsMode = "single"
    rolloff_hint: float | None = None
    crossing: int = 1
    compensate_offset: bool = True

    def __post_init__(self):
        if self.interpolator not in ("linear", "spline"):
            raise ValueError(f"unknown interpolator {self.interpolator!r}")
        if self.max_zero_crossing < 1:
            raise ValueError("max_zero_crossing must be >= 1")
        if self.points_before < 1 or self.points_after < 1:
            raise ValueError("points_before and points_after must be >= 1")
        if self.combine_weights not in WEIGHTS_MODES:
            raise ValueError(f"unknown combine_weights {self.combine_weights!r}")
        if self.combine_weights in ("slope_analytic", "slope_zc"):
            if self.rolloff_hint is None:
                raise ValueError(f"{self.combine_weights} weights need rolloff_hint")
            check_rolloff(self.rolloff_hint, allow_zero=False)
        if not 1 <= self.crossing <= self.max_zero_crossing:
            raise ValueError("crossing must lie in 1..max_zero_crossing")


@dataclass(frozen=True)
class RateEstimate:
    """Outcome of one symbol-rate estimation.

    ``per_zc_period_samples[m - 1]`` is the period implied by crossing
    ``m``; ``combined_period_samples`` is their weighted mean.
    """

    per_zc_period_samples: np.ndarray
    weights: np.ndarray
    combined_period_samples: float
    symbol_rate_hz: float
    freq_offset_hz: float
    sample_rate_hz: float
    interpolator: str = "spline"
    weights_mode: str = "single"
    crossing_locations: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        for name in ("per_zc_period_samples", "weights", "crossing_locations"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), np.float64))

    def as_dict(self) -> dict:
        return {
            "symbol_rate_hz": self.symbol_rate_hz,
            "combined_period_samples": self.combined_period_samples,
            "freq_offset_hz": self.freq_offset_hz,
            "sample_rate_hz": self.sample_rate_hz,
            "interpolator": self.interpolator,
            "weights_mode": self.weights_mode,
            "per_zc_period_samples": self.per_zc_period_samples.tolist(),
            "weights": self.weights.tolist(),
        }


def as_iq_buffer(x, sample_rate_hz: float | None = None) -> IqBuffer:
    if isinstance(x, IqBuffer):
        return x
    if sample_rate_hz is None:
        raise ValueError("sample_rate_hz is required when passing raw samples")
    return IqBuffer(np.asarray(x), sample_rate_hz)
