"""Test-signal generation: SRRC-shaped QAM at arbitrary baud rates.

The transmit pulse is shaped at ``L`` samples per symbol and decimated by
``M`` so that ``L / M`` equals the sampling-to-symbol-rate ratio; the
ratio comes from :func:`resampling_plan`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.signal import upfirdn

from .core import (
    QAM_ORDERS,
    BadOrder,
    EchoProfile,
    IqBuffer,
    ResamplingOverflow,
    SignalSpec,
    check_rolloff,
    validate_spec,
)

LCM_RATE_CAP_HZ = 1e10
# largest relative change of the requested baud rate tolerated when the
# exact rational ratio would exceed the intermediate-rate cap
RATE_APPROX_TOL = 1e-4

FRACTIONAL_DELAY_TAPS = 64
FRACTIONAL_DELAY_BETA = 8.0


@dataclass(frozen=True)
class FirFilter:
    taps: np.ndarray
    taps_per_symbol: int

    def __len__(self) -> int:
        return self.taps.shape[0]


def srrc_pulse(rolloff: float, t_symbols) -> np.ndarray:
    """Square-root raised cosine with unit energy per symbol period.

    ``t_symbols`` is time in symbol periods.  The removable singularities at
    ``t = 0`` and ``|t| = 1 / (4 * rolloff)`` use their analytic limits.
    """
    a = check_rolloff(rolloff)
    t = np.atleast_1d(np.asarray(t_symbols, dtype=np.float64))
    out = np.empty_like(t)

    at_zero = np.abs(t) < 1e-12
    if a > 0:
        at_sing = np.abs(np.abs(t) - 1.0 / (4.0 * a)) < 1e-9
    else:
        at_sing = np.zeros_like(at_zero)
    regular = ~(at_zero | at_sing)

    tr = t[regular]
    num = np.sin(np.pi * tr * (1 - a)) + 4 * a * tr * np.cos(np.pi * tr * (1 + a))
    out[regular] = num / (np.pi * tr * (1 - (4 * a * tr) ** 2))
    out[at_zero] = 1 - a + 4 * a / np.pi
    if a > 0:
        q = np.pi / (4 * a)
        out[at_sing] = a / np.sqrt(2) * ((1 + 2 / np.pi) * np.sin(q) + (1 - 2 / np.pi) * np.cos(q))
    return out


def design_srrc(rolloff: float, span_symbols: int, samples_per_symbol: int) -> FirFilter:
    """Linear-phase SRRC FIR with ``2 * span * sps + 1`` unit-energy taps."""
    check_rolloff(rolloff)
    if span_symbols < 1:
        raise ValueError("span_symbols must be >= 1")
    if samples_per_symbol < 2:
        raise ValueError("samples_per_symbol must be >= 2")
    half = span_symbols * samples_per_symbol
    taps = srrc_pulse(rolloff, np.arange(-half, half + 1) / samples_per_symbol)
    taps /= np.sqrt(np.sum(taps**2))
    return FirFilter(taps=taps, taps_per_symbol=samples_per_symbol)


def rc_pulse_analytic(rolloff: float, period_samples: float, t_samples):
    """Raised-cosine pulse with peak 1 and zeros at nonzero multiples of the period.

    Accepts scalars or arrays for ``t_samples``; returns the same shape.
    """
    a = check_rolloff(rolloff)
    if not period_samples > 0:
        raise ValueError("period_samples must be positive")
    scalar = np.ndim(t_samples) == 0
    x = np.atleast_1d(np.asarray(t_samples, dtype=np.float64)) / period_samples

    denom = 1.0 - (2.0 * a * x) ** 2
    sing = np.abs(denom) < 1e-10
    safe = np.where(sing, 1.0, denom)
    out = np.sinc(x) * np.cos(np.pi * a * x) / safe
    if a > 0 and np.any(sing):
        out[sing] = np.pi / 4 * np.sinc(1.0 / (2.0 * a))
    # exact zeros where sin(pi x) vanishes
    out[(x != 0) & (x == np.round(x))] = 0.0
    return float(out[0]) if scalar else out


def _rc_derivative_formula(a: float, T: float, t: np.ndarray) -> np.ndarray:
    s = np.sin(np.pi * t / T)
    c = np.cos(np.pi * t / T)
    sa = np.sin(np.pi * a * t / T)
    ca = np.cos(np.pi * a * t / T)
    d = 4 * a**2 * t**2 / T**2 - 1
    return (
        a * s * sa / (t * d)
        - c * ca / (t * d)
        + T * s * ca / (np.pi * t**2 * d)
        + 8 * a**2 * s * ca / (np.pi * T * d**2)
    )


def rc_derivative_analytic(rolloff: float, period_samples: float, t_samples):
    """Time derivative of :func:`rc_pulse_analytic` (per sample).

    Near ``t = 0`` and ``|t| = T / (2 * rolloff)`` the closed form is 0/0;
    there the value is a symmetric finite difference with step ``1e-6 * T``.
    """
    a = check_rolloff(rolloff)
    T = float(period_samples)
    if not T > 0:
        raise ValueError("period_samples must be positive")
    scalar = np.ndim(t_samples) == 0
    t = np.atleast_1d(np.asarray(t_samples, dtype=np.float64))

    d = 4 * a**2 * t**2 / T**2 - 1
    near = (np.abs(t) < 1e-3 * T) | (np.abs(d) < 1e-6)
    out = np.empty_like(t)
    out[~near] = _rc_derivative_formula(a, T, t[~near])
    if np.any(near):
        h = 1e-6 * T
        tn = t[near]
        out[near] = (rc_pulse_analytic(a, T, tn + h) - rc_pulse_analytic(a, T, tn - h)) / (2 * h)
    out[t == 0] = 0.0
    return float(out[0]) if scalar else out


def rc_slope_at_crossing(rolloff: float, m, period_samples: float = 1.0):
    """Reduced slope of the raised cosine at its ``m``-th zero, ``t = m T``.

    Falls back to :func:`rc_derivative_analytic` where ``2 * rolloff * m = 1``.
    """
    a = check_rolloff(rolloff)
    scalar = np.ndim(m) == 0
    m = np.atleast_1d(np.asarray(m, dtype=np.float64))
    denom = m * (4 * a**2 * m**2 - 1)
    sing = np.abs(4 * a**2 * m**2 - 1) < 1e-9
    safe = np.where(sing, 1.0, denom)
    out = (-1.0) ** (m + 1) * np.cos(np.pi * a * m) / safe / period_samples
    if np.any(sing):
        out[sing] = rc_derivative_analytic(a, period_samples, m[sing] * period_samples)
    return float(out[0]) if scalar else out


def gen_qam_symbols(order: int, n: int, seed: int) -> np.ndarray:
    """I.i.d. square-QAM symbols with unit mean energy."""
    if order not in QAM_ORDERS:
        raise BadOrder(f"unsupported QAM order {order}; expected one of {QAM_ORDERS}")
    side = math.isqrt(order)
    rng = np.random.default_rng(seed)
    levels = 2 * rng.integers(0, side, size=(2, int(n))) - (side - 1)
    scale = np.sqrt(2 * (order - 1) / 3)
    return (levels[0] + 1j * levels[1]) / scale


@dataclass(frozen=True)
class ResamplingPlan:
    up: int
    down: int
    realized_symbol_rate_hz: float

    @property
    def samples_per_symbol(self) -> float:
        return self.up / self.down


def resampling_plan(
    symbol_rate_hz: float, sample_rate_hz: float, cap_hz: float = LCM_RATE_CAP_HZ
) -> ResamplingPlan:
    """Pick ``L / M = fs / baud`` with the shaping rate ``L * baud`` under ``cap_hz``.

    Both rates are rounded to 1 Hz first.  When the exact ratio needs a
    larger intermediate rate, the closest fraction that fits is used,
    provided it moves the baud rate by at most ``RATE_APPROX_TOL``.
    """
    baud = round(symbol_rate_hz)
    fs = round(sample_rate_hz)
    if baud <= 0 or fs <= 0:
        raise ValueError("rates must round to positive integers")
    ratio = Fraction(fs, baud)
    if ratio.numerator * baud > cap_hz:
        approx = ratio.limit_denominator(max(1, int(cap_hz // fs)))
        if abs(float(approx / ratio) - 1) > RATE_APPROX_TOL:
            raise ResamplingOverflow(
                f"{fs}/{baud} needs an intermediate rate of "
                f"{ratio.numerator * baud:.3g} Hz (cap {cap_hz:.3g} Hz) and has no "
                f"close enough approximation"
            )
        ratio = approx
    return ResamplingPlan(
        up=ratio.numerator,
        down=ratio.denominator,
        realized_symbol_rate_hz=sample_rate_hz * ratio.denominator / ratio.numerator,
    )


def _edge_trim(spec: SignalSpec, plan: ResamplingPlan) -> int:
    return math.ceil(spec.span_symbols * plan.up / plan.down)


def n_symbols_for(n_samples: int, spec: SignalSpec) -> int:
    """Symbols needed so that :func:`synth_baseband` yields ``n_samples``."""
    plan = resampling_plan(spec.symbol_rate_hz, spec.sample_rate_hz)
    total = n_samples + 2 * _edge_trim(spec, plan) + 1
    return math.ceil(total * plan.down / plan.up) + 1


def synth_baseband(spec: SignalSpec) -> IqBuffer:
    """Noiseless SRRC-shaped QAM sampled at ``spec.sample_rate_hz``.

    The output has unit mean power regardless of the baud rate, and
    ``span_symbols`` worth of samples are trimmed from both ends.
    """
    validate_spec(spec)
    plan = resampling_plan(spec.symbol_rate_hz, spec.sample_rate_hz)
    L, M = plan.up, plan.down

    symbols = gen_qam_symbols(spec.qam_order, spec.n_symbols, spec.seed)
    h = design_srrc(spec.rolloff, spec.span_symbols, L).taps * np.sqrt(L)
    y = upfirdn(h, symbols, up=L, down=M)

    first = math.ceil(spec.span_symbols * L / M)  # first sample at t >= 0
    n_out = (spec.n_symbols * L) // M
    trim = _edge_trim(spec, plan)
    if n_out <= 2 * trim:
        raise ValueError("n_symbols too small to leave samples after edge trimming")
    return IqBuffer(y[first + trim : first + n_out - trim], spec.sample_rate_hz)


def single_pulse(spec: SignalSpec) -> IqBuffer:
    """One isolated SRRC symbol sampled on the same grid as :func:`synth_baseband`.

    The pulse is evaluated in closed form at the decimated sample instants,
    which is what the polyphase path computes, and zero-padded on both sides
    by its own length.
    """
    validate_spec(spec)
    plan = resampling_plan(spec.symbol_rate_hz, spec.sample_rate_hz)
    half = (spec.span_symbols * plan.up) // plan.down
    n = np.arange(-half, half + 1)
    pulse = srrc_pulse(spec.rolloff, n * plan.down / plan.up)
    pulse /= np.sqrt(np.sum(pulse**2))
    pad = np.zeros(pulse.shape[0])
    return IqBuffer(np.concatenate([pad, pulse, pad]), spec.sample_rate_hz)


def apply_freq_offset(buf: IqBuffer, freq_offset_hz: float) -> IqBuffer:
    """Rotate sample ``n`` by ``exp(-2j pi f_o n / fs)``."""
    if freq_offset_hz == 0:
        return buf
    n = np.arange(len(buf))
    rot = np.exp(-2j * np.pi * freq_offset_hz * n / buf.sample_rate_hz)
    return buf.with_samples(buf.samples * rot)


def _kaiser_at(x: np.ndarray, half_width: float, beta: float) -> np.ndarray:
    r = np.clip(1 - (x / half_width) ** 2, 0, None)
    return np.i0(beta * np.sqrt(r)) / np.i0(beta)


def delay_samples(x: np.ndarray, delay: float) -> np.ndarray:
    """Delay ``x`` by a possibly fractional number of samples, same length out."""
    if delay < 0:
        raise ValueError("delay must be non-negative")
    n = x.shape[0]
    whole = int(math.floor(delay))
    frac = delay - whole
    out = np.zeros(n, dtype=np.complex128)
    if frac == 0:
        if whole < n:
            out[whole:] = x[: n - whole]
        return out

    ntaps = FRACTIONAL_DELAY_TAPS
    centre = ntaps // 2 - 1
    offsets = np.arange(ntaps) - centre - frac
    h = np.sinc(offsets) * _kaiser_at(offsets, ntaps / 2, FRACTIONAL_DELAY_BETA)
    full = np.convolve(x, h)
    # full[k] ~ x(k - centre - frac); want out[j] = x(j - whole - frac)
    idx = np.arange(n) + centre - whole
    ok = (idx >= 0) & (idx < full.shape[0])
    out[ok] = full[idx[ok]]
    return out


def apply_echo(buf: IqBuffer, profile: EchoProfile) -> IqBuffer:
    """Sum of delayed, scaled copies of ``buf`` as listed in ``profile``."""
    y = np.zeros(len(buf), dtype=np.complex128)
    for amplitude, delay_s in profile.taps:
        y += amplitude * delay_samples(buf.samples, delay_s * buf.sample_rate_hz)
    return buf.with_samples(y)


def add_awgn(buf: IqBuffer, esno_db: float, samples_per_symbol: float, seed: int) -> IqBuffer:
    """Add circular complex white Gaussian noise at a symbol-level Es/N0.

    Per-sample noise variance is ``P * sps * 10**(-esno_db / 10)`` with ``P``
    the measured mean power of ``buf``; the per-sample SNR is therefore
    ``esno_db - 10 log10(sps)``.
    """
    if math.isinf(esno_db) and esno_db > 0:
        return buf
    power = float(np.mean(np.abs(buf.samples) ** 2))
    var = power * samples_per_symbol * 10.0 ** (-esno_db / 10.0)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((2, len(buf)))
    return buf.with_samples(buf.samples + np.sqrt(var / 2) * (noise[0] + 1j * noise[1]))


def derive_seed(seed: int, *keys: int) -> int:
    """Independent 64-bit seed for sub-stream ``keys`` of ``seed``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=keys)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


NOISE_STREAM = 1


def synthesize(spec: SignalSpec, echo: EchoProfile | None = None, pulse: bool = False) -> IqBuffer:
    """Received signal for ``spec``: shaping, echo, frequency offset, then AWGN."""
    buf = single_pulse(spec) if pulse else synth_baseband(spec)
    if echo is not None:
        buf = apply_echo(buf, echo)
    buf = apply_freq_offset(buf, spec.freq_offset_hz)
    if not pulse:
        buf = add_awgn(
            buf, spec.esno_db, spec.samples_per_symbol, derive_seed(spec.seed, NOISE_STREAM)
        )
    return buf


def realized_period_samples(spec: SignalSpec) -> float:
    """Symbol period, in samples, of what :func:`synth_baseband` actually produces."""
    plan = resampling_plan(spec.symbol_rate_hz, spec.sample_rate_hz)
    return plan.up / plan.down
