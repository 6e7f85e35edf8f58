"""Zero-crossing weights and weighted fusion of per-crossing periods."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import DegenerateSlope, EmptyInput, EstimatorConfig, check_rolloff
from .synth import rc_pulse_analytic, rc_slope_at_crossing
from .zcd import ZeroCrossing, find_sign_changes


def _normalized(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    return w / np.sum(w)


def weights_slope_analytic(rolloff: float, p: int) -> np.ndarray:
    """Weights proportional to the squared raised-cosine slope at each zero."""
    a = check_rolloff(rolloff, allow_zero=False)
    if p < 1:
        raise ValueError("p must be >= 1")
    m = np.arange(1, p + 1)
    return _normalized(rc_slope_at_crossing(a, m) ** 2)


def weights_slope_zc(rolloff: float, p: int) -> np.ndarray:
    """Squared slope scaled by ``m**2``, favouring the farther crossings.

    Crossing ``m`` divides its location error by ``m``, which is what the
    extra factor accounts for.
    """
    a = check_rolloff(rolloff, allow_zero=False)
    if p < 1:
        raise ValueError("p must be >= 1")
    m = np.arange(1, p + 1)
    return _normalized((m * rc_slope_at_crossing(a, m)) ** 2)


def weights_slope_online(crossings: Sequence[ZeroCrossing]) -> np.ndarray:
    """Squared chord slopes measured on the ACF itself, normalized."""
    if len(crossings) == 0:
        raise EmptyInput("no crossings to weight")
    slopes = np.array([zc.slope for zc in crossings], dtype=np.float64)
    if not np.all(np.isfinite(slopes)) or np.any(np.abs(slopes) < 1e-12):
        raise DegenerateSlope("every crossing needs a finite, nonzero chord slope")
    return _normalized(slopes**2)


def rc_chord_crossings(rolloff: float, period_samples: float, p: int) -> list[ZeroCrossing]:
    """First ``p`` crossings of a sampled analytic raised cosine, with chord slopes.

    Locations are the integer upper bracket lags; only the slopes matter
    for :func:`weights_slope_online`.
    """
    lags = np.arange(int(np.ceil((p + 1) * period_samples)) + 2)
    r = rc_pulse_analytic(rolloff, period_samples, lags)
    return [
        ZeroCrossing(m, float(hi), (lo, hi), float(r[hi] - r[lo]))
        for m, (lo, hi) in enumerate(find_sign_changes(r, p), start=1)
    ]


def weights_one_hot(p: int, m: int) -> np.ndarray:
    if not 1 <= m <= p:
        raise ValueError("m must lie in 1..p")
    w = np.zeros(p)
    w[m - 1] = 1.0
    return w


def weights_uniform_far(p: int) -> np.ndarray:
    """All weight on crossing ``p``; the multipath-friendly choice."""
    return weights_one_hot(p, p)


def weights_for(cfg: EstimatorConfig, crossings: Sequence[ZeroCrossing]) -> np.ndarray:
    p = len(crossings)
    mode = cfg.combine_weights
    if mode == "single":
        return weights_one_hot(p, cfg.crossing)
    if mode == "slope_analytic":
        return weights_slope_analytic(cfg.rolloff_hint, p)
    if mode == "slope_zc":
        return weights_slope_zc(cfg.rolloff_hint, p)
    if mode == "slope_online":
        return weights_slope_online(crossings)
    if mode == "uniform_far":
        return weights_uniform_far(p)
    raise ValueError(f"unknown weights mode {mode!r}")


def combine_estimates(periods: Sequence[float], weights: Sequence[float]) -> float:
    """Weighted mean ``sum(z * w) / sum(w)``."""
    z = np.asarray(periods, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if z.shape[0] == 0:
        raise EmptyInput("no per-crossing periods to combine")
    if z.shape != w.shape:
        raise ValueError(f"got {z.shape[0]} periods but {w.shape[0]} weights")
    if np.any(w < 0) or not np.sum(w) > 0:
        raise ValueError("weights must be non-negative and not all zero")
    return float(np.dot(z, w) / np.sum(w))
