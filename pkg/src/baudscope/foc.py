"""Carrier frequency offset from the lag-1 autocorrelation phase."""
from __future__ import annotations

import numpy as np

from .acf import AcfEstimate
from .core import DegenerateAcf


def estimate_freq_offset(acf: AcfEstimate) -> float:
    """Offset in Hz: phase of ``values[1]`` over ``2 pi`` lag durations.

    A signal rotated by ``exp(-2j pi f_o t)`` has ``values[1]`` at phase
    ``2 pi f_o / fs``; the principal value limits the range to ``+-fs/2``.
    """
    if acf.max_lag < 1:
        raise DegenerateAcf("need at least lag 1")
    r0 = abs(acf.values[0])
    r1 = acf.values[1]
    if not abs(r1) > 1e-12 * r0:
        raise DegenerateAcf("lag-1 autocorrelation is too small to carry a phase")
    return float(np.angle(r1) / (2 * np.pi * acf.lag_spacing_s))


def compensate_acf(acf: AcfEstimate, freq_offset_hz: float) -> AcfEstimate:
    """Undo the per-lag rotation ``exp(2j pi f_o tau Ts)`` of an offset signal."""
    if freq_offset_hz == 0:
        return acf
    lags = np.arange(acf.values.shape[0])
    rot = np.exp(-2j * np.pi * freq_offset_hz * lags * acf.lag_spacing_s)
    return AcfEstimate(acf.values * rot, acf.lag_spacing_s, acf.n_samples_used)
