"""Input checks shared by the estimator front ends."""
from __future__ import annotations

import numpy as np

from .core import EmptyInput, IqBuffer


def check_sample_rate(sample_rate_hz) -> float:
    fs = float(sample_rate_hz)
    if not np.isfinite(fs) or fs <= 0:
        raise ValueError(f"sample_rate_hz must be a positive finite number, got {sample_rate_hz}")
    return fs


def check_iq(x, sample_rate_hz: float) -> IqBuffer:
    """Coerce one buffer (IqBuffer or 1-D array-like) to a finite IqBuffer."""
    if isinstance(x, IqBuffer):
        buf = x
    else:
        arr = np.asarray(x)
        if arr.ndim != 1:
            raise ValueError(f"expected a 1-D sample array, got shape {arr.shape}")
        if not (np.issubdtype(arr.dtype, np.number) or arr.dtype == bool):
            raise TypeError(f"samples must be numeric, got dtype {arr.dtype}")
        buf = IqBuffer(arr, check_sample_rate(sample_rate_hz))
    if len(buf) == 0:
        raise EmptyInput("buffer holds no samples")
    if not np.all(np.isfinite(buf.samples)):
        raise ValueError("samples contain NaN or infinity")
    return buf


def check_iq_batch(X, sample_rate_hz: float) -> list[IqBuffer]:
    """Split ``X`` into buffers: one IqBuffer, a 1-D array, a 2-D array of rows or a list."""
    if isinstance(X, IqBuffer):
        return [check_iq(X, sample_rate_hz)]
    if isinstance(X, (list, tuple)):
        if len(X) == 0:
            raise EmptyInput("no buffers given")
        if all(np.ndim(v) == 0 for v in X):
            return [check_iq(np.asarray(X), sample_rate_hz)]
        return [check_iq(v, sample_rate_hz) for v in X]
    arr = np.asarray(X)
    if arr.ndim == 1:
        return [check_iq(arr, sample_rate_hz)]
    if arr.ndim == 2:
        if arr.shape[0] == 0:
            raise EmptyInput("no buffers given")
        return [check_iq(row, sample_rate_hz) for row in arr]
    raise ValueError(f"expected 1-D or 2-D input, got shape {arr.shape}")
