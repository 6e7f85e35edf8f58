"""Time-averaged autocorrelation over integer lags."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import BufferTooShort, IqBuffer

LAG_GUARD = 4


@dataclass(frozen=True)
class AcfEstimate:
    """Complex autocorrelation ``values[tau]`` for ``tau = 0 .. max_lag``."""

    values: np.ndarray
    lag_spacing_s: float
    n_samples_used: int

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def max_lag(self) -> int:
        return self.values.shape[0] - 1

    @property
    def sample_rate_hz(self) -> float:
        return 1.0 / self.lag_spacing_s

    @property
    def real(self) -> np.ndarray:
        return self.values.real


def _lag_sums(y: np.ndarray, lags: range) -> list[complex]:
    n = y.shape[0]
    # vdot conjugates its first argument: conj(sum conj(y[n]) y[n+tau])
    return [np.conj(np.vdot(y[: n - tau], y[tau:])) / (n - tau) for tau in lags]


def estimate_acf(buf: IqBuffer, max_lag: int, n_jobs: int = 1) -> AcfEstimate:
    """Unbiased time-averaged autocorrelation of ``buf``.

    ``values[tau] = 1/(N - tau) * sum_n y[n] * conj(y[n + tau])``.  Each lag is
    an independent sum, so ``n_jobs > 1`` splits the lags across threads
    without changing the result.
    """
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    y = np.ascontiguousarray(buf.samples, dtype=np.complex128)
    if y.shape[0] <= max_lag + 1:
        raise BufferTooShort(f"buffer of {y.shape[0]} samples is too short for max_lag={max_lag}")

    if n_jobs <= 1:
        values = _lag_sums(y, range(max_lag + 1))
    else:
        bounds = np.linspace(0, max_lag + 1, n_jobs + 1).astype(int)
        chunks = [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(lambda r: _lag_sums(y, r), chunks))
        values = [v for part in parts for v in part]

    values = np.asarray(values, dtype=np.complex128)
    values[0] = values[0].real
    return AcfEstimate(values, 1.0 / buf.sample_rate_hz, int(y.shape[0]))


def max_lag_for(min_symbol_rate_hz: float, sample_rate_hz: float, p: int) -> int:
    """Lags needed to reach the ``p``-th crossing of the slowest expected signal."""
    if min_symbol_rate_hz <= 0:
        raise ValueError("min_symbol_rate_hz must be positive")
    return math.ceil(p * sample_rate_hz / min_symbol_rate_hz) + LAG_GUARD


def write_acf_csv(acf: AcfEstimate, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lag", "re", "im"])
        for lag, v in enumerate(acf.values):
            writer.writerow([lag, repr(float(v.real)), repr(float(v.imag))])
