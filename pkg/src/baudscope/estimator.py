"""End-to-end estimator: ACF, offset compensation, crossings, combining."""
from __future__ import annotations

from dataclasses import fields

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_iq, check_iq_batch, check_sample_rate
from .acf import AcfEstimate, estimate_acf, max_lag_for
from .combine import combine_estimates, weights_for
from .core import BufferTooShort, EstimatorConfig, IqBuffer, RateEstimate
from .foc import compensate_acf, estimate_freq_offset
from .zcd import ZeroCrossing, locate_crossings, period_from_crossing

DEFAULT_MIN_RATE_HZ = 1e6


def required_max_lag(cfg: EstimatorConfig, sample_rate_hz: float, min_rate_hz: float) -> int:
    """ACF length that covers every crossing plus the points after it."""
    return max_lag_for(min_rate_hz, sample_rate_hz, cfg.max_zero_crossing) + cfg.points_after


def estimate_from_acf(
    acf: AcfEstimate, cfg: EstimatorConfig, freq_offset_hz: float | None = None
) -> tuple[RateEstimate, list[ZeroCrossing]]:
    """Run offset compensation, crossing location and combining on ``acf``.

    ``freq_offset_hz`` defaults to the lag-1 phase estimate.  The offset is
    always reported; it is removed only when ``cfg.compensate_offset``.
    """
    if freq_offset_hz is None:
        freq_offset_hz = estimate_freq_offset(acf)
    work = compensate_acf(acf, freq_offset_hz) if cfg.compensate_offset else acf
    crossings = locate_crossings(work, cfg)
    periods = np.array([period_from_crossing(zc) for zc in crossings])
    weights = weights_for(cfg, crossings)
    combined = combine_estimates(periods, weights)
    est = RateEstimate(
        per_zc_period_samples=periods,
        weights=weights,
        combined_period_samples=combined,
        symbol_rate_hz=acf.sample_rate_hz / combined,
        freq_offset_hz=float(freq_offset_hz),
        sample_rate_hz=acf.sample_rate_hz,
        interpolator=cfg.interpolator,
        weights_mode=cfg.combine_weights,
        crossing_locations=[zc.location_samples for zc in crossings],
    )
    return est, crossings


def estimate_symbol_rate(
    buf: IqBuffer,
    cfg: EstimatorConfig | None = None,
    min_rate_hz: float = DEFAULT_MIN_RATE_HZ,
    n_jobs: int = 1,
) -> RateEstimate:
    """Blind symbol-rate estimate of the signal in ``buf``.

    Parameters
    ----------
    buf : IqBuffer
        Complex baseband samples.
    cfg : EstimatorConfig, optional
        Estimator settings; the defaults use the spline and crossing 1.
    min_rate_hz : float
        Slowest symbol rate the caller expects.  It only sizes the ACF and
        never constrains the estimate.
    n_jobs : int
        Threads used for the ACF lags.

    Returns
    -------
    RateEstimate
    """
    cfg = cfg or EstimatorConfig()
    max_lag = required_max_lag(cfg, buf.sample_rate_hz, min_rate_hz)
    if len(buf) <= max_lag + 1:
        raise BufferTooShort(
            f"{len(buf)} samples cannot cover {max_lag} lags; "
            f"raise min_rate_hz or supply a longer buffer"
        )
    acf = estimate_acf(buf, max_lag, n_jobs=n_jobs)
    est, _ = estimate_from_acf(acf, cfg)
    return est


_CONFIG_FIELDS = tuple(f.name for f in fields(EstimatorConfig))


class SymbolRateEstimator(BaseEstimator):
    """Scikit-learn style wrapper around :func:`estimate_symbol_rate`.

    Every buffer is estimated on its own, so nothing is learned across
    samples.  ``fit`` runs the pipeline on one buffer and keeps the
    intermediate results; ``predict`` and ``transform`` accept a batch.

    Parameters
    ----------
    sample_rate_hz : float
        Sampling rate applied to raw arrays; ignored for IqBuffer input.
    min_rate_hz : float
        Slowest expected symbol rate, used only to size the ACF.
    interpolator, max_zero_crossing, points_before, points_after,
    combine_weights, rolloff_hint, crossing, compensate_offset
        Forwarded to :class:`EstimatorConfig`.
    n_jobs : int
        Threads for the ACF lags.

    Attributes
    ----------
    acf_ : AcfEstimate
    freq_offset_hz_ : float
    crossings_ : list of ZeroCrossing
    estimate_ : RateEstimate
    symbol_rate_hz_ : float
    """

    def __init__(
        self,
        sample_rate_hz: float = 56e6,
        min_rate_hz: float = DEFAULT_MIN_RATE_HZ,
        interpolator: str = "spline",
        max_zero_crossing: int = 5,
        points_before: int = 4,
        points_after: int = 1,
        combine_weights: str = "single",
        rolloff_hint: float | None = None,
        crossing: int = 1,
        compensate_offset: bool = True,
        n_jobs: int = 1,
    ):
        self.sample_rate_hz = sample_rate_hz
        self.min_rate_hz = min_rate_hz
        self.interpolator = interpolator
        self.max_zero_crossing = max_zero_crossing
        self.points_before = points_before
        self.points_after = points_after
        self.combine_weights = combine_weights
        self.rolloff_hint = rolloff_hint
        self.crossing = crossing
        self.compensate_offset = compensate_offset
        self.n_jobs = n_jobs

    @property
    def config(self) -> EstimatorConfig:
        return EstimatorConfig(**{name: getattr(self, name) for name in _CONFIG_FIELDS})

    def _check_params(self) -> EstimatorConfig:
        check_sample_rate(self.sample_rate_hz)
        if not self.min_rate_hz > 0:
            raise ValueError("min_rate_hz must be positive")
        return self.config

    def _run(self, buf: IqBuffer, cfg: EstimatorConfig):
        max_lag = required_max_lag(cfg, buf.sample_rate_hz, self.min_rate_hz)
        if len(buf) <= max_lag + 1:
            raise BufferTooShort(f"{len(buf)} samples cannot cover {max_lag} lags")
        acf = estimate_acf(buf, max_lag, n_jobs=self.n_jobs)
        est, crossings = estimate_from_acf(acf, cfg)
        return acf, est, crossings

    def fit(self, X, y=None):
        """Estimate the symbol rate of a single buffer and keep the details."""
        cfg = self._check_params()
        buf = check_iq(X, self.sample_rate_hz)
        acf, est, crossings = self._run(buf, cfg)
        self.acf_ = acf
        self.freq_offset_hz_ = est.freq_offset_hz
        self.crossings_ = crossings
        self.estimate_ = est
        self.symbol_rate_hz_ = est.symbol_rate_hz
        return self

    def predict(self, X) -> np.ndarray:
        """Symbol rate in Hz for every buffer in ``X``."""
        check_is_fitted(self, "estimate_")
        cfg = self._check_params()
        return np.array(
            [self._run(b, cfg)[1].symbol_rate_hz for b in check_iq_batch(X, self.sample_rate_hz)]
        )

    def transform(self, X) -> np.ndarray:
        """Per-crossing periods in samples, shape ``(n_buffers, max_zero_crossing)``."""
        check_is_fitted(self, "estimate_")
        cfg = self._check_params()
        return np.vstack(
            [
                self._run(b, cfg)[1].per_zc_period_samples
                for b in check_iq_batch(X, self.sample_rate_hz)
            ]
        )

