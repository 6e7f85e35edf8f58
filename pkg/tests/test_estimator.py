import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from baudscope.core import BufferTooShort, EchoProfile, EstimatorConfig, IqBuffer, SignalSpec
from baudscope.estimator import SymbolRateEstimator, estimate_from_acf, estimate_symbol_rate
from baudscope.synth import n_symbols_for, realized_period_samples, synthesize


def data_spec(rate=5e6, n_samples=300_000, **kw):
    base = SignalSpec(symbol_rate_hz=rate, **kw)
    return SignalSpec(symbol_rate_hz=rate, n_symbols=n_symbols_for(n_samples, base), **kw)


@pytest.fixture(scope="module")
def clean_5m():
    return synthesize(data_spec())


class TestEstimateSymbolRate:
    def test_noiseless_data(self, clean_5m):
        est = estimate_symbol_rate(clean_5m, min_rate_hz=2e6)
        assert abs(est.symbol_rate_hz / 5e6 - 1) < 0.01
        assert est.combined_period_samples == pytest.approx(56e6 / est.symbol_rate_hz)
        assert est.weights.tolist() == [1, 0, 0, 0, 0]

    def test_frequency_offset_is_removed(self):
        kw = dict(rate=1e6, n_samples=2_000_000, seed=4)
        zero = estimate_symbol_rate(synthesize(data_spec(**kw)), min_rate_hz=0.5e6)
        off = estimate_symbol_rate(
            synthesize(data_spec(freq_offset_hz=150e3, **kw)), min_rate_hz=0.5e6
        )
        # random data leaves about 1% of phase noise on the lag-1 term at this length
        assert off.freq_offset_hz == pytest.approx(150e3, rel=0.04)
        assert off.symbol_rate_hz == pytest.approx(zero.symbol_rate_hz, rel=1e-3)

    def test_combined_matches_weighted_sum(self, clean_5m):
        cfg = EstimatorConfig(combine_weights="slope_zc", rolloff_hint=0.15)
        est = estimate_symbol_rate(clean_5m, cfg, min_rate_hz=2e6)
        assert est.combined_period_samples == pytest.approx(
            float(np.dot(est.weights, est.per_zc_period_samples))
        )
        assert est.symbol_rate_hz == est.sample_rate_hz / est.combined_period_samples

    def test_deterministic(self, clean_5m):
        a = estimate_symbol_rate(clean_5m, min_rate_hz=2e6)
        b = estimate_symbol_rate(clean_5m, min_rate_hz=2e6)
        assert a.as_dict() == b.as_dict()

    def test_too_short(self):
        with pytest.raises(BufferTooShort):
            estimate_symbol_rate(IqBuffer(np.ones(100), 56e6), min_rate_hz=1e6)

    def test_rate_continuum(self):
        # neighbouring rates give distinct, ordered estimates, never a snapped grid value
        rates = [5.0e6, 5.01e6, 5.02e6, 5.03e6, 5.04e6]
        pulse_est = [
            estimate_symbol_rate(
                synthesize(SignalSpec(symbol_rate_hz=r, span_symbols=12), pulse=True),
                min_rate_hz=4e6,
            ).symbol_rate_hz
            for r in rates
        ]
        assert np.all(np.diff(pulse_est) > 0)
        assert pulse_est == pytest.approx(rates, rel=2e-4)

    def test_uncompensated_reports_offset(self):
        buf = synthesize(data_spec(rate=2e6, freq_offset_hz=100e3))
        est = estimate_symbol_rate(buf, EstimatorConfig(compensate_offset=False), min_rate_hz=1e6)
        assert est.freq_offset_hz == pytest.approx(100e3, rel=0.2)


class TestSklearnApi:
    def test_params_roundtrip(self):
        est = SymbolRateEstimator(interpolator="linear", max_zero_crossing=3)
        params = est.get_params()
        assert params["interpolator"] == "linear"
        assert params["max_zero_crossing"] == 3
        other = clone(est)
        assert other.get_params() == params
        est.set_params(crossing=2)
        assert est.config.crossing == 2

    def test_fit_sets_attributes(self, clean_5m):
        est = SymbolRateEstimator(min_rate_hz=2e6).fit(clean_5m)
        assert est.symbol_rate_hz_ == est.estimate_.symbol_rate_hz
        assert len(est.crossings_) == 5
        assert est.acf_.max_lag >= 5 * 28
        assert est.freq_offset_hz_ == est.estimate_.freq_offset_hz

    def test_raw_array_uses_sample_rate(self, clean_5m):
        a = SymbolRateEstimator(min_rate_hz=2e6).fit(clean_5m.samples)
        b = SymbolRateEstimator(min_rate_hz=2e6).fit(clean_5m)
        assert a.symbol_rate_hz_ == b.symbol_rate_hz_

    def test_predict_and_transform_batch(self, clean_5m):
        est = SymbolRateEstimator(min_rate_hz=2e6).fit(clean_5m)
        X = np.vstack([clean_5m.samples[:150_000], clean_5m.samples[150_000:300_000]])
        rates = est.predict(X)
        periods = est.transform(X)
        assert rates.shape == (2,)
        assert periods.shape == (2, 5)
        assert rates == pytest.approx(56e6 / periods[:, 0])

    def test_predict_needs_fit(self, clean_5m):
        with pytest.raises(NotFittedError):
            SymbolRateEstimator().predict(clean_5m)

    @pytest.mark.parametrize(
        "X", [np.zeros((2, 2, 2)), np.array([]), np.array([1.0, np.nan] * 500)]
    )
    def test_rejects_bad_input(self, X):
        with pytest.raises(ValueError):
            SymbolRateEstimator().fit(X)

    def test_invalid_params(self, clean_5m):
        with pytest.raises(ValueError):
            SymbolRateEstimator(interpolator="quintic").fit(clean_5m)
        with pytest.raises(ValueError):
            SymbolRateEstimator(min_rate_hz=0).fit(clean_5m)


def test_estimate_from_acf_with_given_offset():
    from baudscope.acf import estimate_acf

    buf = synthesize(SignalSpec(symbol_rate_hz=7e6, span_symbols=12), EchoProfile.direct(), pulse=True)
    acf = estimate_acf(buf, 50)
    est, crossings = estimate_from_acf(acf, EstimatorConfig(), freq_offset_hz=0.0)
    assert est.freq_offset_hz == 0.0
    assert est.per_zc_period_samples[0] == pytest.approx(realized_period_samples(SignalSpec()), abs=1e-3)
