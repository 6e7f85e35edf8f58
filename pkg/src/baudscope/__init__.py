"""Blind symbol-rate estimation from autocorrelation zero crossings."""
from .acf import AcfEstimate, estimate_acf, max_lag_for
from .combine import (
    combine_estimates,
    weights_slope_analytic,
    weights_slope_online,
    weights_slope_zc,
    weights_uniform_far,
)
from .core import (
    BaudscopeError,
    EchoProfile,
    EstimatorConfig,
    IqBuffer,
    RateEstimate,
    SignalSpec,
)
from .estimator import SymbolRateEstimator, estimate_symbol_rate
from .foc import compensate_acf, estimate_freq_offset
from .harness import SweepConfig, ingest_iq, preset_config, run_sweep
from .iqfile import read_iq, write_iq
from .synth import synthesize

__version__ = "0.1.0"

__all__ = [
    "AcfEstimate",
    "BaudscopeError",
    "EchoProfile",
    "EstimatorConfig",
    "IqBuffer",
    "RateEstimate",
    "SignalSpec",
    "SweepConfig",
    "SymbolRateEstimator",
    "combine_estimates",
    "compensate_acf",
    "estimate_acf",
    "estimate_freq_offset",
    "estimate_symbol_rate",
    "ingest_iq",
    "max_lag_for",
    "preset_config",
    "read_iq",
    "run_sweep",
    "synthesize",
    "weights_slope_analytic",
    "weights_slope_online",
    "weights_slope_zc",
    "weights_uniform_far",
    "write_iq",
]
