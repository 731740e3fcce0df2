"""Next-hour grid frequency forecasting with weighted nearest neighbours."""

__version__ = "0.1.0"

from .errors import GridFreqError
from .evaluation import SplitSpec, beta_grid_search, chronological_split, evaluate, training_size_sweep
from .features import build_feature_library, extended_distance, minmax_scale, predict_wnn_extended
from .patterns import Pattern, PatternLibrary, build_library, find_neighbours, pattern_distance, query_pattern
from .predictor import (
    AdaptiveK,
    ForecastTrajectory,
    fit_adaptive_k,
    predict_constant,
    predict_daily_profile,
    predict_wnn,
    wnn_weights,
)
from .stats import autocorrelation, daily_profile, daily_std, increment_histogram
from .synth import SynthSpec, generate, generate_feature
from .timebase import FrequencySeries, RawFeature

__all__ = [
    "AdaptiveK", "ForecastTrajectory", "FrequencySeries", "GridFreqError", "Pattern", "PatternLibrary",
    "RawFeature", "SplitSpec", "SynthSpec", "autocorrelation", "beta_grid_search", "build_feature_library",
    "build_library", "chronological_split", "daily_profile", "daily_std", "evaluate", "extended_distance",
    "find_neighbours", "fit_adaptive_k", "generate", "generate_feature", "increment_histogram", "minmax_scale",
    "pattern_distance", "predict_constant", "predict_daily_profile", "predict_wnn", "predict_wnn_extended",
    "query_pattern", "training_size_sweep", "wnn_weights",
]
