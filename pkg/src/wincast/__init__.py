"""Windowed log-domain forecasting of cumulative case counts.

Polynomial and extreme-learning-machine predictors, rolling-origin
hyperparameter tuning and backtests over JHU CSSE time series.
"""
from .backtest import error_pct, kde, run_backtest, summarize
from .ingest import (
    CountrySeries, RawTable, aggregate_country, load_country_series, load_table,
    parse_jhu_csv, trim_to_first_case,
)
from .linalg import solve_ridge, vandermonde
from .models import (
    ELM, POLY, HyperParams, ModelSpec, fit_elm, fit_poly, forecast, forecast_mc,
    init_elm_weights, predict_elm, predict_poly,
)
from .series import LogSeries, SupervisedSet, build_supervised, log_transform, window_at
from .tuning import SearchGrid, TuneResult, tune, validation_score

__version__ = "0.1.0"
