"""Rolling backtests, error summaries and kernel-smoothed error densities."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from datetime import date
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyRecords, InsufficientHistory
from .ingest import CountrySeries
from .metrics import error_pct
from .models import HyperParams, ModelSpec, forecast_log, to_count
from .series import log_transform
from .tuning import SearchGrid, tune

logger = logging.getLogger(__name__)

__all__ = [
    "METHODS", "BacktestRecord", "ErrorSummary", "KdeCurve", "error_pct",
    "parse_method", "method_name", "run_backtest", "summarize", "kde",
]

METHODS = {
    "poly": ("poly", "fixed"),
    "poly-tv": ("poly", "daily"),
    "elm": ("elm", "fixed"),
    "elm-tv": ("elm", "daily"),
}

RECORD_COLUMNS = ("country", "date", "tau", "method", "y_true", "y_pred", "error_pct",
                  "w", "h", "lambda", "error_pct_mc")


def parse_method(method: str) -> tuple:
    try:
        return METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}") from None


def method_name(kind: str, mode: str) -> str:
    return kind + ("-tv" if mode == "daily" else "")


@dataclass(frozen=True)
class BacktestRecord:
    """One evaluated day.

    ``y_pred`` is the mean count over Monte-Carlo trials (a single fit for the
    polynomial) and ``error_pct`` is its percentage error.  ``error_pct_mc``
    is the mean of the per-trial errors; for the polynomial the two agree.
    """

    country: str
    day_index: int
    date: date
    tau: int
    method: str
    y_true: int
    y_pred: float
    error_pct: float
    error_pct_mc: float
    hp_used: HyperParams
    trials: int = 1

    def to_row(self) -> list:
        hp = self.hp_used
        return [
            self.country, self.date.isoformat(), self.tau, self.method, self.y_true,
            repr(self.y_pred), repr(self.error_pct),
            hp.w, "" if hp.h is None else hp.h, "" if hp.lam is None else repr(hp.lam),
            repr(self.error_pct_mc),
        ]

    def to_dict(self) -> dict:
        return dict(zip(RECORD_COLUMNS, self.to_row()), day_index=self.day_index, trials=self.trials)


def _predict_day(ls, d: int, tau: int, spec: ModelSpec, hp: HyperParams, seeds) -> np.ndarray:
    head = ls.head(d - tau + 1)
    return to_count(forecast_log(head, spec, hp, tau, seeds))


def run_backtest(series: CountrySeries, spec: ModelSpec, tau: int, grid: SearchGrid, mode: str = "daily",
                 days: int = 31, trials: int = 100, base_seed: int = 0,
                 method: Optional[str] = None) -> list:
    """Evaluate the last ``days`` days of ``series`` at horizon ``tau``.

    Day ``d`` is predicted from data through day ``d - tau`` only.  In daily
    mode hyperparameters are re-tuned on that information set every day; in
    fixed mode they are tuned once, on the first day of the span that has
    enough history, and reused.  ELM forecasts use seeds
    ``base_seed .. base_seed + trials - 1``; tuning uses ``base_seed`` as its
    starting seed.  Days without enough history are skipped with a warning.
    """
    if tau < 1 or days < 1 or trials < 1:
        raise ValueError("tau, days and trials must be >= 1")
    method = method or method_name(spec.kind, mode)
    ls = log_transform(series)
    truth = series.safe_counts
    seeds = [base_seed + i for i in range(trials)] if spec.kind == "elm" else [0]
    fixed_hp = None
    cache = {}
    records = []
    for d in range(max(0, series.N - days), series.N):
        info_end = d - tau
        try:
            if info_end < 0:
                raise InsufficientHistory(f"day {d} has no information set at tau={tau}")
            if mode == "daily":
                hp = tune(ls.head(info_end + 1), info_end, spec, tau, grid, mode, base_seed, cache).best
            else:
                if fixed_hp is None:
                    fixed_hp = tune(ls.head(info_end + 1), info_end, spec, tau, grid, mode, base_seed, cache).best
                hp = fixed_hp
            preds = _predict_day(ls, d, tau, spec, hp, seeds)
        except InsufficientHistory as exc:
            logger.warning("%s %s tau=%d: skipping %s: %s", series.country, method, tau, series.date_at(d), exc)
            continue
        y_true = truth[d]
        y_pred = float(np.mean(preds))
        records.append(BacktestRecord(
            series.country, d, series.date_at(d), tau, method, int(y_true), y_pred,
            error_pct(y_true, y_pred), float(np.mean(error_pct(y_true, preds))), hp, len(seeds),
        ))
    return records


@dataclass(frozen=True)
class ErrorSummary:
    mean_pct: float
    std_pct: float
    last10_mean_pct: float
    n: int
    last10_n: int

    @property
    def last10_complete(self) -> bool:
        return self.last10_n == 10

    def to_dict(self) -> dict:
        return {
            "mean_pct": self.mean_pct, "std_pct": self.std_pct,
            "last10_mean_pct": self.last10_mean_pct, "n": self.n,
            "last10_n": self.last10_n, "last10_complete": self.last10_complete,
        }


def summarize(records: Sequence, field: str = "error_pct_mc") -> ErrorSummary:
    """Mean and population std of the errors, plus the mean over the final 10 days.

    ``records`` may be BacktestRecords or plain numbers (already in day order).
    The default field is the Monte-Carlo-averaged error.
    """
    if len(records) == 0:
        raise EmptyRecords("no records to summarize")
    if isinstance(records[0], BacktestRecord):
        ordered = sorted(records, key=lambda r: r.day_index)
        errs = np.array([getattr(r, field) for r in ordered], dtype=np.float64)
    else:
        errs = np.asarray(records, dtype=np.float64)
    last = errs[-10:]
    if len(last) < 10:
        logger.warning("only %d records; last-10 mean is over what exists", len(last))
    return ErrorSummary(float(errs.mean()), float(errs.std()), float(last.mean()), len(errs), len(last))


# --------------------------------------------------------------------------
# Kernel density
# --------------------------------------------------------------------------

DEFAULT_KDE_POINTS = 256
MAX_KDE_POINTS = 8192
_LOCAL_OFFSETS = np.arange(-6.0, 6.0 + 1e-9, 0.25)


@dataclass(frozen=True, eq=False)
class KdeCurve:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    degenerate: bool = False

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))

    def to_csv(self) -> str:
        lines = ["error_pct,density"]
        lines += [f"{g!r},{p!r}" for g, p in zip(self.grid.tolist(), self.density.tolist())]
        return "\n".join(lines) + "\n"


def silverman_bandwidth(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return 1.06 * float(np.std(x, ddof=1)) * len(x) ** (-0.2)


def degenerate_bandwidth(value: float) -> float:
    """Bandwidth used when every sample is identical: 5% of the value, at least 0.05."""
    return 0.05 * max(1.0, abs(value))


def kde(errors, bandwidth: Optional[float] = None, n_points: int = DEFAULT_KDE_POINTS) -> KdeCurve:
    """Gaussian KDE of non-negative error percentages on ``[0, hi]``.

    Kernels are reflected at 0 because errors cannot be negative, so no mass
    leaks below the grid.  ``hi`` is ``1.1 * max`` or ``max + 4 * bandwidth``,
    whichever is larger, and the grid is refined beyond ``n_points`` when the
    bandwidth is narrower than four grid steps (past ``MAX_KDE_POINTS`` the
    extra points are placed around each sample instead).  If all samples are
    equal, or so close that Silverman's rule gives 0, the curve uses
    :func:`degenerate_bandwidth` and is flagged ``degenerate``.
    """
    x = np.asarray(errors, dtype=np.float64).ravel()
    if len(x) < 2:
        raise ValueError("kde needs at least 2 samples")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("errors must be finite and non-negative")
    degenerate = bool(np.all(x == x[0]))
    if bandwidth is None:
        bandwidth = 0.0 if degenerate else silverman_bandwidth(x)
        if not bandwidth > 0:  # identical samples, or a spread so small its variance underflows
            degenerate = True
            bandwidth = degenerate_bandwidth(float(np.median(x)))
    if not bandwidth > 0 or not math.isfinite(bandwidth):
        raise ValueError("bandwidth must be finite and > 0")
    xmax = float(x.max())
    hi = max(1.1 * xmax, xmax + 4.0 * bandwidth)
    want = math.ceil(4.0 * hi / bandwidth) + 1
    grid = np.linspace(0.0, hi, max(n_points, min(MAX_KDE_POINTS, want)))
    if want > MAX_KDE_POINTS:
        # too narrow for a uniform grid: add points around every sample
        local = (x[:, None] + bandwidth * _LOCAL_OFFSETS[None, :]).ravel()
        grid = np.unique(np.concatenate([grid, local[(local >= 0) & (local <= hi)]]))
    n = len(grid)
    density = np.zeros(n)
    norm = 1.0 / (len(x) * bandwidth * math.sqrt(2.0 * math.pi))
    for xi in x:
        density += np.exp(-0.5 * ((grid - xi) / bandwidth) ** 2)
        density += np.exp(-0.5 * ((grid + xi) / bandwidth) ** 2)
    return KdeCurve(grid, density * norm, float(bandwidth), degenerate)
