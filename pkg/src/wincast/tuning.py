"""Grid-search cross-validation for window size, hidden width and ridge weight.

Validation is rolling-origin: fold ``k`` (1-based) keeps data through day
``up_to - tau - (k - 1) * val_horizon``, forecasts ``tau`` days ahead and is
scored against the observed count.  Only days ``<= up_to`` are ever read.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientHistory
from .metrics import error_pct
from .models import HyperParams, ModelSpec, elm_grid_predict, forecast_log, to_count
from .series import LogSeries, build_supervised, window_at

DEFAULT_W = (4, 6, 8, 10, 14, 21)
DEFAULT_H = (5, 10, 20, 40, 80)
DEFAULT_LAMBDA = (1e-3, 1e-2, 1e-1, 1.0, 10.0)

MODES = ("fixed", "daily")


@dataclass(frozen=True)
class SearchGrid:
    w_values: tuple = DEFAULT_W
    h_values: tuple = DEFAULT_H
    lambda_values: tuple = DEFAULT_LAMBDA
    val_horizon: Optional[int] = None  # None means "use tau"
    n_folds: int = 5
    mc_draws: int = 10

    def __post_init__(self):
        for name in ("w_values", "h_values", "lambda_values"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise ValueError(f"{name} must not be empty")
            object.__setattr__(self, name, vals)
        if any(w < 1 for w in self.w_values) or any(h < 1 for h in self.h_values):
            raise ValueError("window sizes and widths must be >= 1")
        if any(lam <= 0 for lam in self.lambda_values):
            raise ValueError("ELM ridge weights must be > 0")
        if self.n_folds < 1 or self.mc_draws < 1:
            raise ValueError("n_folds and mc_draws must be >= 1")
        if self.val_horizon is not None and self.val_horizon < 1:
            raise ValueError("val_horizon must be >= 1")

    def horizon(self, tau: int) -> int:
        return tau if self.val_horizon is None else self.val_horizon

    def candidates(self, spec: ModelSpec) -> list:
        if spec.kind == "poly":
            return [HyperParams(w) for w in self.w_values if w >= 4]
        return [HyperParams(w, h, lam) for w in self.w_values for h in self.h_values for lam in self.lambda_values]

    def to_dict(self) -> dict:
        return {
            "w_values": list(self.w_values),
            "h_values": list(self.h_values),
            "lambda_values": list(self.lambda_values),
            "val_horizon": self.val_horizon,
            "n_folds": self.n_folds,
            "mc_draws": self.mc_draws,
        }


@dataclass(frozen=True)
class TuneResult:
    best: HyperParams
    scores: dict = field(compare=True)
    mode: str = "fixed"
    up_to: int = -1

    def to_dict(self) -> dict:
        return {
            "best": self.best.to_dict(),
            "best_score": self.scores[self.best],
            "mode": self.mode,
            "up_to": self.up_to,
            "scores": [dict(hp.to_dict(), score=s) for hp, s in sorted(self.scores.items(), key=lambda kv: kv[0].sort_key())],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def fold_ends(up_to: int, tau: int, grid: SearchGrid) -> list:
    vh = grid.horizon(tau)
    return [up_to - tau - k * vh for k in range(grid.n_folds)]


def _mc_seeds(seed: int, grid: SearchGrid) -> list:
    return [seed + i for i in range(grid.mc_draws)]


def _truth(ls: LogSeries, day: int) -> float:
    return float(np.rint(np.exp(ls.values[day])))


def _fold_errors(ls: LogSeries, e: int, spec: ModelSpec, tau: int, grid: SearchGrid, seed: int,
                 w: int, h_values: Sequence[int], lam_values: Sequence[float]) -> np.ndarray:
    """Errors of one fold (data through day ``e``, target ``e + tau``), shape (H, L)."""
    head = ls.head(e + 1)
    truth = _truth(ls, e + tau)
    if spec.kind == "poly":
        pred = forecast_log(head, spec, HyperParams(w), tau)
        return np.array([[error_pct(truth, to_count(pred[0]))]])
    train = build_supervised(head, w, tau, max_pairs=spec.max_training_days)
    x = window_at(head, e, w)
    preds = elm_grid_predict(train, x[None, :], _mc_seeds(seed, grid), h_values, lam_values, spec.bias)[..., 0]
    return error_pct(truth, to_count(preds)).mean(axis=0)


def _score_table(ls: LogSeries, up_to: int, spec: ModelSpec, tau: int, grid: SearchGrid,
                 seed: int, w: int, h_values: Sequence[int], lam_values: Sequence[float],
                 cache: Optional[dict] = None) -> Optional[np.ndarray]:
    """Mean validation error for every (h, lambda) at one window size.

    Returns None when some fold lacks the history this ``w`` needs.  ``cache``
    maps fold settings to fold errors; it is only valid for a single
    underlying series, whose prefixes are all the folds ever read.
    """
    ends = fold_ends(up_to, tau, grid)
    need = w + tau if spec.kind == "elm" else w
    if min(ends) + 1 < need:
        return None
    total = np.zeros((len(h_values), len(lam_values)))
    for e in ends:
        key = (spec, tau, seed, grid.mc_draws, w, tuple(h_values), tuple(lam_values), e)
        errs = cache.get(key) if cache is not None else None
        if errs is None:
            errs = _fold_errors(ls, e, spec, tau, grid, seed, w, h_values, lam_values)
            if cache is not None:
                cache[key] = errs
        total += errs
    return total / len(ends)


def validation_score(ls: LogSeries, up_to: int, spec: ModelSpec, hp: HyperParams, tau: int,
                     grid: SearchGrid, seed: int = 0) -> float:
    """Mean rolling-origin percentage error of ``hp`` using data through ``up_to``."""
    spec.validate(hp)
    if not 0 <= up_to < ls.N:
        raise ValueError(f"up_to={up_to} outside series of length {ls.N}")
    if spec.kind == "poly":
        table = _score_table(ls, up_to, spec, tau, grid, seed, hp.w, [None], [None])
    else:
        table = _score_table(ls, up_to, spec, tau, grid, seed, hp.w, [hp.h], [hp.lam])
    if table is None:
        raise InsufficientHistory(f"not enough data through day {up_to} for {grid.n_folds} folds with {hp.label()}")
    return float(table[0, 0])


def select_best(scores: dict) -> HyperParams:
    return min(scores, key=lambda hp: (scores[hp],) + hp.sort_key())


def tune(ls: LogSeries, up_to: int, spec: ModelSpec, tau: int, grid: SearchGrid,
         mode: str = "fixed", seed: int = 0, cache: Optional[dict] = None) -> TuneResult:
    """Exhaustive grid search; candidates without enough history are skipped.

    ``mode`` is recorded only: in daily mode the caller re-runs this for every
    evaluation day, in fixed mode once at the start of the span.  Pass the
    same ``cache`` dict across calls on one series to reuse shared folds.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not 0 <= up_to < ls.N:
        raise ValueError(f"up_to={up_to} outside series of length {ls.N}")
    scores = {}
    for w in grid.w_values:
        if spec.kind == "poly":
            if w < 4:
                continue
            table = _score_table(ls, up_to, spec, tau, grid, seed, w, [None], [None], cache)
            if table is not None:
                scores[HyperParams(w)] = float(table[0, 0])
            continue
        table = _score_table(ls, up_to, spec, tau, grid, seed, w, grid.h_values, grid.lambda_values, cache)
        if table is None:
            continue
        for i, h in enumerate(grid.h_values):
            for j, lam in enumerate(grid.lambda_values):
                scores[HyperParams(w, h, lam)] = float(table[i, j])
    if not scores:
        raise InsufficientHistory(
            f"{ls.country}: no {spec.kind} candidate has {grid.n_folds} folds of history through day {up_to}"
        )
    return TuneResult(select_best(scores), scores, mode, up_to)
