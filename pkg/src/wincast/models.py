"""Local cubic polynomial and ELM predictors.

Both models work on log counts.  :func:`forecast` is the end-to-end entry
point: log-transform, fit on everything up to the last day, predict ``tau``
days ahead and exponentiate once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyTrainingSet, InsufficientHistory
from .ingest import CountrySeries
from .linalg import solve_ridge, solve_ridge_batched, vandermonde
from .series import LogSeries, SupervisedSet, build_supervised, log_transform, window_at

POLY_DEGREE = 3
# exp() overflows just above 709; wild extrapolations are clipped here.
LOG_CLIP = 700.0


@dataclass(frozen=True, order=False)
class HyperParams:
    w: int
    h: Optional[int] = None
    lam: Optional[float] = None
    degree: int = POLY_DEGREE

    def sort_key(self) -> tuple:
        # smaller w, then smaller h, then larger lambda
        return (self.w, self.h or 0, -(self.lam or 0.0))

    def to_dict(self) -> dict:
        return {"w": self.w, "h": self.h, "lambda": self.lam}

    def label(self) -> str:
        parts = [f"w={self.w}"]
        if self.h is not None:
            parts.append(f"h={self.h}")
        if self.lam is not None:
            parts.append(f"lambda={self.lam:g}")
        return ",".join(parts)


@dataclass(frozen=True)
class ModelSpec:
    kind: str  # "poly" or "elm"
    bias: bool = False
    max_training_days: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("poly", "elm"):
            raise ValueError(f"unknown model kind {self.kind!r}")

    def validate(self, hp: HyperParams) -> None:
        if self.kind == "poly":
            if hp.w < hp.degree + 1:
                raise ValueError(f"polynomial needs w >= {hp.degree + 1}, got {hp.w}")
        else:
            if hp.w < 1 or hp.h is None or hp.h < 1 or hp.lam is None or hp.lam < 0:
                raise ValueError(f"invalid ELM hyperparameters {hp}")

    def min_history(self, hp: HyperParams, tau: int) -> int:
        """Fewest days of data needed to produce one forecast."""
        if self.kind == "poly":
            return hp.w
        return hp.w + tau


POLY = ModelSpec("poly")
ELM = ModelSpec("elm")


# --------------------------------------------------------------------------
# Polynomial
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PolyModel:
    coeffs: tuple  # p0..p3 in the local index basis 0..w-1
    window_end: int
    w: int

    def to_dict(self) -> dict:
        return {"model": "poly", "coeffs": list(self.coeffs), "window_end": self.window_end, "w": self.w}


def fit_poly(ls: LogSeries, end_index: int, hp: HyperParams) -> PolyModel:
    if hp.w < hp.degree + 1:
        raise ValueError(f"need w >= {hp.degree + 1} points for a degree-{hp.degree} fit")
    y = window_at(ls, end_index, hp.w)
    V = vandermonde(np.arange(hp.w), hp.degree)
    O = solve_ridge(V.T, y[None, :], 0.0)
    return PolyModel(tuple(float(c) for c in O[0]), end_index, hp.w)


def predict_poly(m: PolyModel, tau: int) -> float:
    n = m.w - 1 + tau
    return float(sum(c * n ** k for k, c in enumerate(m.coeffs)))


# --------------------------------------------------------------------------
# ELM
# --------------------------------------------------------------------------

_STREAMS: dict = {}


def _normal_stream(seed: int, n: int) -> np.ndarray:
    """First ``n`` standard normals of the stream for ``seed``.

    PCG64(seed) raw 64-bit outputs are mapped to uniforms in [0, 1) from
    their top 53 bits; each consecutive pair (u1, u2) gives two normals by
    Box-Muller, r*cos(2 pi u2) and r*sin(2 pi u2) with r = sqrt(-2 ln(1 - u1)).
    A longer request regenerates the stream, whose prefix is unchanged.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    cached = _STREAMS.get(seed)
    if cached is None or len(cached) < n:
        pairs = (max(n, 2 * len(cached) if cached is not None else 0, 256) + 1) // 2
        raw = np.random.PCG64(seed).random_raw(2 * pairs)
        u = ((raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)).tolist()
        out = []
        for i in range(pairs):
            r = math.sqrt(-2.0 * math.log(1.0 - u[2 * i]))
            theta = 2.0 * math.pi * u[2 * i + 1]
            out.append(r * math.cos(theta))
            out.append(r * math.sin(theta))
        cached = np.array(out)
        cached.flags.writeable = False
        _STREAMS[seed] = cached
    return cached[:n]


def init_elm_weights(seed: int, h: int, w: int) -> np.ndarray:
    """h x w matrix of i.i.d. N(0, 1) entries, filled row by row.

    Because the fill is row-major, the first ``k`` rows for a given
    ``(seed, w)`` do not depend on ``h``.
    """
    if h < 1 or w < 1:
        raise ValueError("h and w must be >= 1")
    return _normal_stream(int(seed), h * w).reshape(h, w)


def relu(a):
    return np.maximum(a, 0.0)


def _augment(X: np.ndarray, bias: bool) -> np.ndarray:
    if not bias:
        return X
    return np.concatenate([X, np.ones(X.shape[:-1] + (1,))], axis=-1)


@dataclass(frozen=True, eq=False)
class ElmModel:
    W: np.ndarray
    O: np.ndarray  # 1 x h
    seed: Optional[int]
    hp: Optional[HyperParams]
    bias: bool = False

    @property
    def w(self) -> int:
        return self.W.shape[1] - int(self.bias)

    def to_dict(self) -> dict:
        return {
            "model": "elm",
            "seed": self.seed,
            "h": self.W.shape[0],
            "w": self.w,
            "bias": self.bias,
            "hyperparams": self.hp.to_dict() if self.hp else None,
            "O": self.O[0].tolist(),
        }


def hidden_features(W: np.ndarray, X: np.ndarray, bias: bool = False) -> np.ndarray:
    """ReLU(W x) for each row of X, returned as h x N."""
    return relu(W @ _augment(np.atleast_2d(X), bias).T)


def fit_elm(train: SupervisedSet, W, lam: float, seed: Optional[int] = None,
            hp: Optional[HyperParams] = None, bias: bool = False) -> ElmModel:
    if train.count < 1:
        raise EmptyTrainingSet(f"no training pairs for w={train.w}, tau={train.tau}")
    W = np.asarray(W, dtype=np.float64)
    if W.shape[1] != train.w + int(bias):
        raise DimensionMismatch(f"W has {W.shape[1]} columns, windows have {train.w}")
    Z = hidden_features(W, train.inputs, bias)
    O = solve_ridge(Z, train.targets[None, :], lam)
    return ElmModel(W, O, seed, hp, bias)


def predict_elm(m: ElmModel, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or len(x) != m.w:
        raise DimensionMismatch(f"input of shape {x.shape}, model expects ({m.w},)")
    return float((m.O @ hidden_features(m.W, x, m.bias))[0, 0])


def elm_grid_predict(train: SupervisedSet, queries: np.ndarray, seeds: Sequence[int],
                     h_values: Sequence[int], lam_values: Sequence[float],
                     bias: bool = False) -> np.ndarray:
    """Log-domain ELM predictions for many seeds, widths and ridge weights at once.

    Each seed's weights are ``init_elm_weights(seed, max(h_values), w)``; a
    width ``h`` uses its first ``h`` rows, which is exactly
    ``init_elm_weights(seed, h, w)``.

    Returns an array of shape (len(seeds), len(h_values), len(lam_values), len(queries)).
    """
    if train.count < 1:
        raise EmptyTrainingSet(f"no training pairs for w={train.w}, tau={train.tau}")
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if queries.shape[1] != train.w:
        raise DimensionMismatch(f"queries have {queries.shape[1]} columns, windows have {train.w}")
    h_max = max(h_values)
    d = train.w + int(bias)
    Ws = np.stack([init_elm_weights(s, h_max, d) for s in seeds])  # S x H x d
    Xt = _augment(train.inputs, bias)
    Xq = _augment(queries, bias)
    Z = relu(Ws @ Xt.T)  # S x H x N
    Fq = relu(Ws @ Xq.T)  # S x H x Qn
    G = Z @ np.swapaxes(Z, 1, 2)  # S x H x H
    B = Z @ train.targets  # S x H
    out = np.empty((len(seeds), len(h_values), len(lam_values), len(queries)))
    for i, h in enumerate(h_values):
        Gh, Bh, Fh = G[:, :h, :h], B[:, :h], Fq[:, :h, :]
        for j, lam in enumerate(lam_values):
            O = solve_ridge_batched(Gh, Bh, lam)  # S x h
            out[:, i, j, :] = np.einsum("sh,shq->sq", O, Fh)
    return out


# --------------------------------------------------------------------------
# End-to-end forecast
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Forecast:
    point: float
    log_point: float
    target_date: Optional[date] = None
    trials: tuple = field(default=(), compare=False)


def to_count(log_value) -> np.ndarray:
    return np.exp(np.minimum(log_value, LOG_CLIP))


def _elm_train_set(ls: LogSeries, spec: ModelSpec, hp: HyperParams, tau: int) -> SupervisedSet:
    return build_supervised(ls, hp.w, tau, max_pairs=spec.max_training_days)


def forecast_log(ls: LogSeries, spec: ModelSpec, hp: HyperParams, tau: int, seeds: Sequence[int] = (0,)) -> np.ndarray:
    """Log-domain prediction ``tau`` days past the end of ``ls``, one per seed.

    The polynomial ignores seeds and returns a length-1 array.
    """
    spec.validate(hp)
    if tau < 1:
        raise ValueError("tau must be >= 1")
    need = spec.min_history(hp, tau)
    if ls.N < need:
        raise InsufficientHistory(f"{spec.kind} with {hp.label()}, tau={tau} needs {need} days, have {ls.N}")
    end = ls.N - 1
    if spec.kind == "poly":
        return np.array([predict_poly(fit_poly(ls, end, hp), tau)])
    train = _elm_train_set(ls, spec, hp, tau)
    x = window_at(ls, end, hp.w)
    return elm_grid_predict(train, x[None, :], list(seeds), [hp.h], [hp.lam], spec.bias)[:, 0, 0, 0]


def forecast(series: CountrySeries, spec: ModelSpec, hp: HyperParams, tau: int, seed: int = 0) -> Forecast:
    """Point forecast ``tau`` days after the last day of ``series``."""
    ls = log_transform(series)
    spec.validate(hp)
    need = spec.min_history(hp, tau)
    if ls.N < need:
        raise InsufficientHistory(f"{spec.kind} with {hp.label()}, tau={tau} needs {need} days, have {ls.N}")
    end = ls.N - 1
    if spec.kind == "poly":
        log_point = predict_poly(fit_poly(ls, end, hp), tau)
    else:
        train = _elm_train_set(ls, spec, hp, tau)
        W = init_elm_weights(seed, hp.h, hp.w + int(spec.bias))
        model = fit_elm(train, W, hp.lam, seed=seed, hp=hp, bias=spec.bias)
        log_point = predict_elm(model, window_at(ls, end, hp.w))
    return Forecast(float(to_count(log_point)), log_point, series.date_at(end + tau))


def forecast_mc(series: CountrySeries, spec: ModelSpec, hp: HyperParams, tau: int, seeds: Sequence[int]) -> Forecast:
    """Monte-Carlo ELM forecast: the point is the mean of per-seed counts."""
    ls = log_transform(series)
    logs = forecast_log(ls, spec, hp, tau, seeds)
    counts = to_count(logs)
    point = float(np.mean(counts))
    return Forecast(point, math.log(point), series.date_at(ls.N - 1 + tau), tuple(float(c) for c in counts))


def fit_model(series: CountrySeries, spec: ModelSpec, hp: HyperParams, tau: int, seed: int = 0):
    """Fitted model on the full series, for JSON audit dumps."""
    ls = log_transform(series)
    spec.validate(hp)
    if spec.kind == "poly":
        return fit_poly(ls, ls.N - 1, hp)
    W = init_elm_weights(seed, hp.h, hp.w + int(spec.bias))
    return fit_elm(_elm_train_set(ls, spec, hp, tau), W, hp.lam, seed=seed, hp=hp, bias=spec.bias)
