"""Acceptance criteria, one test each; every test reports a PASS/FAIL line.

Run on its own with

    pytest tests/test_acceptance.py -s

The lines are also collected in the terminal summary.  Criteria 6, 7 and 9
use the snapshot from ``WINCAST_ACCEPTANCE_DATA`` / ``WINCAST_DATA_DIR`` if
set, else the bundled one; the snapshot's last date is printed.
"""
import csv
import time

import numpy as np
import pytest

from aggregate_oracle import country_totals
from conftest import acceptance_data_path, logistic_counts, make_series, report
from oracles import ridge_descent
from wincast import cli
from wincast.backtest import kde, run_backtest
from wincast.config import RunConfig
from wincast.ingest import REFERENCE_COUNTRIES, aggregate_country, load_aliases, load_table, resolve_country
from wincast.linalg import ridge_objective, solve_ridge
from wincast.metrics import error_pct
from wincast.models import ELM, POLY, HyperParams, fit_elm, fit_poly, hidden_features, init_elm_weights, predict_poly
from wincast.series import LogSeries, build_supervised, log_transform
from wincast.tuning import SearchGrid, tune


def verdict(n, ok, detail):
    report(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
    assert ok, detail


def snapshot_label():
    path = acceptance_data_path()
    return f"{path.name}, data through {load_table(path).header_dates[-1].isoformat()}"


# 1 ------------------------------------------------------------------------

def test_c1_metric_exactness():
    got = error_pct(23216, 23039)
    verdict(1, abs(got - 0.76240) <= 1e-5 and abs(got - 17700 / 23216) <= 1e-9,
            f"error_pct(23216, 23039) = {got:.9f} (expected 0.76240..., exact 17700/23216)")


# 2 ------------------------------------------------------------------------

def test_c2_polynomial_oracle():
    rng = np.random.default_rng(2020)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        c = rng.uniform(-1, 1, 4)
        w = int(rng.integers(4, 22))
        tau = int(rng.choice([1, 3, 7, 14]))
        N = w + int(rng.integers(0, 30))
        n = np.arange(N + tau, dtype=float)
        v = c[0] + c[1] * n + c[2] * n ** 2 + c[3] * n ** 3
        pred = predict_poly(fit_poly(LogSeries("cubic", v[:N]), N - 1, HyperParams(w)), tau)
        worst = max(worst, abs(pred - v[-1]) / max(1.0, abs(v[-1])))
    dt = time.perf_counter() - t0
    verdict(2, worst < 1e-6 and dt < 1.0,
            f"50 exact-cubic log series, worst relative forecast error {worst:.2e} (< 1e-6), {dt:.2f}s")


# 3 ------------------------------------------------------------------------

def test_c3_ridge_oracle():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst_el, worst_ne = 0.0, 0.0
    for _ in range(100):
        h, N, Q = int(rng.integers(1, 11)), int(rng.integers(1, 31)), int(rng.integers(1, 3))
        lam = float(10 ** rng.uniform(-2, 1))
        Z, T = rng.standard_normal((h, N)), rng.standard_normal((Q, N))
        O = solve_ridge(Z, T, lam)
        worst_el = max(worst_el, float(np.max(np.abs(O - ridge_descent(Z, T, lam)))))
        rhs = T @ Z.T
        resid = np.linalg.norm(O @ (Z @ Z.T + lam * np.eye(h)) - rhs)
        worst_ne = max(worst_ne, resid / max(np.linalg.norm(rhs), 1e-300))
    dt = time.perf_counter() - t0
    verdict(3, worst_el <= 1e-6 and worst_ne <= 1e-9 and dt < 10,
            f"100 instances: max |O - oracle| {worst_el:.2e} (<= 1e-6), "
            f"normal-equation residual {worst_ne:.2e} (<= 1e-9), {dt:.2f}s")


# 4 ------------------------------------------------------------------------

def test_c4_optimality():
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    decreases, min_gain = 0, np.inf
    for k in range(20):
        v = np.log(logistic_counts(int(rng.integers(30, 80)), seed=k))
        w, tau = int(rng.integers(2, 10)), int(rng.choice([1, 3, 7]))
        train = build_supervised(LogSeries("s", v), w, tau)
        lam = float(10 ** rng.uniform(-3, 1))
        m = fit_elm(train, init_elm_weights(k, int(rng.integers(1, 40)), w), lam)
        Z = hidden_features(m.W, train.inputs)
        T = train.targets[None, :]
        f0 = ridge_objective(Z, T, m.O, lam)
        for _ in range(100):
            D = rng.standard_normal(m.O.shape)
            gain = ridge_objective(Z, T, m.O + 1e-3 * D / np.linalg.norm(D), lam) - f0
            min_gain = min(min_gain, gain)
            decreases += gain < 0
    dt = time.perf_counter() - t0
    verdict(4, decreases == 0 and dt < 5,
            f"20 ELM problems x 100 directions: {decreases} decreases, smallest change {min_gain:.3e}, {dt:.2f}s")


# 5 ------------------------------------------------------------------------

@pytest.mark.slow
def test_c5_no_leakage():
    rng = np.random.default_rng(5)
    grid = SearchGrid()
    t0 = time.perf_counter()
    failures = []
    for k in range(20):
        N = int(rng.integers(60, 90))
        counts = logistic_counts(N, cap=float(10 ** rng.uniform(3, 6)), rate=float(rng.uniform(0.1, 0.3)),
                                 mid=int(rng.integers(25, 60)), seed=k)
        d = N - 1 - int(rng.integers(1, 4))
        mutated = counts[:d + 1] + [int(x) for x in rng.integers(1, 10 ** 7, N - d - 1)]
        spec = ELM if k % 2 else POLY
        tau = int(rng.choice([1, 3, 7]))
        a, b = make_series(counts), make_series(mutated)
        same_tune = (tune(log_transform(a), d, spec, tau, grid, "daily", k)
                     == tune(log_transform(b), d, spec, tau, grid, "daily", k))
        ra = run_backtest(a, spec, tau, grid, "daily", days=N - d, trials=10, base_seed=k)[0]
        rb = run_backtest(b, spec, tau, grid, "daily", days=N - d, trials=10, base_seed=k)[0]
        if not (same_tune and ra.day_index == d and ra == rb and ra.to_row() == rb.to_row()):
            failures.append(k)
    dt = time.perf_counter() - t0
    verdict(5, not failures and dt < 30,
            f"20 series mutated after day d: tune and day-d record identical in {20 - len(failures)}/20, {dt:.1f}s")


# 6-8: one full backtest, run twice ----------------------------------------

@pytest.fixture(scope="module")
def full_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance")
    cfg = RunConfig(data_path=str(acceptance_data_path()), taus=[1, 3, 7], methods=["elm-tv"],
                    trials=100, days=31, base_seed=0)
    runs = []
    for name in ("a", "b"):
        cfg.output_dir = str(root / name)
        t0 = time.perf_counter()
        rc = cli.cmd_backtest(cfg.validate())
        runs.append((root / name, rc, time.perf_counter() - t0))
    return runs


@pytest.mark.slow
def test_c6_determinism(full_runs):
    (a, rc_a, dt_a), (b, rc_b, dt_b) = full_runs
    names = sorted(p.name for p in a.iterdir())
    same = names == sorted(p.name for p in b.iterdir()) and all(
        (a / n).read_bytes() == (b / n).read_bytes() for n in names)
    verdict(6, same and rc_a == rc_b == 0 and max(dt_a, dt_b) < 300,
            f"12 countries x tau {{1,3,7}}, elm-tv, M=100 on {snapshot_label()}: "
            f"{len(names)} files byte-identical={same}, runs {dt_a:.0f}s / {dt_b:.0f}s (< 300s)")


def _last10(run_dir):
    lines = [ln for ln in (run_dir / "summary.csv").read_text().splitlines() if not ln.startswith("#")]
    return {(r["country"], int(r["tau"])): float(r["last10_mean_pct"]) for r in csv.DictReader(lines)}


@pytest.mark.slow
def test_c7_table_band(full_runs):
    table = _last10(full_runs[0][0])
    one = {c: table[(c, 1)] for c in REFERENCE_COUNTRIES}
    seven = {c: table[(c, 7)] for c in REFERENCE_COUNTRIES}
    within = [c for c in REFERENCE_COUNTRIES if one[c] <= 2.0]
    ordered = [c for c in REFERENCE_COUNTRIES if seven[c] >= one[c]]
    china = one["China"]
    ok = len(within) >= 10 and china <= 0.5 and len(ordered) >= 10
    detail = ", ".join(f"{c} {one[c]:.2f}/{seven[c]:.2f}" for c in REFERENCE_COUNTRIES)
    verdict(7, ok,
            f"elm-tv last-10 1-day error <= 2% in {len(within)}/12 (need 10), China {china:.3f}% (<= 0.5), "
            f"7-day >= 1-day in {len(ordered)}/12 (need 10) on {snapshot_label()} [1d/7d: {detail}]")


# 8 ------------------------------------------------------------------------

@pytest.mark.slow
def test_c8_kde_normalisation(full_runs):
    rng = np.random.default_rng(8)
    integrals = []
    for p in sorted(full_runs[0][0].glob("kde_*.csv")):
        data = np.loadtxt(p, delimiter=",", comments="#", skiprows=2)
        integrals.append(float(np.trapezoid(data[:, 1], data[:, 0])))
    emitted = len(integrals)
    for _ in range(200):
        x = rng.exponential(rng.uniform(0.1, 20), int(rng.integers(2, 400)))
        integrals.append(kde(x).integral())
    worst = max(abs(i - 1) for i in integrals)
    verdict(8, worst <= 0.02,
            f"{emitted} emitted KDE files + 200 random samples: worst |integral - 1| = {worst:.2e} (<= 0.02)")


# 9 ------------------------------------------------------------------------

def test_c9_ingestion_fixture():
    path = acceptance_data_path()
    t0 = time.perf_counter()
    table = load_table(path)
    aliases = load_aliases()
    names = {c: resolve_country(table, c, aliases) for c in REFERENCE_COUNTRIES}
    oracle = country_totals(path, sorted(set(names.values())))
    mismatched = [c for c, jhu in names.items() if aggregate_country(table, jhu) != oracle[jhu]]
    dt = time.perf_counter() - t0
    verdict(9, not mismatched and dt < 1,
            f"12 country totals on {snapshot_label()} match the independent script "
            f"({12 - len(mismatched)}/12), {dt:.2f}s")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-s", "-q"]))
