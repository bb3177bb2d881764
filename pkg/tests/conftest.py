import math
import os
from datetime import date
from pathlib import Path

import numpy as np
import pytest

from wincast.ingest import CountrySeries, bundled_snapshot_path, load_table
from wincast.series import LogSeries

ACCEPTANCE_LINES: list = []


def acceptance_data_path() -> Path:
    """Snapshot used by the acceptance suite.

    ``WINCAST_ACCEPTANCE_DATA`` (a CSV path) wins, then ``WINCAST_DATA_DIR``
    (directory or file), then the bundled snapshot.
    """
    explicit = os.environ.get("WINCAST_ACCEPTANCE_DATA")
    if explicit:
        return Path(explicit)
    env = os.environ.get("WINCAST_DATA_DIR")
    if env:
        p = Path(env)
        return p / "time_series_covid19_confirmed_global.csv" if p.is_dir() else p
    return bundled_snapshot_path()


def report(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def snapshot_table():
    return load_table(bundled_snapshot_path())


def make_series(counts, country="Synth", start=date(2020, 3, 1)) -> CountrySeries:
    return CountrySeries(country, start, tuple(int(c) for c in counts))


def log_series(values, country="Synth") -> LogSeries:
    return LogSeries(country, np.asarray(values, dtype=np.float64))


def exponential_counts(n, base=2.0, scale=1.0):
    return [int(round(scale * base ** i)) for i in range(n)]


def logistic_counts(n, cap=5e4, rate=0.2, mid=40, seed=None):
    rng = np.random.default_rng(seed)
    out, last = [], 1
    for i in range(n):
        v = cap / (1 + math.exp(-rate * (i - mid)))
        if seed is not None:
            v *= 1 + 0.02 * rng.standard_normal()
        last = max(last, int(round(v)), 1)
        out.append(last)
    return out
