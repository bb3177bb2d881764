"""Reading JHU CSSE ``time_series_covid19_confirmed_global.csv`` files.

The JHU layout has one row per (province, country) and one column per day of
cumulative confirmed cases.  Countries such as China or the UK are split over
several province rows; :func:`aggregate_country` sums them.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO, Union

from .errors import (
    AllZero,
    MalformedHeader,
    NonMonotoneDates,
    NonNumericCount,
    RaggedRow,
    UnknownCountry,
)

logger = logging.getLogger(__name__)

HEADER_PREFIX = ("Province/State", "Country/Region", "Lat", "Long")

# The twelve countries the default runs cover, in reporting order.
REFERENCE_COUNTRIES = (
    "Sweden", "Denmark", "Finland", "Norway", "France", "Italy",
    "Spain", "UK", "China", "India", "Iran", "USA",
)

BUNDLED_SNAPSHOT = "time_series_covid19_confirmed_global_2020-04-22.csv"
JHU_FILENAME = "time_series_covid19_confirmed_global.csv"
JHU_URL = (
    "https://raw.githubusercontent.com/CSSEGISandData/COVID-19/master/"
    "csse_covid_19_data/csse_covid_19_time_series/" + JHU_FILENAME
)


@dataclass(frozen=True)
class RawRow:
    province: Optional[str]
    country: str
    lat: Optional[float]
    long: Optional[float]
    counts: tuple


@dataclass(frozen=True)
class RawTable:
    header_dates: tuple
    rows: tuple

    @property
    def countries(self) -> list:
        return sorted({r.country for r in self.rows})


@dataclass(frozen=True)
class DataWarning:
    index: int
    kind: str  # "decrease" or "zero_floored"
    message: str


@dataclass(frozen=True)
class CountrySeries:
    """Cumulative counts for one country, starting at the first reported case.

    ``counts`` keeps the raw values.  A zero after the first case (possible
    after JHU corrections) is kept here and flagged in ``warnings``;
    :attr:`safe_counts` floors it to 1 for the log transform.
    """

    country: str
    start_date: date
    counts: tuple
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.counts) < 1:
            raise ValueError("CountrySeries needs at least one day")

    @property
    def N(self) -> int:
        return len(self.counts)

    def __len__(self) -> int:
        return len(self.counts)

    @property
    def safe_counts(self) -> tuple:
        return tuple(max(int(c), 1) for c in self.counts)

    def date_at(self, index: int) -> date:
        return self.start_date + timedelta(days=index)

    @property
    def dates(self) -> list:
        return [self.date_at(i) for i in range(self.N)]

    @property
    def end_date(self) -> date:
        return self.date_at(self.N - 1)

    def head(self, n: int) -> "CountrySeries":
        """The first ``n`` days only (information set ending at day ``n - 1``)."""
        if not 1 <= n <= self.N:
            raise ValueError(f"head({n}) out of range for series of length {self.N}")
        return CountrySeries(
            self.country, self.start_date, self.counts[:n],
            tuple(w for w in self.warnings if w.index < n),
        )


def _parse_date(text: str) -> date:
    try:
        return datetime.strptime(text.strip(), "%m/%d/%y").date()
    except ValueError as exc:
        raise MalformedHeader(f"bad date column {text!r}") from exc


def _parse_coord(text: str) -> Optional[float]:
    text = text.strip()
    if not text:
        return None
    return float(text)


def parse_jhu_csv(source: Union[str, TextIO]) -> RawTable:
    """Parse a JHU-layout CSV from a string or an open text stream."""
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedHeader("empty input") from None
    if header and header[0].startswith("\ufeff"):
        header[0] = header[0][1:]
    if tuple(h.strip() for h in header[:4]) != HEADER_PREFIX:
        raise MalformedHeader(f"expected {','.join(HEADER_PREFIX)}, got {header[:4]}")
    dates = tuple(_parse_date(h) for h in header[4:])
    for a, b in zip(dates, dates[1:]):
        if b - a != timedelta(days=1):
            raise NonMonotoneDates(f"{a} is followed by {b}")

    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(header):
            raise RaggedRow(f"line {lineno}: {len(rec)} fields, header has {len(header)}")
        counts = []
        for cell in rec[4:]:
            try:
                value = int(cell.strip(), 10)
            except ValueError:
                raise NonNumericCount(f"line {lineno}: count {cell!r}") from None
            counts.append(value)
        try:
            lat, lon = _parse_coord(rec[2]), _parse_coord(rec[3])
        except ValueError:
            raise MalformedHeader(f"line {lineno}: bad coordinates {rec[2:4]}") from None
        rows.append(RawRow(rec[0] or None, rec[1], lat, lon, tuple(counts)))
    return RawTable(dates, tuple(rows))


def _fmt_date(d: date) -> str:
    return f"{d.month}/{d.day}/{d.strftime('%y')}"


def _fmt_coord(x: Optional[float]) -> str:
    return "" if x is None else repr(x)


def table_to_csv(table: RawTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(HEADER_PREFIX) + [_fmt_date(d) for d in table.header_dates])
    for r in table.rows:
        writer.writerow(
            [r.province or "", r.country, _fmt_coord(r.lat), _fmt_coord(r.long)]
            + [str(c) for c in r.counts]
        )
    return buf.getvalue()


def load_table(path: Union[str, Path]) -> RawTable:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_jhu_csv(fh)


def bundled_snapshot_path() -> Path:
    return Path(str(resources.files("wincast") / "data" / BUNDLED_SNAPSHOT))


def resolve_data_path(data: Optional[str] = None) -> Path:
    """``data`` if given, else ``$WINCAST_DATA_DIR``, else the bundled snapshot."""
    if data:
        return Path(data)
    env = os.environ.get("WINCAST_DATA_DIR")
    if env:
        p = Path(env)
        return p / JHU_FILENAME if p.is_dir() else p
    return bundled_snapshot_path()


def fetch_jhu(dest: Union[str, Path], url: str = JHU_URL, timeout: float = 60.0) -> Path:
    """Download the live JHU file.  Only used behind the CLI ``--fetch`` flag."""
    import urllib.request

    dest = Path(dest)
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        dest.write_bytes(resp.read())
    return dest


def load_aliases() -> dict:
    text = (resources.files("wincast") / "data" / "aliases.json").read_text("utf-8")
    return json.loads(text)


def resolve_country(table: RawTable, name: str, aliases: Optional[dict] = None) -> str:
    """Map a colloquial name ("USA", "UK") to the JHU ``Country/Region`` value."""
    present = set(table.countries)
    if name in present:
        return name
    aliases = load_aliases() if aliases is None else aliases
    target = aliases.get(name)
    if target is not None and target in present:
        return target
    raise UnknownCountry(name, known=list(aliases) + sorted(present))


def aggregate_country(table: RawTable, country: str) -> list:
    matches = [r for r in table.rows if r.country == country]
    if not matches:
        raise UnknownCountry(country, known=table.countries)
    total = [0] * len(table.header_dates)
    for r in matches:
        for i, c in enumerate(r.counts):
            total[i] += c
    return total


def trim_to_first_case(counts: Sequence[int], dates: Sequence[date], country: str = "") -> CountrySeries:
    """Drop the leading zeros so the series starts on the first reported case."""
    if len(counts) != len(dates):
        raise ValueError("counts and dates differ in length")
    first = next((i for i, c in enumerate(counts) if c > 0), None)
    if first is None:
        raise AllZero(f"no case ever reported for {country or 'series'}")
    kept = tuple(int(c) for c in counts[first:])
    warnings = []
    for i in range(1, len(kept)):
        if kept[i] < kept[i - 1]:
            warnings.append(DataWarning(i, "decrease", f"cumulative count fell {kept[i - 1]} -> {kept[i]}"))
        if kept[i] <= 0:
            warnings.append(DataWarning(i, "zero_floored", f"count {kept[i]} after first case, floored to 1 for logs"))
    for w in warnings:
        logger.warning("%s day %d (%s): %s", country, w.index, dates[first + w.index], w.message)
    return CountrySeries(country, dates[first], kept, tuple(warnings))


def load_country_series(table: RawTable, name: str, aliases: Optional[dict] = None) -> CountrySeries:
    """Resolve ``name``, sum its province rows and trim to the first case.

    The returned series keeps the requested (colloquial) name.
    """
    jhu_name = resolve_country(table, name, aliases)
    counts = aggregate_country(table, jhu_name)
    return trim_to_first_case(counts, table.header_dates, country=name)


def load_many(table: RawTable, names: Iterable[str]) -> dict:
    aliases = load_aliases()
    return {n: load_country_series(table, n, aliases) for n in names}
