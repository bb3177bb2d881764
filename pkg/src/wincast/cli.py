"""Command-line entry point.

    wincast dump-series --country Sweden --out series/
    wincast tune --country Sweden --tau 1 --method elm-tv
    wincast forecast --data time_series_covid19_confirmed_global.csv --country Sweden --tau 1 --tau 3 --tau 7
    wincast backtest --config run.yaml --out results/
    wincast report --out results/
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .backtest import RECORD_COLUMNS, kde, parse_method, run_backtest, summarize
from .config import RunConfig, load_config
from .errors import WincastError
from .ingest import fetch_jhu, load_aliases, load_country_series, load_table, resolve_data_path
from .models import ModelSpec, fit_model, forecast_mc
from .series import log_transform
from .tuning import tune

logger = logging.getLogger("wincast")


def slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_")


def item_stem(country: str, tau: int, method: str) -> str:
    return f"{slug(country)}_tau{tau}_{method}"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _csv_text(header_line: str, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(header_line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _spec(cfg: RunConfig, kind: str) -> ModelSpec:
    return ModelSpec(kind, bias=cfg.bias, max_training_days=cfg.max_training_days)


def _load_series(cfg: RunConfig) -> dict:
    table = load_table(resolve_data_path(cfg.data_path))
    aliases = load_aliases()
    return {c: load_country_series(table, c, aliases) for c in cfg.countries}


# --------------------------------------------------------------------------
# dump-series
# --------------------------------------------------------------------------

def cmd_dump_series(cfg: RunConfig, to_stdout: bool = False) -> int:
    series = _load_series(cfg)
    for country, s in series.items():
        text = _csv_text(cfg.header_line(), ["date", "count"],
                         [[d.isoformat(), c] for d, c in zip(s.dates, s.counts)])
        if to_stdout:
            sys.stdout.write(f"# country={country}\n" + text)
        else:
            _write(Path(cfg.output_dir) / f"series_{slug(country)}.csv", text)
    return 0


# --------------------------------------------------------------------------
# tune
# --------------------------------------------------------------------------

def cmd_tune(cfg: RunConfig, to_stdout: bool = True) -> int:
    series = _load_series(cfg)
    out = []
    for country, s in series.items():
        ls = log_transform(s)
        for tau in cfg.taus:
            for method in cfg.methods:
                kind, mode = parse_method(method)
                res = tune(ls, ls.N - 1, _spec(cfg, kind), tau, cfg.grid, mode, cfg.base_seed)
                doc = dict(res.to_dict(), country=country, tau=tau, method=method,
                           config_hash=cfg.config_hash(), base_seed=cfg.base_seed)
                out.append(doc)
                if not to_stdout:
                    _write(Path(cfg.output_dir) / f"tune_{item_stem(country, tau, method)}.json", _json_text(doc))
    if to_stdout:
        sys.stdout.write(_json_text(out))
    return 0


# --------------------------------------------------------------------------
# forecast
# --------------------------------------------------------------------------

FORECAST_COLUMNS = ("country", "last_date", "target_date", "tau", "method", "y_pred", "w", "h", "lambda", "trials")


def cmd_forecast(cfg: RunConfig) -> int:
    """Tune on the full history and forecast ``tau`` days past the last data day."""
    series = _load_series(cfg)
    rows, models = [], []
    ok = True
    for country, s in series.items():
        ls = log_transform(s)
        for tau in cfg.taus:
            for method in cfg.methods:
                kind, mode = parse_method(method)
                spec = _spec(cfg, kind)
                seeds = [cfg.base_seed + i for i in range(cfg.trials)] if kind == "elm" else [0]
                try:
                    best = tune(ls, ls.N - 1, spec, tau, cfg.grid, mode, cfg.base_seed).best
                    fc = forecast_mc(s, spec, best, tau, seeds)
                except WincastError as exc:
                    logger.error("%s: %s", item_stem(country, tau, method), exc)
                    ok = False
                    continue
                rows.append([country, s.end_date.isoformat(), fc.target_date.isoformat(), tau, method,
                             repr(fc.point), best.w, best.h if best.h is not None else "",
                             repr(best.lam) if best.lam is not None else "", len(seeds)])
                model = fit_model(s, spec, best, tau, seeds[0])
                models.append(dict(model.to_dict(), country=country, tau=tau, method=method, seeds=seeds))
    out = Path(cfg.output_dir)
    _write(out / "forecasts.csv", _csv_text(cfg.header_line(), FORECAST_COLUMNS, rows))
    _write(out / "models.json", _json_text({"config_hash": cfg.config_hash(), "base_seed": cfg.base_seed,
                                            "models": models}))
    return 0 if ok else 1


# --------------------------------------------------------------------------
# backtest
# --------------------------------------------------------------------------

def _backtest_item(args):
    """Records for one (country, tau, method), or the error dict if it failed."""
    s, spec, tau, grid, mode, days, trials, seed, method = args
    try:
        return run_backtest(s, spec, tau, grid, mode, days, trials, seed, method)
    except WincastError as exc:
        return exc.to_dict()


def _records_csv(cfg: RunConfig, records) -> str:
    return _csv_text(cfg.header_line(), RECORD_COLUMNS, [r.to_row() for r in records])


def _kde_csv(cfg: RunConfig, errors) -> str:
    curve = kde(errors)
    return f"{cfg.header_line()} bandwidth={curve.bandwidth!r} degenerate={curve.degenerate}\n" + curve.to_csv()


def cmd_backtest(cfg: RunConfig) -> int:
    series = _load_series(cfg)
    items = []
    for country in cfg.countries:
        for tau in cfg.taus:
            for method in cfg.methods:
                kind, mode = parse_method(method)
                items.append(((country, tau, method),
                              (series[country], _spec(cfg, kind), tau, cfg.grid, mode,
                               cfg.days, cfg.trials, cfg.base_seed, method)))
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as ex:
            results = list(ex.map(_backtest_item, [a for _, a in items]))
    else:
        results = [_backtest_item(a) for _, a in items]

    out = Path(cfg.output_dir)
    header = cfg.header_line()
    summary_rows, pooled = [], defaultdict(list)
    ok = True
    for (country, tau, method), records in sorted(zip([k for k, _ in items], results)):
        stem = item_stem(country, tau, method)
        if isinstance(records, dict) or not records:
            logger.error("%s: no records produced %s", stem, records or "")
            ok = False
            continue
        _write(out / f"records_{stem}.csv", _records_csv(cfg, records))
        _write(out / f"records_{stem}.json", _json_text({
            "config_hash": cfg.config_hash(), "base_seed": cfg.base_seed,
            "records": [r.to_dict() for r in records],
        }))
        summ = summarize(records)
        _write(out / f"summary_{stem}.json", _json_text(dict(
            summ.to_dict(), country=country, tau=tau, method=method,
            config_hash=cfg.config_hash(), base_seed=cfg.base_seed,
            point_error=summarize(records, "error_pct").to_dict(),
        )))
        summary_rows.append([country, tau, method, summ.n, repr(summ.mean_pct), repr(summ.std_pct),
                             repr(summ.last10_mean_pct)])
        errors = [r.error_pct_mc for r in records]
        pooled[(tau, method)].extend(errors)
        if len(errors) >= 2:
            _write(out / f"kde_{stem}.csv", _kde_csv(cfg, errors))
    for (tau, method), errors in sorted(pooled.items()):
        if len(errors) >= 2:
            _write(out / f"kde_pooled_tau{tau}_{method}.csv", _kde_csv(cfg, errors))
    _write(out / "summary.csv", _csv_text(
        header, ["country", "tau", "method", "n", "mean_pct", "std_pct", "last10_mean_pct"], summary_rows))
    return 0 if ok else 1


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------

def read_records_csv(path: Path) -> list:
    lines = [ln for ln in path.read_text("utf-8").splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def last10_table(rows: list, countries=None) -> tuple:
    """Group record rows into {(tau, method): {country: last10 mean}}."""
    groups = defaultdict(list)
    for r in rows:
        groups[(int(r["tau"]), r["method"], r["country"])].append(r)
    table = defaultdict(dict)
    for (tau, method, country), rs in groups.items():
        rs.sort(key=lambda r: r["date"])
        table[(tau, method)][country] = summarize([float(r["error_pct_mc"]) for r in rs]).last10_mean_pct
    if countries is None:
        seen = []
        for r in rows:
            if r["country"] not in seen:
                seen.append(r["country"])
        countries = seen
    return dict(table), list(countries)


def format_table(table: dict, countries: list) -> str:
    lines = ["| tau | method | " + " | ".join(countries) + " |",
             "|---|---|" + "---|" * len(countries)]
    for (tau, method) in sorted(table):
        vals = [f"{table[(tau, method)][c]:.2f}" if c in table[(tau, method)] else "-" for c in countries]
        lines.append(f"| {tau} | {method} | " + " | ".join(vals) + " |")
    return "\n".join(lines) + "\n"


def cmd_report(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    files = sorted(out.glob("records_*.csv"))
    if not files:
        raise WincastError(f"no records_*.csv files in {out}")
    rows = [r for f in files for r in read_records_csv(f)]
    order = [c for c in cfg.countries if any(r["country"] == c for r in rows)] or None
    table, countries = last10_table(rows, order)
    csv_rows = [[tau, method] + [repr(table[(tau, method)].get(c, float("nan"))) for c in countries]
                for (tau, method) in sorted(table)]
    _write(out / "report.csv", _csv_text(cfg.header_line(), ["tau", "method"] + countries, csv_rows))
    text = format_table(table, countries)
    _write(out / "report.md", text)
    sys.stdout.write(text)
    return 0


# --------------------------------------------------------------------------
# argument handling
# --------------------------------------------------------------------------

COMMANDS = {
    "dump-series": cmd_dump_series,
    "tune": cmd_tune,
    "forecast": cmd_forecast,
    "backtest": cmd_backtest,
    "report": cmd_report,
}


def _split(values):
    out = []
    for v in values or []:
        out.extend(x.strip() for x in v.split(",") if x.strip())
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wincast", description=__doc__.splitlines()[0] if __doc__ else None)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="YAML/JSON run configuration; flags override it")
        sp.add_argument("--data", help="JHU confirmed-global CSV (default: $WINCAST_DATA_DIR, then the bundled snapshot)")
        sp.add_argument("--fetch", action="store_true", help="download the live JHU file into --out first")
        sp.add_argument("--country", action="append", help="country name or alias; repeatable or comma-separated")
        sp.add_argument("--tau", action="append", help="forecast horizon in days; repeatable")
        sp.add_argument("--method", action="append", help="poly, poly-tv, elm or elm-tv; repeatable")
        sp.add_argument("--mode", choices=["fixed", "daily"])
        sp.add_argument("--days", type=int)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--jobs", type=int)
        sp.add_argument("--bias", action="store_true", default=None, help="append a constant input to the ELM")
        sp.add_argument("--max-training-days", type=int)
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.data:
        cfg.data_path = args.data
    if args.country:
        cfg.countries = _split(args.country)
    if args.tau:
        cfg.taus = [int(t) for t in _split(args.tau)]
    if args.method:
        cfg.methods = _split(args.method)
    if args.mode:
        cfg.mode = args.mode
        cfg.methods = [m.split("-")[0] + ("-tv" if args.mode == "daily" else "") for m in cfg.methods]
    for attr, val in (("days", args.days), ("trials", args.trials), ("base_seed", args.seed),
                      ("output_dir", args.out), ("jobs", args.jobs), ("bias", args.bias),
                      ("max_training_days", args.max_training_days)):
        if val is not None:
            setattr(cfg, attr, val)
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if args.fetch:
            cfg.data_path = str(fetch_jhu(Path(cfg.output_dir) / "time_series_covid19_confirmed_global.csv"))
        if args.command == "dump-series":
            return cmd_dump_series(cfg, to_stdout=args.out is None)
        if args.command == "tune":
            return cmd_tune(cfg, to_stdout=args.out is None)
        return COMMANDS[args.command](cfg)
    except WincastError as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return 2
    except (ValueError, OSError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
