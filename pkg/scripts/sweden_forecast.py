"""Deployment-style forecast: tune on all data and predict 1, 3 and 7 days out.

    python scripts/sweden_forecast.py --data path/to/jhu.csv --country Sweden

If the file also holds the target days (use --as-of to cut the series
early), the reported counts and percentage errors are printed alongside.
"""
import argparse
from datetime import date

from wincast.ingest import load_country_series, load_table, resolve_data_path
from wincast.metrics import error_pct
from wincast.models import ModelSpec, forecast_mc
from wincast.backtest import parse_method
from wincast.series import log_transform
from wincast.tuning import SearchGrid, tune


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--data", default=None)
    p.add_argument("--country", default="Sweden")
    p.add_argument("--as-of", type=date.fromisoformat, default=None, help="last day of data to use")
    p.add_argument("--method", default="elm-tv")
    p.add_argument("--taus", type=int, nargs="+", default=[1, 3, 7])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--bias", action="store_true")
    a = p.parse_args(argv)

    full = load_country_series(load_table(resolve_data_path(a.data)), a.country)
    s = full if a.as_of is None else full.head((a.as_of - full.start_date).days + 1)
    kind, mode = parse_method(a.method)
    spec = ModelSpec(kind, bias=a.bias)
    ls = log_transform(s)
    print(f"{a.country}, data through {s.end_date}, {a.method}")
    for tau in a.taus:
        hp = tune(ls, ls.N - 1, spec, tau, SearchGrid(), mode).best
        fc = forecast_mc(s, spec, hp, tau, range(a.trials) if kind == "elm" else [0])
        line = f"  {fc.target_date}  tau={tau}  predicted {fc.point:10.0f}  ({hp.label()})"
        k = s.N - 1 + tau
        if k < full.N:
            line += f"  reported {full.counts[k]}  error {error_pct(full.counts[k], fc.point):.2f}%"
        print(line)


if __name__ == "__main__":
    main()
