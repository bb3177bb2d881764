"""Last-10-day average error table for the 12 reference countries.

    python scripts/reproduce_table.py --taus 1 3 7 --methods elm-tv poly-tv
    python scripts/reproduce_table.py --bias --out results/bias

Writes the full backtest output under --out and prints a markdown table
(rows: horizon x method, columns: countries).
"""
import argparse
import sys
import time
from pathlib import Path

from wincast.cli import cmd_backtest, format_table, last10_table, read_records_csv
from wincast.config import RunConfig


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--data", default=None)
    p.add_argument("--taus", type=int, nargs="+", default=[1, 3, 7])
    p.add_argument("--methods", nargs="+", default=["elm-tv"])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--days", type=int, default=31)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bias", action="store_true")
    p.add_argument("--max-training-days", type=int, default=None)
    p.add_argument("--out", default="results/table")
    a = p.parse_args(argv)

    cfg = RunConfig(data_path=a.data, taus=a.taus, methods=a.methods, trials=a.trials, days=a.days,
                    base_seed=a.seed, output_dir=a.out, bias=a.bias,
                    max_training_days=a.max_training_days).validate()
    t0 = time.perf_counter()
    rc = cmd_backtest(cfg)
    rows = [r for f in sorted(Path(a.out).glob("records_*.csv")) for r in read_records_csv(f)]
    table, countries = last10_table(rows, cfg.countries)
    print(format_table(table, countries), end="")
    print(f"\n{len(rows)} records in {time.perf_counter() - t0:.0f}s, config {cfg.config_hash()}")
    return rc


if __name__ == "__main__":
    sys.exit(main())
