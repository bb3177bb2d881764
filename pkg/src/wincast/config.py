"""Run configuration: a YAML (or JSON) file, overridden by CLI flags."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .backtest import METHODS
from .ingest import REFERENCE_COUNTRIES
from .tuning import MODES, SearchGrid


@dataclass
class RunConfig:
    data_path: Optional[str] = None
    countries: list = field(default_factory=lambda: list(REFERENCE_COUNTRIES))
    taus: list = field(default_factory=lambda: [1, 3, 7])
    methods: list = field(default_factory=lambda: ["elm-tv"])
    grid: SearchGrid = field(default_factory=SearchGrid)
    mode: str = "daily"
    days: int = 31
    trials: int = 100
    base_seed: int = 0
    output_dir: str = "out"
    bias: bool = False
    max_training_days: Optional[int] = None
    jobs: int = 1

    def validate(self) -> "RunConfig":
        if not self.taus or any(int(t) < 1 for t in self.taus):
            raise ValueError("taus must be non-empty and each >= 1")
        if not self.countries:
            raise ValueError("at least one country is required")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {sorted(METHODS)}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.trials < 1 or self.days < 1 or self.jobs < 1:
            raise ValueError("trials, days and jobs must be >= 1")
        return self

    def identity(self) -> dict:
        """Everything that affects results (not where they are written or how fast)."""
        d = dataclasses.asdict(self)
        d["grid"] = self.grid.to_dict()
        d.pop("output_dir")
        d.pop("jobs")
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.identity(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def header_line(self) -> str:
        return f"# wincast config_hash={self.config_hash()} base_seed={self.base_seed}"


_GRID_KEYS = {f.name for f in dataclasses.fields(SearchGrid)}


def config_from_dict(d: dict) -> RunConfig:
    d = dict(d)
    grid = d.pop("grid", None) or {}
    unknown = set(grid) - _GRID_KEYS
    if unknown:
        raise ValueError(f"unknown grid keys {sorted(unknown)}")
    names = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(d) - names
    if unknown:
        raise ValueError(f"unknown config keys {sorted(unknown)}")
    return RunConfig(grid=SearchGrid(**grid), **d)


def load_config(path) -> RunConfig:
    text = Path(path).read_text("utf-8")
    return config_from_dict(yaml.safe_load(text) or {})
