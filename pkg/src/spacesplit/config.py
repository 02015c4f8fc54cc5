"""Run configuration: one record drives every command and is embedded in
every output artifact so runs can be reproduced byte-identically."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import MAPS
from .errors import ConfigError
from .observables import OBSERVABLES


@dataclass
class RunConfig:
    map: str = "baker"
    s: tuple = (0.0, 0.0, 0.0, 0.0)
    param_index: int = 0
    observable: str = "cos4x2"
    runup: int = 100
    N: int = 500_000
    K: int = 11
    seed: int = 0
    diagnostics: bool = False
    centered: bool = True
    # finite-difference oracle settings
    oracle_delta: float = 0.05
    oracle_orbits: int = 200
    oracle_orbit_length: int = 100_000
    oracle_runup: int = 1000
    # sweep / baseline / histogram settings
    grid: Optional[tuple] = None
    ensemble: int = 4096
    bins: int = 50
    workers: int = 1

    def validate(self) -> "RunConfig":
        if self.map not in MAPS:
            raise ConfigError(f"unknown map {self.map!r}; known: {sorted(MAPS)}")
        if self.observable not in OBSERVABLES:
            raise ConfigError(
                f"unknown observable {self.observable!r}; known: {sorted(OBSERVABLES)}")
        model = MAPS[self.map]()
        s = np.asarray(self.s, dtype=float)
        if s.shape != (model.param_dim,):
            raise ConfigError(f"map {self.map!r} takes {model.param_dim} parameters")
        if not np.all(np.isfinite(s)):
            raise ConfigError("parameter vector must be finite")
        if not 0 <= self.param_index < model.param_dim:
            raise ConfigError(f"param_index must be in [0, {model.param_dim})")
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if self.runup < 0:
            raise ConfigError("runup must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.oracle_delta <= 0:
            raise ConfigError("oracle_delta must be > 0")
        if self.oracle_orbits < 1 or self.oracle_orbit_length < 1 or self.oracle_runup < 0:
            raise ConfigError("oracle sampling settings must be positive")
        if self.ensemble < 2:
            raise ConfigError("ensemble must be >= 2")
        if self.bins < 1:
            raise ConfigError("bins must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=float)
            if g.ndim != 1 or g.size < 1 or not np.all(np.isfinite(g)):
                raise ConfigError("grid must be a non-empty list of finite values")
            if g.size > 1 and not np.all(np.diff(g) > 0):
                raise ConfigError("grid must be strictly increasing")
        return self

    def build_model(self):
        return MAPS[self.map]()

    def build_observable(self):
        return OBSERVABLES[self.observable]

    @property
    def s_array(self) -> np.ndarray:
        return np.asarray(self.s, dtype=float)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["s"] = [float(x) for x in self.s]
        if self.grid is not None:
            out["grid"] = [float(x) for x in self.grid]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "s" in kwargs:
            kwargs["s"] = tuple(float(x) for x in kwargs["s"])
        if kwargs.get("grid") is not None:
            kwargs["grid"] = tuple(float(x) for x in kwargs["grid"])
        try:
            cfg = cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        return cfg


def load_config_file(path) -> RunConfig:
    """Read a config JSON file; output artifacts that embed their config
    under a "config" key are accepted as-is, closing the round-trip."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    return RunConfig.from_dict(data)
