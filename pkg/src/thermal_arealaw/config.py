"""Experiment configuration: TOML schema, region patterns and validation.

Schema::

    seed = 7
    suites = ["area_law", "lts"]

    [model]
    name = "tfim"             # see ``thermal-arealaw models``
    params = { J = 1.0, g = 1.0 }
    statistics = "spin"       # optional; must match the model

    [grid]
    beta = [0.2, 1.0, "inf"]  # "inf" only for ground_state / gaussian_scan
    windows = [8]
    regions = ["half", "central-2", "prefix-3", [1, 2, 5]]

    [tolerances]              # optional overrides of DEFAULT_TOLERANCES
    area_law = 1e-9

    [options]                 # optional overrides of DEFAULT_OPTIONS
    lts_trials = 100
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import PreconditionError
from .lattice import DIM_CAP, Statistics
from .potential import ModelSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SUITES = (
    "area_law",
    "lts",
    "gibbs_condition",
    "halves_series",
    "donald",
    "pinsker",
    "ssa",
    "ground_state",
    "gaussian_scan",
    "dynamics",
)
ED_SUITES = {"area_law", "lts", "gibbs_condition", "halves_series", "ground_state", "dynamics"}
FINITE_BETA_SUITES = {"area_law", "lts", "gibbs_condition", "halves_series"}

DEFAULT_TOLERANCES: dict[str, float] = {
    "area_law": 1e-9,
    "lts": 1e-9,
    "gibbs_condition": 1e-9,
    "halves_series": 1e-9,
    "donald": 1e-8,
    "pinsker": 1e-10,
    "ssa": 1e-10,
    "ground_state": 1e-9,
    "gaussian_scan": 1e-6,
    "dynamics": 1e-9,
    "convergence": 1e-4,
}

DEFAULT_OPTIONS: dict[str, Any] = {
    "lts_trials": 100,
    "random_samples": 100,
    "random_sites": 3,
    "halves_k": [2, 3, 4],
    "gaussian_sizes": [32, 64, 128],
    "saturation_tol": 1e-3,
    "dynamics_times": [0.1, 0.5, 1.0],
}

_PATTERN = re.compile(r"^(half|central-(\d+)|prefix-(\d+))$")


class ConfigError(PreconditionError):
    """Aggregated validation failures."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


@dataclass(frozen=True)
class RegionSpec:
    """``half``, ``central-k``, ``prefix-k`` or an explicit site list, relative to a window ``0..n-1``."""

    pattern: str
    sites: tuple[int, ...] = ()

    @classmethod
    def parse(cls, raw: Any) -> "RegionSpec":
        if isinstance(raw, str):
            if not _PATTERN.match(raw):
                raise ValueError(f"unknown region pattern {raw!r}")
            return cls(raw)
        if isinstance(raw, (list, tuple)) and raw and all(isinstance(s, int) for s in raw):
            return cls("sites", tuple(sorted(set(raw))))
        raise ValueError(f"region must be a pattern or a non-empty list of integers, got {raw!r}")

    def resolve(self, n_sites: int) -> tuple[int, ...]:
        if self.pattern == "sites":
            sites = self.sites
        elif self.pattern == "half":
            sites = tuple(range(n_sites // 2))
        else:
            kind, k = self.pattern.split("-")
            k = int(k)
            if kind == "prefix":
                sites = tuple(range(k))
            else:
                start = (n_sites - k) // 2
                sites = tuple(range(start, start + k))
        if not sites or min(sites) < 0 or max(sites) >= n_sites or len(sites) >= n_sites:
            raise ValueError(f"region {self.label} is not a proper subset of a {n_sites}-site window")
        return sites

    @property
    def label(self) -> str:
        return self.pattern if self.pattern != "sites" else "sites:" + ",".join(map(str, self.sites))


@dataclass
class ExperimentConfig:
    model: ModelSpec
    beta_grid: list[float]
    window_ladder: list[int]
    regions: list[RegionSpec]
    suites: list[str]
    seed: int = 0
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    options: dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_OPTIONS))

    @property
    def statistics(self) -> Statistics:
        return self.model.statistics


def _beta(raw: Any) -> float:
    if isinstance(raw, str) and raw.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ValueError(f"beta entry {raw!r} is not a number")
    return float(raw)


def parse_config(data: dict[str, Any]) -> ExperimentConfig:
    """Validate a parsed TOML document, collecting every problem before raising."""
    problems: list[str] = []
    known = {"model", "grid", "suites", "seed", "tolerances", "options"}
    problems += [f"unknown top-level key {k!r}" for k in sorted(set(data) - known)]

    model = None
    mtab = data.get("model")
    if not isinstance(mtab, dict) or "name" not in mtab:
        problems.append("missing [model] table with a name")
    else:
        try:
            model = ModelSpec(str(mtab["name"]), dict(mtab.get("params", {})))
            stat = mtab.get("statistics")
            if stat is not None and Statistics(stat) is not model.statistics:
                problems.append(f"statistics {stat!r} does not match model {model.name}")
        except (PreconditionError, ValueError, TypeError) as exc:
            problems.append(str(exc))

    suites = data.get("suites", [])
    if not isinstance(suites, list):
        problems.append("suites must be a list")
        suites = []
    problems += [f"unknown suite {s!r}" for s in suites if s not in SUITES]
    suites = [s for s in suites if s in SUITES]

    grid = data.get("grid", {})
    betas: list[float] = []
    for raw in grid.get("beta", [1.0]):
        try:
            b = _beta(raw)
        except ValueError as exc:
            problems.append(str(exc))
            continue
        if not b > 0:
            problems.append(f"beta must be positive, got {raw!r}")
        elif math.isinf(b) and FINITE_BETA_SUITES & set(suites):
            problems.append(f"beta = inf is not allowed with suites {sorted(FINITE_BETA_SUITES & set(suites))}")
        betas.append(b)

    windows = grid.get("windows", [8])
    if not all(isinstance(w, int) and not isinstance(w, bool) and w >= 2 for w in windows):
        problems.append(f"window sizes must be integers >= 2, got {windows!r}")
        windows = []
    if ED_SUITES & set(suites):
        problems += [f"window {w} exceeds the dimension cap 2^{DIM_CAP.bit_length() - 1}" for w in windows if 2**w > DIM_CAP]

    regions = []
    for raw in grid.get("regions", ["half"]):
        try:
            spec = RegionSpec.parse(raw)
            for w in windows:
                spec.resolve(w)
            regions.append(spec)
        except ValueError as exc:
            problems.append(str(exc))

    tolerances = dict(DEFAULT_TOLERANCES)
    for k, v in data.get("tolerances", {}).items():
        if k not in tolerances:
            problems.append(f"unknown tolerance {k!r}")
        elif not isinstance(v, (int, float)) or v < 0:
            problems.append(f"tolerance {k} must be a non-negative number")
        else:
            tolerances[k] = float(v)

    options = dict(DEFAULT_OPTIONS)
    for k, v in data.get("options", {}).items():
        if k not in options:
            problems.append(f"unknown option {k!r}")
        else:
            options[k] = v
    if "halves_series" in suites and 2 ** (2 * max(options["halves_k"])) > DIM_CAP:
        problems.append(f"halves_k up to {max(options['halves_k'])} exceeds the dimension cap")
    if model is not None and model.statistics is not Statistics.FERMION and "gaussian_scan" in suites:
        problems.append("gaussian_scan needs a fermionic quadratic model")

    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        problems.append(f"seed must be a non-negative integer, got {seed!r}")
        seed = 0

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(model, betas, list(windows), regions, suites, seed, tolerances, options)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError([f"config file {path} not found"]) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"cannot parse {path}: {exc}"]) from exc
    return parse_config(data)
