"""Run configuration: YAML (or JSON) files mapped onto a validated ``RunConfig``.

Recognized keys and defaults::

    scenario: rest            # builtin preset name, or use initial_state
    scenario_options: {}      # preset-specific overrides, e.g. {amp_v: 0.3}
    initial_state: null       # {centers: a.csv, nodes: b.csv} in snapshot format
    params: {}                # Parameters fields; unset ones follow the unit
                              # normalization with mu2 = alpha
    n_cells: 64
    t_final: <required>
    controls: {cfl: 0.4, dt_min: 1e-9, dt_max: 1e-2, max_retries: 8, fixed_dt: null}
    series_every: 1
    snapshot_every: 100
    output_dir: out
    seed: 0
    magnetic: true            # false skips the w and b solves
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .core import Parameters
from .integrator import StepControls
from .scenarios import SCENARIOS, ScenarioError, get_scenario


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


TOP_LEVEL_KEYS = {
    "scenario", "scenario_options", "initial_state", "params", "n_cells", "t_final",
    "controls", "series_every", "snapshot_every", "output_dir", "seed", "magnetic",
}
CONTROL_KEYS = {"cfl", "dt_min", "dt_max", "max_retries", "fixed_dt"}
PARAM_KEYS = {f.name for f in dataclasses.fields(Parameters)}


@dataclass
class RunConfig:
    t_final: float
    scenario: str | None = "rest"
    scenario_options: dict = field(default_factory=dict)
    initial_state: dict | None = None
    params: Parameters = field(default_factory=lambda: Parameters.paper_normalized(0.0, 1.0))
    n_cells: int = 64
    controls: StepControls | None = None
    series_every: int = 1
    snapshot_every: int = 100
    output_dir: str = "out"
    seed: int = 0
    magnetic: bool = True
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "scenario_options": dict(self.scenario_options),
            "initial_state": self.initial_state,
            "params": self.params.to_dict(),
            "n_cells": self.n_cells,
            "t_final": self.t_final,
            "controls": dataclasses.asdict(self.controls),
            "series_every": self.series_every,
            "snapshot_every": self.snapshot_every,
            "output_dir": self.output_dir,
            "seed": self.seed,
            "magnetic": self.magnetic,
        }


def _number(raw: dict, key: str, kind=float, where: str = ""):
    value = raw[key]
    name = f"{where}{key}"
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", name)
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"expected an integer, got {value!r}", name)
        return int(value)
    return float(value)


def _mapping(raw, key: str) -> dict:
    value = raw.get(key) or {}
    if not isinstance(value, dict):
        raise ConfigError("expected a mapping", key)
    return value


def _reject_unknown(raw: dict, allowed: set, where: str = "") -> None:
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown}", f"{where}{unknown[0]}")


def build_params(raw: dict) -> Parameters:
    _reject_unknown(raw, PARAM_KEYS, "params.")
    values = {k: _number(raw, k, where="params.") for k in raw}
    values.setdefault("alpha", 0.0)
    values.setdefault("beta", 1.0)
    values.setdefault("mu2", values["alpha"])
    try:
        return Parameters(**{**Parameters.paper_normalized(0.0, 1.0).to_dict(), **values})
    except ValueError as exc:
        name = str(exc).split()[1] if str(exc).startswith("parameter ") else None
        raise ConfigError(str(exc), f"params.{name}" if name else "params") from None


def build_controls(raw: dict, t_final: float) -> StepControls:
    _reject_unknown(raw, CONTROL_KEYS, "controls.")
    values = {k: _number(raw, k, int if k == "max_retries" else float, "controls.") for k in raw if raw[k] is not None}
    fixed = values.pop("fixed_dt", None)
    if fixed is not None:
        if fixed <= 0:
            raise ConfigError("must be positive", "controls.fixed_dt")
        values.update(dt_min=fixed, dt_max=fixed)
        values.setdefault("cfl", 1.0)
    try:
        return StepControls(t_final=t_final, **values)
    except ValueError as exc:
        raise ConfigError(str(exc), "controls") from None


def config_from_dict(raw: dict, base_dir: Path | None = None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping")
    _reject_unknown(raw, TOP_LEVEL_KEYS)
    if "t_final" not in raw:
        raise ConfigError("is required", "t_final")
    t_final = _number(raw, "t_final")
    if not t_final > 0:
        raise ConfigError("must be positive", "t_final")

    cfg = RunConfig(t_final=t_final)
    if "n_cells" in raw:
        cfg.n_cells = _number(raw, "n_cells", int)
        if cfg.n_cells < 4:
            raise ConfigError("must be >= 4", "n_cells")
    for key in ("series_every", "snapshot_every", "seed"):
        if key in raw:
            setattr(cfg, key, _number(raw, key, int))
    for key in ("series_every", "snapshot_every"):
        if getattr(cfg, key) < 1:
            raise ConfigError("cadence must be >= 1", key)
    if "output_dir" in raw:
        cfg.output_dir = str(raw["output_dir"])
    if "magnetic" in raw:
        if not isinstance(raw["magnetic"], bool):
            raise ConfigError("expected true or false", "magnetic")
        cfg.magnetic = raw["magnetic"]

    cfg.params = build_params(_mapping(raw, "params"))
    if cfg.params.beta == 0:
        cfg.warnings.append("beta = 0 lies outside the degenerate-conductivity regime beta > 0")
    cfg.controls = build_controls(_mapping(raw, "controls"), t_final)

    init = raw.get("initial_state")
    if init is not None:
        if not isinstance(init, dict) or set(init) != {"centers", "nodes"}:
            raise ConfigError("expected a mapping with keys 'centers' and 'nodes'", "initial_state")
        base = base_dir or Path(".")
        cfg.initial_state = {k: str((base / init[k]) if not Path(init[k]).is_absolute() else init[k]) for k in init}
        cfg.scenario = None
        if "scenario" in raw:
            raise ConfigError("give either scenario or initial_state, not both", "scenario")
    else:
        cfg.scenario = str(raw.get("scenario", "rest"))
        if cfg.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {cfg.scenario!r}; available: {', '.join(SCENARIOS)}", "scenario")
        cfg.scenario_options = _mapping(raw, "scenario_options")
        # build once on the target grid so invalid initial data fail at load time
        try:
            get_scenario(cfg.scenario).build(cfg.n_cells, seed=cfg.seed, **cfg.scenario_options)
        except (ScenarioError, TypeError) as exc:
            raise ConfigError(str(exc), "scenario_options") from None
    return cfg


def parse_text(text: str, source: str = "<config>"):
    """Parse YAML (a superset of JSON); errors carry the line number."""
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark is not None else source
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"parse error at {where}: {problem}") from None


def load_raw(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    return parse_text(path.read_text(), str(path))


def load_config(path) -> RunConfig:
    path = Path(path)
    return config_from_dict(load_raw(path), base_dir=path.parent)


def dumps(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)
