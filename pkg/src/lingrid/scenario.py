"""TOML scenario files: a grid, how to solve it, and an optional sweep.

::

    [grid]
    gap = 0.0025          # or v_horizontal / v_slanted lists
    n1 = 2
    n2 = 2
    t = 100               # or t_minus / t_plus
    beta = 1
    coupling = { preset = "eq22", m = 1, g0 = 0.5 }

    [run]
    method = "both"       # qda | numeric | both
    transitions = [[2, 1], [3, 4]]
    rel_tol = 1e-10

    [sweep]
    param = "dV"          # g0 | dV | t
    from = 0.0
    to = 0.005
    points = 200
    scale = "linear"      # linear | log
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .integrate import PICTURES, PropagationSettings
from .model import GridError, GridModel, TransitionLabel, build_grid
from .qda import METHODS as QDA_METHODS

RUN_METHODS = {"qda": ("qda",), "numeric": ("numeric",), "both": ("numeric", "qda")}
SWEEP_PARAMS = ("g0", "dV", "t")
SCALES = ("linear", "log")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class RunSpec:
    methods: tuple = ("numeric", "qda")
    transitions: tuple = ()
    settings: PropagationSettings = field(default_factory=PropagationSettings)
    qda_method: str = "auto"


@dataclass(frozen=True)
class SweepSpec:
    param: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ScenarioError(f"sweep param must be one of {SWEEP_PARAMS}, got {self.param!r}")
        if self.scale not in SCALES:
            raise ScenarioError(f"sweep scale must be one of {SCALES}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ScenarioError("sweep bounds must be finite")
        if self.points < 2:
            raise ScenarioError("sweep needs at least 2 points")
        if self.start == self.stop:
            raise ScenarioError("sweep range has zero width")
        if self.scale == "log" and not (self.start > 0 and self.stop > 0):
            raise ScenarioError("log sweep needs positive bounds")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class Scenario:
    grid_config: Mapping
    run: RunSpec
    sweep: SweepSpec | None = None
    thresholds: tuple = (0.2, 0.5)
    raw: Mapping = field(default_factory=dict)

    def grid(self, **override) -> GridModel:
        return build_grid(apply_param(self.grid_config, **override))

    def default_transitions(self, grid: GridModel) -> tuple:
        if self.run.transitions:
            return self.run.transitions
        n = grid.n_states
        return tuple(TransitionLabel(i, j) for i in range(1, n + 1)
                     for j in range(1, n + 1) if i != j)


def apply_param(config: Mapping, g0=None, dV=None, t=None) -> dict:
    """Copy of a grid section with the coupling scale, gap or interval replaced."""
    cfg = copy.deepcopy(dict(config))
    if g0 is not None:
        c = cfg.get("coupling")
        if isinstance(c, Mapping):
            c = dict(c)
        else:
            c = {"matrix": c}
        c["g0"] = float(g0)
        cfg["coupling"] = c
    if dV is not None:
        if "gap" not in cfg:
            try:
                cfg["n1"] = len(cfg.pop("v_horizontal"))
                cfg["n2"] = len(cfg.pop("v_slanted"))
            except KeyError as exc:
                raise GridError(f"missing grid key {exc.args[0]!r}") from None
        cfg["gap"] = float(dV)
    if t is not None:
        cfg.pop("t_minus", None)
        cfg.pop("t_plus", None)
        cfg["t"] = float(t)
    return cfg


def _number(section: Mapping, key: str, default=None, where="run") -> float:
    val = section.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(f"[{where}] {key} must be a number, got {val!r}")
    return float(val)


def _parse_run(run: Mapping) -> RunSpec:
    method = run.get("method", "both")
    if method not in RUN_METHODS:
        raise ScenarioError(f"[run] method must be one of {sorted(RUN_METHODS)}, got {method!r}")
    labels = []
    for item in run.get("transitions", []):
        if (not isinstance(item, (list, tuple)) or len(item) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in item)):
            raise ScenarioError(f"[run] transitions entries must be [from, to] integer pairs, got {item!r}")
        labels.append(TransitionLabel(int(item[0]), int(item[1])))
    picture = run.get("picture", "interaction")
    if picture not in PICTURES:
        raise ScenarioError(f"[run] picture must be one of {PICTURES}")
    qda_method = run.get("qda_method", "auto")
    if qda_method not in QDA_METHODS:
        raise ScenarioError(f"[run] qda_method must be one of {QDA_METHODS}")
    try:
        settings = PropagationSettings(
            rel_tol=_number(run, "rel_tol", 1e-10), abs_tol=_number(run, "abs_tol", 1e-12),
            max_step=_number(run, "max_step", math.inf), picture=picture)
    except ValueError as exc:
        raise ScenarioError(f"[run] {exc}") from None
    return RunSpec(methods=RUN_METHODS[method], transitions=tuple(labels),
                   settings=settings, qda_method=qda_method)


def _parse_sweep(sw: Mapping) -> SweepSpec:
    for key in ("param", "from", "to", "points"):
        if key not in sw:
            raise ScenarioError(f"[sweep] missing key {key!r}")
    points = sw["points"]
    if isinstance(points, bool) or not isinstance(points, int):
        raise ScenarioError("[sweep] points must be an integer")
    return SweepSpec(param=sw["param"], start=_number(sw, "from", where="sweep"),
                     stop=_number(sw, "to", where="sweep"), points=points,
                     scale=sw.get("scale", "linear"))


def scenario_from_dict(data: Mapping) -> Scenario:
    unknown = set(data) - {"grid", "run", "sweep", "criteria"}
    if unknown:
        raise ScenarioError(f"unknown section(s): {', '.join(sorted(unknown))}")
    if "grid" not in data:
        raise ScenarioError("missing [grid] section")
    run = _parse_run(data.get("run", {}))
    sweep = _parse_sweep(data["sweep"]) if "sweep" in data else None
    crit = data.get("criteria", {})
    thresholds = (_number(crit, "satisfied", 0.2, "criteria"),
                  _number(crit, "marginal", 0.5, "criteria"))
    sc = Scenario(grid_config=dict(data["grid"]), run=run, sweep=sweep,
                  thresholds=thresholds, raw=data)
    grid = sc.grid()  # validate now so errors surface before any computation
    for label in run.transitions:
        label.check(grid.n_states)
    return sc


def parse_scenario(text: str) -> Scenario:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"TOML parse error: {exc}") from None
    return scenario_from_dict(data)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, complex):
        return f"[{v.real!r}, {v.imag!r}]"
    if isinstance(v, Mapping):
        return "{ " + ", ".join(f"{k} = {_toml_value(x)}" for k, x in v.items()) + " }"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot write {type(v).__name__} as TOML")


def to_toml(data: Mapping) -> str:
    """Write a scenario mapping (tables of scalars, lists, inline tables) as TOML."""
    lines = []
    for section, body in data.items():
        lines.append(f"[{section}]")
        for k, v in body.items():
            lines.append(f"{k} = {_toml_value(v)}")
        lines.append("")
    return "\n".join(lines)
