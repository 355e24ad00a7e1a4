"""Experiment configuration files.

A config is a JSON object::

    {
      "model": {"preset": "gene"} | {"species": [...], "reactions": [...]} | "model.json",
      "controller": {"mu": 10, "theta": 2, "eta": 100, "k": 3,
                     "feedback": {"kind": "on_off", "Kp": 20},
                     "controlled": "X2", "actuated": "X1"},
      "n": 10000,
      "grid": {"t_end": 40, "n_points": 161},
      "seed": 1,
      "sweep": {"k": [1, 3, 5, 7], "Kp": [0, 5, 10, 20], "feedback": "on_off"},
      "x0": {"X1": 0},
      "window": 0.25,
      "band": 0.02,
      "pairs": [["X2", "Z1-Z2"]],
      "beta": 0.0
    }

A manifest written by any command can be passed back as a config; its
``config`` entry is used.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..controller import FEEDBACK_KINDS, ClosedLoopConfig
from ..crn import Network
from ..errors import ConfigError, StructuralError
from ..presets import PRESETS, preset
from ..ssa import TimeGrid

DESK_N = 10_000
FULL_N = 1_000_000

_KNOWN = {"model", "controller", "n", "grid", "seed", "sweep", "x0", "window", "band",
          "pairs", "beta", "higher_moments", "out", "figure", "threads"}


@dataclass
class ExperimentConfig:
    model: Network
    controller: Optional[ClosedLoopConfig]
    n: int = DESK_N
    grid: TimeGrid = field(default_factory=lambda: TimeGrid.uniform(40.0, 161))
    seed: int = 1
    k_values: tuple = ()
    Kp_values: tuple = ()
    x0: Optional[np.ndarray] = None
    window: float = 0.25
    band: float = 0.02
    pairs: tuple = ()
    beta: float = 0.0
    higher_moments: bool = False
    feedback_kind: Optional[str] = None
    figure: Optional[str] = None
    preset: Optional[str] = None
    params: object = None
    model_spec: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if not 0 < self.window <= 1:
            raise ConfigError(f"window must lie in (0, 1], got {self.window}")
        if not self.band > 0:
            raise ConfigError(f"band must be positive, got {self.band}")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @property
    def closed_form(self):
        """Name of the case study whose closed-form variance applies, if any."""
        return self.preset if self.preset in ("gene", "maturation") else None

    def initial_state(self):
        d = self.model.dim
        x = np.zeros(d + 2, dtype=np.int64)
        if self.x0 is not None:
            x[:d] = self.x0
        if self.controller is not None:
            x[d:] = self.controller.z0
            return x
        return x[:d]

    def to_dict(self):
        out = {"model": self.model_spec, "n": self.n, "grid": self.grid.to_dict(),
               "seed": self.seed, "window": self.window, "band": self.band}
        if self.controller is not None:
            out["controller"] = self.controller.to_dict(self.model.species)
        if self.k_values or self.Kp_values:
            out["sweep"] = {"k": list(self.k_values), "Kp": list(self.Kp_values)}
            if self.feedback_kind:
                out["sweep"]["feedback"] = self.feedback_kind
        if self.x0 is not None:
            out["x0"] = {s: int(v) for s, v in zip(self.model.species, self.x0)}
        if self.pairs:
            out["pairs"] = [list(p) for p in self.pairs]
        if self.beta:
            out["beta"] = self.beta
        if self.higher_moments:
            out["higher_moments"] = True
        if self.figure:
            out["figure"] = self.figure
        return out


def _number(data, key, kind, default, where="config"):
    if key not in data:
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
    return kind(value)


def _load_model(source, base_dir):
    """Returns (network, preset name, preset params, default controller, entry to record)."""
    if isinstance(source, str):
        path = Path(source)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        try:
            source = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"model: cannot read {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"model file {path}: line {exc.lineno} column {exc.colno}: "
                              f"{exc.msg}") from None
    if not isinstance(source, dict):
        raise ConfigError("model must be an object, a preset reference or a file path")
    if "preset" in source:
        name = source["preset"]
        if name not in PRESETS:
            raise ConfigError(f"model.preset: unknown preset {name!r}; "
                              f"choose from {sorted(PRESETS)}")
        build, params, _ = PRESETS[name]
        overrides = source.get("params", {})
        try:
            params = dataclasses.replace(params, **overrides)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"model.params: {exc}") from None
        network = build(params)
        _, default = preset(name)
        record = {"preset": name, **({"params": overrides} if overrides else {})}
        return network, name, params, default, record
    try:
        network = Network.from_dict(source)
    except (StructuralError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"model: {exc}") from None
    return network, None, None, None, network.to_dict()


def parse_config(data, base_dir=None):
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if "config" in data and "tool" in data:
        data = data["config"]
    unknown = set(data) - _KNOWN
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    if "model" not in data:
        raise ConfigError("config: missing required key 'model'")
    network, preset_name, params, default_ctrl, model_spec = _load_model(data["model"], base_dir)

    controller = None
    if "controller" in data:
        block = data["controller"]
        if not isinstance(block, dict):
            raise ConfigError("controller: expected an object")
        if default_ctrl is not None:
            block = {**default_ctrl.to_dict(network.species), **block}
        try:
            controller = ClosedLoopConfig.from_dict(block, list(network.species))
        except (StructuralError, TypeError, ValueError) as exc:
            raise ConfigError(f"controller: {exc}") from None
    elif default_ctrl is not None:
        controller = default_ctrl

    grid_block = data.get("grid", {})
    if not isinstance(grid_block, dict):
        raise ConfigError("grid: expected an object with t_end and n_points")
    t_end = _number(grid_block, "t_end", float, 40.0, "grid")
    n_points = _number(grid_block, "n_points", int, 161, "grid")
    if not t_end > 0 or n_points < 2:
        raise ConfigError("grid: need t_end > 0 and n_points >= 2")
    grid = TimeGrid.uniform(t_end, n_points)

    sweep = data.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError("sweep: expected an object with 'k' and 'Kp' lists")
    unknown = set(sweep) - {"k", "Kp", "feedback"}
    if unknown:
        raise ConfigError(f"sweep: unknown keys {sorted(unknown)}")
    k_values = tuple(float(v) for v in sweep.get("k", ()))
    Kp_values = tuple(float(v) for v in sweep.get("Kp", ()))
    if sweep and (not k_values or not Kp_values):
        raise ConfigError("sweep: both 'k' and 'Kp' grids must be non-empty")
    if any(v <= 0 for v in k_values) or any(v < 0 for v in Kp_values):
        raise ConfigError("sweep: k values must be > 0 and Kp values >= 0")
    feedback_kind = sweep.get("feedback")
    if feedback_kind is None and controller is not None and controller.feedback is not None:
        feedback_kind = controller.feedback.kind
    if feedback_kind not in (None, "none", *FEEDBACK_KINDS):
        raise ConfigError(f"sweep.feedback: expected one of {FEEDBACK_KINDS}, got {feedback_kind!r}")
    if feedback_kind == "none":
        feedback_kind = None

    x0 = None
    if "x0" in data:
        x0 = np.zeros(network.dim, dtype=np.int64)
        for name, count in data["x0"].items():
            if name not in network.species:
                raise ConfigError(f"x0: unknown species {name!r}")
            if int(count) < 0:
                raise ConfigError(f"x0.{name}: counts must be nonnegative")
            x0[network.species.index(name)] = int(count)

    pairs = tuple(tuple(p) for p in data.get("pairs", ()))
    for p in pairs:
        if len(p) != 2:
            raise ConfigError(f"pairs: each entry needs two observable names, got {p!r}")

    return ExperimentConfig(
        model=network, controller=controller,
        n=_number(data, "n", int, DESK_N), grid=grid,
        seed=_number(data, "seed", int, 1),
        k_values=k_values, Kp_values=Kp_values, x0=x0,
        window=_number(data, "window", float, 0.25),
        band=_number(data, "band", float, 0.02),
        pairs=pairs, beta=_number(data, "beta", float, 0.0),
        higher_moments=bool(data.get("higher_moments", False)),
        feedback_kind=feedback_kind, figure=data.get("figure"),
        preset=preset_name, params=params, model_spec=model_spec,
    )


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(data, base_dir=path.parent)
