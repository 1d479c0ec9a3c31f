"""Experiment configuration files.

A config is one flat YAML mapping; every key is optional and unknown keys
are rejected.  Validation errors carry ``path:line`` of the offending key.

    input_N: 0.04
    M_range: [0, 1, 2, 3, 4, 5, 6]
    mode: feasible          # ideal | feasible (fig3 and sweep)
    T: 0.9
    eta: 0.4
    detector: threshold     # threshold | pnr
    nth_min: 0.001
    nth_max: 20
    dim: 60
    quad_nodes: 48
    wigner_extent: 6
    wigner_points: 301
    wigner_M: [0, 1, 2, 3, 4, 5, 6]
    threads: 1
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .optimizer import SweepConfig, SweepMode
from .wigner import GridSpec

DEFAULT_M_RANGE = (0, 1, 2, 3, 4, 5, 6)


@dataclass(frozen=True)
class ExperimentConfig:
    input_N: float = 0.04
    M_range: tuple = DEFAULT_M_RANGE
    mode: str = "feasible"
    T: float = 0.9
    eta: float = 0.4
    detector: str = "threshold"
    nth_min: float = 1e-3
    nth_max: float = 20.0
    dim: int = 60
    quad_nodes: int = 48
    wigner_extent: float = 6.0
    wigner_points: int = 301
    wigner_M: tuple | None = None
    threads: int = 1
    source: str = field(default="<defaults>", compare=False)

    def sweep(self, mode: str | SweepMode | None = None) -> SweepConfig:
        return SweepConfig(
            input_N=self.input_N,
            mode=SweepMode(mode or self.mode),
            M_range=self.M_range,
            T=self.T,
            eta=self.eta,
            detector=self.detector,
            nth_bounds=(self.nth_min, self.nth_max),
            dim=self.dim,
            quad_nodes=self.quad_nodes,
        )

    def grid(self) -> GridSpec:
        return GridSpec(-self.wigner_extent, self.wigner_extent, self.wigner_points)

    @property
    def wigner_orders(self) -> tuple:
        return self.M_range if self.wigner_M is None else self.wigner_M

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("source")
        d["M_range"] = list(self.M_range)
        d["wigner_M"] = list(self.wigner_orders)
        return d


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return (isinstance(v, (int, float))) and not isinstance(v, bool)


def _int_list(v) -> bool:
    return isinstance(v, list) and all(_is_int(x) and x >= 0 for x in v)


# key -> (check, message)
_RULES = {
    "input_N": (lambda v: _is_num(v) and v >= 0, "must be a number >= 0"),
    "M_range": (lambda v: _int_list(v) and len(v) > 0, "must be a non-empty list of non-negative integers"),
    "mode": (lambda v: v in ("ideal", "feasible"), "must be 'ideal' or 'feasible'"),
    "T": (lambda v: _is_num(v) and 0 < v <= 1, "must be in (0, 1]"),
    "eta": (lambda v: _is_num(v) and 0 < v <= 1, "must be in (0, 1]"),
    "detector": (lambda v: v in ("threshold", "pnr"), "must be 'threshold' or 'pnr'"),
    "nth_min": (lambda v: _is_num(v) and 1e-4 < v <= 50, "must be in (1e-4, 50]"),
    "nth_max": (lambda v: _is_num(v) and 1e-4 < v <= 50, "must be in (1e-4, 50]"),
    "dim": (lambda v: _is_int(v) and 2 <= v <= 2000, "must be an integer in [2, 2000]"),
    "quad_nodes": (lambda v: _is_int(v) and 4 <= v <= 400, "must be an integer in [4, 400]"),
    "wigner_extent": (lambda v: _is_num(v) and v > 0, "must be a positive number"),
    "wigner_points": (lambda v: _is_int(v) and v >= 11, "must be an integer >= 11"),
    "wigner_M": (_int_list, "must be a list of non-negative integers"),
    "threads": (lambda v: _is_int(v) and v >= 1, "must be an integer >= 1"),
}


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark else source
        raise ConfigError(f"{where}: malformed YAML: {getattr(exc, 'problem', exc)}") from exc
    if root is None:
        return ExperimentConfig(source=source)
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError(f"{source}:{root.start_mark.line + 1}: top level must be a mapping")
    lines = {}
    for key_node, _ in root.value:
        key = key_node.value
        line = key_node.start_mark.line + 1
        if key in lines:
            raise ConfigError(f"{source}:{line}: duplicate key {key!r}")
        if key not in _RULES:
            raise ConfigError(f"{source}:{line}: unknown key {key!r}")
        lines[key] = line
    data = yaml.safe_load(text)
    for key, value in data.items():
        check, msg = _RULES[key]
        if not check(value):
            raise ConfigError(f"{source}:{lines[key]}: {key} {msg}, got {value!r}")
    if "nth_min" in data or "nth_max" in data:
        lo = data.get("nth_min", ExperimentConfig.nth_min)
        hi = data.get("nth_max", ExperimentConfig.nth_max)
        if not lo < hi:
            key = "nth_max" if "nth_max" in data else "nth_min"
            raise ConfigError(f"{source}:{lines[key]}: nth_min must be below nth_max ({lo} >= {hi})")
    for key in ("M_range", "wigner_M"):
        if key in data:
            data[key] = tuple(data[key])
    return ExperimentConfig(source=source, **data)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
    return parse_config(text, str(path))
