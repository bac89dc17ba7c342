"""INI experiment configuration.

Example::

    [experiment]
    kind = simulate

    [grid]
    n = 32

    [time]
    T = 0.2
    J = 64

    [data]
    preset = two-mode
    amplitude = 1.0
    seed = 0

Every value is validated in :func:`load_config` before any computation
starts; the normalized configuration is written into the run manifest.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .presets import PRESETS

KINDS = ("simulate", "measure-smoothing", "contraction", "scaling", "algebra-suite")


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "simulate"
    n: int = 32
    L: float = 2 * math.pi
    q: float = 4.0
    T: float = 1.0
    J: int = 64
    gamma: float = 2.0
    preset: str = "two-mode"
    amplitude: float | None = None
    seed: int = 0
    tol: float = 1e-8
    max_iter: int = 50
    gauss_points: int = 4
    # simulate: optional reference run
    reference_dt: float | None = None
    compare_tol: float = 1e-3
    # measure-smoothing
    smoothing_op: str = "S"
    smoothing_p: float = 1.5
    smoothing_q: float = 3.0
    smoothing_widths: int = 9
    smoothing_times: int = 25
    # contraction
    contraction_T: tuple[float, ...] = (0.1, 1.0, 10.0)
    ensemble_size: int = 4
    small_data_T: tuple[float, ...] = (1.0, 4.0, 16.0)
    # scaling
    scale: float = 2.0
    # algebra-suite
    cases: int = 10000
    # output
    out: str = "out"
    snapshot_stride: int = 0          # 0: J // 8

    def validate(self) -> "ExperimentConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.kind in KINDS, f"unknown experiment kind {self.kind!r}")
        need(self.n >= 8 and self.n & (self.n - 1) == 0, "grid.n must be a power of two >= 8")
        need(self.L > 0, "grid.L must be positive")
        need(3 < self.q < 6, "exponents.q must lie in (3, 6)")
        need(self.T > 0, "time.T must be positive")
        need(self.J >= 4, "time.J must be >= 4")
        need(self.gamma >= 1, "time.gamma must be >= 1")
        need(self.preset in PRESETS, f"data.preset must be one of {', '.join(PRESETS)}")
        need(self.amplitude is None or self.amplitude >= 0, "data.amplitude must be >= 0")
        need(self.seed >= 0, "data.seed must be >= 0")
        need(self.tol > 0, "solver.tol must be positive")
        need(self.max_iter >= 1, "solver.max_iter must be >= 1")
        need(self.gauss_points >= 1, "solver.gauss_points must be >= 1")
        need(self.reference_dt is None or self.reference_dt > 0, "reference.dt must be positive")
        need(self.smoothing_op in ("S", "M"), "smoothing.op must be S or M")
        need(1 <= self.smoothing_p <= self.smoothing_q, "smoothing needs 1 <= p <= q")
        need(self.smoothing_widths >= 2 and self.smoothing_times >= 2, "smoothing needs >= 2 widths and times")
        need(len(self.contraction_T) >= 1 and min(self.contraction_T) > 0, "contraction.T values must be positive")
        need(self.ensemble_size >= 1, "contraction.ensemble must be >= 1")
        need(all(t > 0 for t in self.small_data_T), "contraction.small_data_T values must be positive")
        need(self.scale > 0 and math.log2(self.scale).is_integer(), "scaling.lambda must be a power of two")
        need(self.cases >= 1, "algebra.cases must be >= 1")
        need(self.snapshot_stride >= 0, "output.snapshot_stride must be >= 0")
        return self

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("out")
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    def solver_config(self):
        from .mild import ExponentConfig, SolverConfig
        return SolverConfig(exponents=ExponentConfig(self.q), J=self.J, gamma=self.gamma,
                            gauss_points=self.gauss_points, tol=self.tol, max_iter=self.max_iter)

    def grid(self):
        from .grid import Grid
        return Grid(self.n, self.L)


# (section, key) -> (field name, parser)
_SCHEMA = {
    ("experiment", "kind"): ("kind", str),
    ("grid", "n"): ("n", int),
    ("grid", "l"): ("L", float),
    ("exponents", "q"): ("q", float),
    ("time", "t"): ("T", float),
    ("time", "j"): ("J", int),
    ("time", "gamma"): ("gamma", float),
    ("data", "preset"): ("preset", str),
    ("data", "amplitude"): ("amplitude", float),
    ("data", "seed"): ("seed", int),
    ("solver", "tol"): ("tol", float),
    ("solver", "max_iter"): ("max_iter", int),
    ("solver", "gauss_points"): ("gauss_points", int),
    ("reference", "dt"): ("reference_dt", float),
    ("reference", "tolerance"): ("compare_tol", float),
    ("smoothing", "op"): ("smoothing_op", str),
    ("smoothing", "p"): ("smoothing_p", float),
    ("smoothing", "q"): ("smoothing_q", float),
    ("smoothing", "widths"): ("smoothing_widths", int),
    ("smoothing", "times"): ("smoothing_times", int),
    ("contraction", "t_values"): ("contraction_T", _floats),
    ("contraction", "ensemble"): ("ensemble_size", int),
    ("contraction", "small_data_t"): ("small_data_T", _floats),
    ("scaling", "lambda"): ("scale", float),
    ("algebra", "cases"): ("cases", int),
    ("output", "dir"): ("out", str),
    ("output", "snapshot_stride"): ("snapshot_stride", int),
}


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse INI text; keyword overrides (``None`` ignored) win over the file."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    values = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            try:
                name, parse = _SCHEMA[(section.lower(), key.lower())]
            except KeyError:
                raise ConfigError(f"unknown config entry [{section}] {key}") from None
            try:
                values[name] = parse(raw.strip())
            except ValueError:
                raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {parse.__name__}") from None
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if "kind" in values and "kind" in overrides and values["kind"] != overrides["kind"]:
        raise ConfigError(f"config declares experiment {values['kind']!r}, "
                          f"command asks for {overrides['kind']!r}")
    values.update(overrides)
    return replace(ExperimentConfig(), **values).validate()


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, **overrides)
