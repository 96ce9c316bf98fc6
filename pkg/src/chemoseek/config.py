"""Experiment configuration: sectioned key-value files (INI syntax).

Every default reproduces the reference experiment, so an empty file (or
no file at all) runs the standard setup. Unknown sections or keys are
rejected rather than ignored, and `emit` -> `parse` round-trips exactly.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, fields

from . import growth as growth_mod
from .controller import AdaptiveDilution, ContinuousSeeker, FeedbackGains
from .engine import SettleCriterion, SimConfig
from .noise import KINDS as NOISE_KINDS
from .noise import NoiseParams
from .plant import PlantParams, PlantState


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    # experiment
    scheme: str = "continuous"
    # plant
    s_in: float = 1.0
    # growth
    growth_kind: str = "haldane"
    mu_max: float = 1.0
    K: float = 1.0
    K_i: float = 0.1
    # gains
    G1: float = 1.0
    G2: float = 1.0
    epsilon: float = 1e-3
    D_min: float = 0.0
    D_max: float = 1.0
    # sim
    dt: float = 1e-2
    t_end: float = 5000.0
    sample_every: int = 10
    delay_tau: float = 100.0
    # noise
    noise_kind: str = "square"
    omega: float = 0.2
    a: float = 0.05
    seed: int = 0
    # initial conditions (None: half the feed level / mid dilution range)
    s0: float = None
    b0: float = None
    Dbar0: float = 0.5
    sbar0: float = None
    # discrete scheme
    v1: float = 0.04
    v3: float = 1.0
    tol: float = 0.2
    h: float = 0.05
    t_inc_golden: float = 25.0
    t_inc_newton: float = 100.0
    newton_iters: int = 1
    settle_rho: float = 0.9
    settle_floor: float = 1e-6
    settle_max_windows: int = 40
    # output
    out_dir: str = "out"

    def __post_init__(self):
        if self.s0 is None:
            self.s0 = 0.5 * self.s_in
        if self.b0 is None:
            self.b0 = 0.5 * self.s_in
        if self.sbar0 is None:
            self.sbar0 = 0.5 * self.s_in
        if self.scheme not in ("continuous", "discrete"):
            raise ConfigError(f"scheme must be continuous or discrete, got {self.scheme!r}")
        if self.noise_kind not in NOISE_KINDS + ("none",):
            raise ConfigError(f"unknown noise kind {self.noise_kind!r}")

    # builders -----------------------------------------------------------

    def growth(self):
        if self.growth_kind == "haldane":
            return growth_mod.Haldane(self.mu_max, self.K, self.K_i)
        if self.growth_kind == "monod":
            return growth_mod.Monod(self.mu_max, self.K)
        raise ConfigError(f"unknown growth kind {self.growth_kind!r}")

    def plant(self):
        return PlantParams(self.s_in, self.growth())

    def ic(self):
        return PlantState(self.s0, self.b0)

    def gains(self):
        try:
            return FeedbackGains(self.G1, self.G2, self.epsilon,
                                 self.D_min, self.D_max)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def sim(self, t_end=None):
        try:
            return SimConfig(self.dt, t_end if t_end is not None else self.t_end,
                             self.sample_every, self.delay_tau)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def noise(self):
        if self.noise_kind == "none":
            return None
        try:
            return NoiseParams(self.omega, self.a, self.seed, self.noise_kind)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def seeker(self):
        return ContinuousSeeker(self.gains(), self.s_in, self.Dbar0, self.sbar0)

    def adaptive_dilution(self, sbar):
        return AdaptiveDilution(self.gains(), self.s_in, sbar, self.Dbar0)

    def settle_criterion(self):
        return SettleCriterion(self.settle_rho, self.settle_floor,
                               self.settle_max_windows)


_SECTIONS = {
    "experiment": {"scheme": str},
    "plant": {"s_in": float},
    "growth": {"kind": str, "mu_max": float, "K": float, "K_i": float},
    "gains": {"G1": float, "G2": float, "epsilon": float,
              "D_min": float, "D_max": float},
    "sim": {"dt": float, "t_end": float, "sample_every": int,
            "delay_tau": float},
    "noise": {"kind": str, "omega": float, "a": float, "seed": int},
    "ic": {"s0": float, "b0": float, "Dbar0": float, "sbar0": float},
    "discrete": {"v1": float, "v3": float, "tol": float, "h": float,
                 "t_inc_golden": float, "t_inc_newton": float,
                 "newton_iters": int, "settle_rho": float,
                 "settle_floor": float, "settle_max_windows": int},
    "output": {"dir": str},
}

# (section, key) -> dataclass field
_FIELD_OF = {
    ("experiment", "scheme"): "scheme",
    ("plant", "s_in"): "s_in",
    ("growth", "kind"): "growth_kind",
    ("growth", "mu_max"): "mu_max",
    ("growth", "K"): "K",
    ("growth", "K_i"): "K_i",
    ("gains", "G1"): "G1",
    ("gains", "G2"): "G2",
    ("gains", "epsilon"): "epsilon",
    ("gains", "D_min"): "D_min",
    ("gains", "D_max"): "D_max",
    ("sim", "dt"): "dt",
    ("sim", "t_end"): "t_end",
    ("sim", "sample_every"): "sample_every",
    ("sim", "delay_tau"): "delay_tau",
    ("noise", "kind"): "noise_kind",
    ("noise", "omega"): "omega",
    ("noise", "a"): "a",
    ("noise", "seed"): "seed",
    ("ic", "s0"): "s0",
    ("ic", "b0"): "b0",
    ("ic", "Dbar0"): "Dbar0",
    ("ic", "sbar0"): "sbar0",
    ("discrete", "v1"): "v1",
    ("discrete", "v3"): "v3",
    ("discrete", "tol"): "tol",
    ("discrete", "h"): "h",
    ("discrete", "t_inc_golden"): "t_inc_golden",
    ("discrete", "t_inc_newton"): "t_inc_newton",
    ("discrete", "newton_iters"): "newton_iters",
    ("discrete", "settle_rho"): "settle_rho",
    ("discrete", "settle_floor"): "settle_floor",
    ("discrete", "settle_max_windows"): "settle_max_windows",
    ("output", "dir"): "out_dir",
}


def parse(text):
    """Build a config from INI text; unknown sections/keys are errors."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    values = {}
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in cp.items(section):
            # configparser lowercases keys by default; match case-insensitively
            match = next((k for k in _SECTIONS[section] if k.lower() == key), None)
            if match is None:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            typ = _SECTIONS[section][match]
            try:
                values[_FIELD_OF[(section, match)]] = typ(raw)
            except ValueError as exc:
                raise ConfigError(
                    f"bad value for {section}.{match}: {raw!r}"
                ) from exc
    try:
        return ExperimentConfig(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load(path):
    with open(path) as fh:
        return parse(fh.read())


def emit(cfg):
    """Render a config back to INI text (parse(emit(c)) == c)."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    by_field = {f: (sec, key) for (sec, key), f in _FIELD_OF.items()}
    for f in fields(cfg):
        sec, key = by_field[f.name]
        if not cp.has_section(sec):
            cp.add_section(sec)
        cp.set(sec, key, repr(getattr(cfg, f.name)).strip("'"))
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
