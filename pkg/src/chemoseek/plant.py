"""Chemostat state equations and the measured output.

State is (s, b): substrate and biomass concentration, with yield taken as
one. The dilution rate u is the manipulated input:

    ds/dt = -mu(s)*b + u*(s_in - s)
    db/dt =  mu(s)*b - u*b

The only measurement is the substrate, optionally corrupted by the
multiplicative square-wave disturbance: y = s*(1 + q(t)).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import noise as noise_mod


@dataclass(frozen=True)
class PlantParams:
    """Feed concentration and the (unknown-to-controllers) growth model."""

    s_in: float
    growth: object

    def __post_init__(self):
        if not self.s_in > 0:
            raise ValueError("feed concentration s_in must be > 0")


@dataclass
class PlantState:
    s: float
    b: float


def plant_rhs(state, u, params):
    """Time derivative (ds/dt, db/dt) of the chemostat at the given input."""
    mu_s = params.growth.mu_raw(state.s)
    ds = -mu_s * state.b + u * (params.s_in - state.s)
    db = mu_s * state.b - u * state.b
    return ds, db


def measure(state, t, noise=None):
    """Measured output y = s*(1 + q(t)); exactly s when noise is absent."""
    return state.s * (1.0 + noise_mod.square_wave(noise, t))
