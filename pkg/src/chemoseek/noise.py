"""Multiplicative measurement disturbance: a seeded random square wave.

The disturbed output is y(t) = s(t)*(1 + q(t)) where q holds a constant
value on each interval [k/omega, (k+1)/omega). The per-interval value is
drawn uniformly from [-a, a] by a counter-based generator (SplitMix64 on
the pair (seed, k)), so a query at any time is history-free: the same
(seed, interval) always yields the same value regardless of query order.
This keeps variable-step sampling and window-restarted simulations
reproducible.

The paper's noise process and the biomass state share a symbol; here the
disturbance is called q throughout to avoid the clash.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

KINDS = ("square", "zero", "bias")


@dataclass(frozen=True)
class NoiseParams:
    """Square-signal disturbance: hold-rate omega, amplitude a, seed."""

    omega: float = 0.2
    a: float = 0.05
    seed: int = 0
    kind: str = "square"

    def __post_init__(self):
        if self.a < 0 and self.kind != "bias":
            raise ValueError("noise amplitude a must be >= 0")
        if self.omega <= 0:
            raise ValueError("noise hold-rate omega must be > 0")
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}, expected one of {KINDS}")


def zero_noise():
    """Disturbance that is identically zero (q(t) = 0)."""
    return NoiseParams(omega=0.2, a=0.0, seed=0, kind="zero")


def constant_bias(a):
    """Constant disturbance q(t) = a (either sign), for bias tests."""
    return NoiseParams(omega=0.2, a=a, seed=0, kind="bias")


def _splitmix64(x):
    """SplitMix64 finalizer; bit-identical to the compiled kernel."""
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def hold_value(noise, k):
    """The disturbance value on hold interval k (counter-based draw)."""
    if noise.kind == "zero":
        return 0.0
    if noise.kind == "bias":
        return noise.a
    u = _splitmix64(((noise.seed & _MASK64) ^ (k * _GOLDEN)) & _MASK64)
    return noise.a * (2.0 * (u * 2.0**-64) - 1.0)


def square_wave(noise, t):
    """Evaluate q(t): constant on each interval [k/omega, (k+1)/omega)."""
    if noise is None or noise.a == 0.0:
        return 0.0
    if noise.kind == "bias":
        return noise.a
    return hold_value(noise, int(math.floor(t * noise.omega)))


def kernel_code(noise):
    """(kind, omega, a, seed) encoding consumed by the stepping kernels."""
    if noise is None or noise.a == 0.0 or noise.kind == "zero":
        return 0, 0.2, 0.0, 0
    if noise.kind == "bias":
        return 2, noise.omega, noise.a, 0
    return 1, noise.omega, noise.a, noise.seed & _MASK64
