"""Growth kinetics mu(s) as an evaluatable function family.

Controllers never see these objects: they are consumed by the simulation
engine (to integrate the plant) and by the oracle/tests. Three variants are
provided so tests can confirm that no controller branches on the model
identity: the substrate-inhibited Haldane law, the monotone Monod law, and
a piecewise-linear Tabulated model built from a grid.

Each variant exposes the analytic derivative so gain conditions can be
checked exactly. ``mu``/``mu_prime`` validate their argument; the ``*_raw``
twins skip the check because Runge-Kutta stage values may transiently dip
a hair below zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Haldane:
    """Substrate-inhibited kinetics mu_max*s / (K + s + s^2/K_i)."""

    mu_max: float
    K: float
    K_i: float

    def __post_init__(self):
        if not (self.mu_max > 0 and self.K > 0 and self.K_i > 0):
            raise ValueError("Haldane parameters must be positive")

    def mu_raw(self, s):
        return self.mu_max * s / (self.K + s + s * s / self.K_i)

    def mu_prime_raw(self, s):
        d = self.K + s + s * s / self.K_i
        return self.mu_max * (self.K - s * s / self.K_i) / (d * d)

    def mu(self, s):
        _check_domain(s)
        return self.mu_raw(s)

    def mu_prime(self, s):
        _check_domain(s)
        return self.mu_prime_raw(s)

    @property
    def s_peak(self):
        """Substrate level at which mu is maximal: sqrt(K*K_i)."""
        return float(np.sqrt(self.K * self.K_i))


@dataclass(frozen=True)
class Monod:
    """Monotone saturating kinetics mu_max*s / (K + s)."""

    mu_max: float
    K: float

    def __post_init__(self):
        if not (self.mu_max > 0 and self.K > 0):
            raise ValueError("Monod parameters must be positive")

    def mu_raw(self, s):
        return self.mu_max * s / (self.K + s)

    def mu_prime_raw(self, s):
        d = self.K + s
        return self.mu_max * self.K / (d * d)

    def mu(self, s):
        _check_domain(s)
        return self.mu_raw(s)

    def mu_prime(self, s):
        _check_domain(s)
        return self.mu_prime_raw(s)


class Tabulated:
    """Piecewise-linear kinetics interpolated from a (s, mu) grid.

    The grid must start at s=0 with mu=0 so every variant shares mu(0)=0.
    Outside the grid the first/last segment is extended linearly; the
    derivative is the slope of the active segment (right-continuous at
    the knots).
    """

    def __init__(self, s_grid, mu_grid):
        s = np.asarray(s_grid, dtype=float)
        m = np.asarray(mu_grid, dtype=float)
        if s.ndim != 1 or s.shape != m.shape or s.size < 2:
            raise ValueError("grid must be two 1-d arrays of equal length >= 2")
        if np.any(np.diff(s) <= 0):
            raise ValueError("s grid must be strictly increasing")
        if s[0] != 0.0 or m[0] != 0.0:
            raise ValueError("grid must start at (0, 0)")
        self.s_grid = s
        self.mu_grid = m

    def _segment(self, s):
        i = int(np.searchsorted(self.s_grid, s, side="right")) - 1
        return min(max(i, 0), self.s_grid.size - 2)

    def mu_raw(self, s):
        i = self._segment(s)
        slope = (self.mu_grid[i + 1] - self.mu_grid[i]) / (
            self.s_grid[i + 1] - self.s_grid[i]
        )
        return self.mu_grid[i] + slope * (s - self.s_grid[i])

    def mu_prime_raw(self, s):
        i = self._segment(s)
        return (self.mu_grid[i + 1] - self.mu_grid[i]) / (
            self.s_grid[i + 1] - self.s_grid[i]
        )

    def mu(self, s):
        _check_domain(s)
        return self.mu_raw(s)

    def mu_prime(self, s):
        _check_domain(s)
        return self.mu_prime_raw(s)


def _check_domain(s):
    if s < 0:
        raise ValueError(f"substrate concentration must be >= 0, got {s}")


def from_config(kind, params):
    """Build a growth model from the config-file representation."""
    kind = kind.lower()
    if kind == "haldane":
        return Haldane(params["mu_max"], params["K"], params["K_i"])
    if kind == "monod":
        return Monod(params["mu_max"], params["K"])
    raise ValueError(f"unknown growth kind {kind!r} (expected haldane or monod)")
