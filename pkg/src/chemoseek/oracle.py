"""Ground-truth computations for tests and reporting only.

The controllers treat the growth kinetics as a black box; this module is
the one place allowed to inspect them. It computes closed-loop equilibria
of the act-and-wait feedback, the output-input characteristic psi = mu,
and the true production objective phi(s) = mu(s)*(s_in - s) with its
maximizer. No controller module imports this one (enforced by a test).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .controller import saturate

GOLDEN_FRAC = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class EquilibriumResult:
    """Closed-loop equilibrium under u = sat(vbar - G1*s)."""

    s_eq: float
    b_eq: float
    u_eq: float
    saturated: bool   # True when the equilibrium sits on a clamp or boundary


@lru_cache(maxsize=64)
def min_stabilizing_gain(growth, s_in, n_grid=10001):
    """Smallest G1 allowed by the stability condition: max of -mu'(s) on
    [0, s_in], evaluated with the analytic derivative on a fine grid."""
    s = np.linspace(0.0, s_in, n_grid)
    return float(max(-growth.mu_prime_raw(si) for si in s))


def equilibrium_solve(vbar, G1, params, D_min=0.0, D_max=1.0, tol=1e-12):
    """Solve mu(s) = sat(vbar - G1*s) for the unique equilibrium substrate.

    Under the gain condition G1 > max(-mu') the residual
    g(s) = mu(s) - sat(vbar - G1*s) is nondecreasing through its root, so
    bisection on [0, s_in] is reliable. If g has no sign change the loop
    has no interior equilibrium: the washout state (s_in, 0) is returned
    with the saturated flag set.
    """
    if vbar < 0:
        raise ValueError("vbar must be >= 0")
    g1_min = min_stabilizing_gain(params.growth, params.s_in)
    if G1 <= g1_min:
        raise ValueError(
            f"gain condition violated: G1={G1} <= max(-mu') = {g1_min:.6g}; "
            "equilibrium uniqueness is not guaranteed"
        )
    mu = params.growth.mu_raw

    def g(s):
        return mu(s) - saturate(vbar - G1 * s, D_min, D_max)

    lo, hi = 0.0, params.s_in
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0.0:
        s_eq = lo
    elif g_hi <= 0.0:
        # input exceeds growth everywhere up to the feed level: washout
        u_eq = saturate(vbar - G1 * params.s_in, D_min, D_max)
        return EquilibriumResult(params.s_in, 0.0, u_eq, True)
    else:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            g_mid = g(mid)
            if abs(g_mid) <= tol or hi - lo < 1e-16:
                break
            if g_mid < 0.0:
                lo = mid
            else:
                hi = mid
        s_eq = 0.5 * (lo + hi)

    raw = vbar - G1 * s_eq
    u_eq = saturate(raw, D_min, D_max)
    clamped = raw > D_max or raw < D_min
    on_boundary = s_eq == 0.0 or s_eq == params.s_in
    return EquilibriumResult(s_eq, params.s_in - s_eq, u_eq, clamped or on_boundary)


def psi(sbar, growth, s_in):
    """Output-input characteristic: the input holding the output at sbar.

    For the chemostat this is exactly the growth law, psi = mu, defined on
    the open interval (0, s_in).
    """
    if not 0.0 < sbar < s_in:
        raise ValueError(f"sbar must lie in (0, {s_in}), got {sbar}")
    return growth.mu_raw(sbar)


def phi(s, params):
    """True steady-state production objective mu(s)*(s_in - s)."""
    return params.growth.mu_raw(s) * (params.s_in - s)


def phi_opt(params, grid_points=10001, tol=1e-10):
    """Maximize phi on [0, s_in]: coarse grid scan to bracket the peak,
    then golden-section refinement to `tol`."""
    s = np.linspace(0.0, params.s_in, grid_points)
    vals = np.array([phi(si, params) for si in s])
    i = int(np.argmax(vals))
    lo = s[max(i - 1, 0)]
    hi = s[min(i + 1, grid_points - 1)]

    a, b = lo, hi
    c = a + (b - a) * GOLDEN_FRAC
    d = b - (b - a) * GOLDEN_FRAC
    fc, fd = phi(c, params), phi(d, params)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = a + (b - a) * GOLDEN_FRAC
            fc = phi(c, params)
        else:
            a, c, fc = c, d, fd
            d = b - (b - a) * GOLDEN_FRAC
            fd = phi(d, params)
    s_star = 0.5 * (a + b)
    return s_star, phi(s_star, params)
