"""Pure-Python stepping kernels (fallback twin of the compiled extension).

Both kernels advance the chemostat with classical fixed-step RK4; the
continuous one co-integrates the seeker references (Dbar, sbar) and reads
their delayed values from a ring buffer frozen over each step
(method-of-steps). Arithmetic expressions are written in exactly the same
order as in the Cython kernel so the two backends agree to the last bit.

Growth-model code: (kind, p0, p1, p2, s_tab, mu_tab) with
  0 = Haldane(mu_max=p0, K=p1, K_i=p2)
  1 = Monod(mu_max=p0, K=p1)
  2 = piecewise-linear table on (s_tab, mu_tab)
Noise code: (kind, omega, a, seed) with 0 = none, 1 = square wave, 2 = bias.
Status: 0 = ok, 1 = non-finite state detected at t_bad.
"""

from __future__ import annotations

import math
from bisect import bisect_right

import numpy as np

from ..noise import _splitmix64

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TWO64 = 2.0**-64


def _make_mu(gcode):
    kind, p0, p1, p2, s_tab, mu_tab = gcode
    if kind == 0:

        def mu(s):
            return p0 * s / (p1 + s + s * s / p2)

    elif kind == 1:

        def mu(s):
            return p0 * s / (p1 + s)

    else:
        sg = [float(v) for v in s_tab]
        mg = [float(v) for v in mu_tab]
        top = len(sg) - 2

        def mu(s):
            i = bisect_right(sg, s) - 1
            if i < 0:
                i = 0
            elif i > top:
                i = top
            slope = (mg[i + 1] - mg[i]) / (sg[i + 1] - sg[i])
            return mg[i] + slope * (s - sg[i])

    return mu


def _make_q(ncode):
    kind, omega, a, seed = ncode
    if kind == 0:

        def q(t):
            return 0.0

    elif kind == 2:

        def q(t):
            return a

    else:
        seed = seed & _MASK64

        def q(t):
            k = int(math.floor(t * omega))
            u = _splitmix64((seed ^ (k * _GOLDEN)) & _MASK64) * _TWO64
            return a * (2.0 * u - 1.0)

    return q


def run_continuous(
    gcode, s_in, G1, G2, eps, Dmin, Dmax, s_lo, s_hi,
    s0, b0, D0, sb0, dt, n_steps, sample_every, delay_steps, ncode, t0=0.0,
):
    """Integrate the full continuous extremum-seeking loop.

    Returns (traj, final_state, status, t_bad) where traj has rows
    (t, s, b, y, u, Dbar, sbar, Fhat) sampled every `sample_every` steps
    and final_state = (s, b, Dbar, sbar).
    """
    mu = _make_mu(gcode)
    q = _make_q(ncode)
    h2 = 0.5 * dt
    h6 = dt / 6.0

    cap = delay_steps + 1
    hist_D = [D0] * cap
    hist_sb = [sb0] * cap

    n_rows = n_steps // sample_every + 1
    traj = np.empty((n_rows, 8))
    row = 0

    s, b, D, sb = s0, b0, D0, sb0
    status = 0
    t_bad = 0.0

    def stage(ts, ss, bs, Ds, sbs, Dt, sbt):
        y = ss * (1.0 + q(ts))
        xi = Ds - G1 * (y - sbs)
        u = Dmax if xi > Dmax else (Dmin if xi < Dmin else xi)
        m = mu(ss)
        ds = -m * bs + u * (s_in - ss)
        db = m * bs - u * bs
        dD = -G2 * (y - sbs) * (Ds - Dmin) * (Dmax - Ds)
        arg = (Ds * (s_in - sbs) - Dt * (s_in - sbt)) * (sbs - sbt)
        dsb = eps if arg >= 0.0 else -eps
        if (sbs >= s_hi and dsb > 0.0) or (sbs <= s_lo and dsb < 0.0):
            dsb = 0.0
        return ds, db, dD, dsb, y, u

    for k in range(n_steps):
        t = t0 + k * dt
        j = k - delay_steps if k >= delay_steps else 0
        Dt = hist_D[j % cap]
        sbt = hist_sb[j % cap]

        d1s, d1b, d1D, d1sb, y, u = stage(t, s, b, D, sb, Dt, sbt)
        if k % sample_every == 0:
            traj[row] = (t, s, b, y, u, D, sb, D * (s_in - sb))
            row += 1
        d2s, d2b, d2D, d2sb, _, _ = stage(
            t + h2, s + h2 * d1s, b + h2 * d1b, D + h2 * d1D, sb + h2 * d1sb, Dt, sbt
        )
        d3s, d3b, d3D, d3sb, _, _ = stage(
            t + h2, s + h2 * d2s, b + h2 * d2b, D + h2 * d2D, sb + h2 * d2sb, Dt, sbt
        )
        d4s, d4b, d4D, d4sb, _, _ = stage(
            t + dt, s + dt * d3s, b + dt * d3b, D + dt * d3D, sb + dt * d3sb, Dt, sbt
        )
        s = s + h6 * (d1s + 2.0 * d2s + 2.0 * d3s + d4s)
        b = b + h6 * (d1b + 2.0 * d2b + 2.0 * d3b + d4b)
        D = D + h6 * (d1D + 2.0 * d2D + 2.0 * d3D + d4D)
        sb = sb + h6 * (d1sb + 2.0 * d2sb + 2.0 * d3sb + d4sb)

        if not (math.isfinite(s) and math.isfinite(b) and math.isfinite(D) and math.isfinite(sb)):
            status = 1
            t_bad = t0 + (k + 1) * dt
            return traj[:row].copy(), (s, b, D, sb), status, t_bad

        hist_D[(k + 1) % cap] = D
        hist_sb[(k + 1) % cap] = sb

    if n_steps % sample_every == 0:
        t = t0 + n_steps * dt
        j = n_steps - delay_steps if n_steps >= delay_steps else 0
        _, _, _, _, y, u = stage(t, s, b, D, sb, hist_D[j % cap], hist_sb[j % cap])
        traj[row] = (t, s, b, y, u, D, sb, D * (s_in - sb))
        row += 1

    return traj[:row], (s, b, D, sb), status, t_bad


def run_single_param(
    gcode, s_in, G1, Dmin, Dmax, vbar, s0, b0, dt, n_steps, ncode, t0=0.0,
):
    """Integrate the plant under the frozen act-and-wait law u = sat(vbar - G1*y).

    Returns (s_arr, b_arr, y_arr, u_arr, final_state, status, t_bad); the
    arrays hold the value at the start of each of the n_steps steps.
    """
    mu = _make_mu(gcode)
    q = _make_q(ncode)
    h2 = 0.5 * dt
    h6 = dt / 6.0

    s_arr = np.empty(n_steps)
    b_arr = np.empty(n_steps)
    y_arr = np.empty(n_steps)
    u_arr = np.empty(n_steps)

    s, b = s0, b0
    status = 0
    t_bad = 0.0

    def stage(ts, ss, bs):
        y = ss * (1.0 + q(ts))
        xi = vbar - G1 * y
        u = Dmax if xi > Dmax else (Dmin if xi < Dmin else xi)
        m = mu(ss)
        ds = -m * bs + u * (s_in - ss)
        db = m * bs - u * bs
        return ds, db, y, u

    for k in range(n_steps):
        t = t0 + k * dt
        d1s, d1b, y, u = stage(t, s, b)
        s_arr[k] = s
        b_arr[k] = b
        y_arr[k] = y
        u_arr[k] = u
        d2s, d2b, _, _ = stage(t + h2, s + h2 * d1s, b + h2 * d1b)
        d3s, d3b, _, _ = stage(t + h2, s + h2 * d2s, b + h2 * d2b)
        d4s, d4b, _, _ = stage(t + dt, s + dt * d3s, b + dt * d3b)
        s = s + h6 * (d1s + 2.0 * d2s + 2.0 * d3s + d4s)
        b = b + h6 * (d1b + 2.0 * d2b + 2.0 * d3b + d4b)
        if not (math.isfinite(s) and math.isfinite(b)):
            status = 1
            t_bad = t0 + (k + 1) * dt
            return (
                s_arr[: k + 1].copy(), b_arr[: k + 1].copy(),
                y_arr[: k + 1].copy(), u_arr[: k + 1].copy(),
                (s, b), status, t_bad,
            )

    return s_arr, b_arr, y_arr, u_arr, (s, b), status, t_bad
