"""Deterministic fixed-step integration of the closed-loop chemostat.

The engine advances plant and controller states together with classical
RK4 and handles the delayed reference terms by the method of steps: the
delayed pair is read from a ring buffer at the start of each step and
frozen across the four stages. Two controller shapes have compiled fast
paths (the continuous seeker and the frozen act-and-wait law); any other
hook object runs through the generic pure-Python loop with identical
semantics.

Also hosts the act-and-wait machinery: `settle` runs the plant under a
frozen parameter until the per-window standard deviation of the output
stops decreasing, and `ActAndWaitHarness` chains such episodes into one
continuing experiment, exposing only (y, u) window means to the optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import growth as growth_mod
from . import noise as noise_mod
from . import _backend as backend
from .controller import (
    AdaptiveDilution,
    ContinuousSeeker,
    SingleParamController,
    saturate,
)
from .plant import PlantState

TRAJECTORY_COLUMNS = ("t", "s", "b", "y", "u", "Dbar", "sbar", "Fhat")

_EMPTY = np.empty(0)


class NumericalAbort(RuntimeError):
    """A state became non-finite; `t_bad` is the first bad time."""

    def __init__(self, t_bad, partial=None):
        super().__init__(f"non-finite state detected at t={t_bad:g}")
        self.t_bad = t_bad
        self.partial = partial


class SettleTimeout(RuntimeError):
    """Transients did not settle within the allowed number of windows."""

    def __init__(self, vbar, windows, last_std, last_mean):
        super().__init__(
            f"settle timed out after {windows} windows at vbar={vbar:g} "
            f"(last window: std={last_std:.3e}, mean={last_mean:.6g})"
        )
        self.vbar = vbar
        self.windows = windows
        self.last_std = last_std
        self.last_mean = last_mean


@dataclass(frozen=True)
class SimConfig:
    """Step size, horizon, recording decimation and reference delay."""

    dt: float = 1e-2
    t_end: float = 5000.0
    sample_every: int = 10
    delay_tau: float = 5.0

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be > 0")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if self.delay_tau < 0:
            raise ValueError("delay_tau must be >= 0")
        ratio = self.delay_tau / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError("delay_tau must be an integer multiple of dt")

    @property
    def n_steps(self):
        return int(math.floor(self.t_end / self.dt + 1e-9))

    @property
    def delay_steps(self):
        return int(round(self.delay_tau / self.dt))


class HistoryBuffer:
    """Ring buffer over past controller states for the delayed terms.

    `delayed()` returns the state stored exactly `delay_steps` pushes
    earlier; before that many pushes have happened it returns the initial
    state.
    """

    def __init__(self, initial, delay_steps):
        self.delay_steps = delay_steps
        self.capacity = delay_steps + 1
        self._buf = [initial] * self.capacity
        self._k = 0

    def push(self, value):
        self._k += 1
        self._buf[self._k % self.capacity] = value

    def delayed(self):
        j = self._k - self.delay_steps if self._k >= self.delay_steps else 0
        return self._buf[j % self.capacity]


class Trajectory:
    """Time-indexed record of (t, s, b, y, u, Dbar, sbar, Fhat) samples."""

    def __init__(self, data):
        data = np.asarray(data, dtype=float)
        if data.size == 0:
            data = np.empty((0, len(TRAJECTORY_COLUMNS)))
        if data.ndim != 2 or data.shape[1] != len(TRAJECTORY_COLUMNS):
            raise ValueError("trajectory data must be an (n, 8) array")
        self.data = data

    def __len__(self):
        return self.data.shape[0]

    def column(self, name):
        return self.data[:, TRAJECTORY_COLUMNS.index(name)]

    t = property(lambda self: self.column("t"))
    s = property(lambda self: self.column("s"))
    b = property(lambda self: self.column("b"))
    y = property(lambda self: self.column("y"))
    u = property(lambda self: self.column("u"))
    Dbar = property(lambda self: self.column("Dbar"))
    sbar = property(lambda self: self.column("sbar"))
    Fhat = property(lambda self: self.column("Fhat"))

    def to_csv(self, path):
        np.savetxt(
            path,
            self.data,
            fmt="%.17g",
            delimiter=",",
            header=",".join(TRAJECTORY_COLUMNS),
            comments="",
        )

    @classmethod
    def from_csv(cls, path):
        with open(path) as fh:
            header = fh.readline().strip()
            if tuple(header.split(",")) != TRAJECTORY_COLUMNS:
                raise ValueError(f"unexpected trajectory header: {header!r}")
            body = fh.read()
        if not body.strip():
            return cls(np.empty((0, len(TRAJECTORY_COLUMNS))))
        data = np.loadtxt(body.splitlines(), delimiter=",", ndmin=2)
        return cls(data)


def encode_growth(model):
    """Kernel encoding of a growth model, or None if unsupported."""
    if isinstance(model, growth_mod.Haldane):
        return (0, model.mu_max, model.K, model.K_i, _EMPTY, _EMPTY)
    if isinstance(model, growth_mod.Monod):
        return (1, model.mu_max, model.K, 0.0, _EMPTY, _EMPTY)
    if isinstance(model, growth_mod.Tabulated):
        return (2, 0.0, 0.0, 0.0, model.s_grid, model.mu_grid)
    return None


def integrate(params, ic, controller, cfg, noise=None, t0=0.0):
    """Simulate the closed loop and return the recorded Trajectory.

    Dispatches to the compiled kernel when the controller is one of the
    two known laws and the growth model has a kernel encoding; otherwise
    runs the generic hook loop. Raises NumericalAbort on NaN/inf.
    """
    gcode = encode_growth(params.growth)
    ncode = noise_mod.kernel_code(noise)

    if gcode is not None and isinstance(controller, ContinuousSeeker) \
            and controller.s_in == params.s_in:
        g = controller.gains
        traj, final, status, t_bad = backend.run_continuous(
            gcode, params.s_in, g.G1, g.G2, g.epsilon, g.D_min, g.D_max,
            controller.s_lo, controller.s_hi,
            ic.s, ic.b, controller.state0[0], controller.state0[1],
            cfg.dt, cfg.n_steps, cfg.sample_every, cfg.delay_steps, ncode, t0,
        )
        if status:
            raise NumericalAbort(t_bad, Trajectory(traj))
        return Trajectory(traj)

    if gcode is not None and isinstance(controller, AdaptiveDilution) \
            and controller.s_in == params.s_in:
        g = controller.gains
        traj, final, status, t_bad = backend.run_continuous(
            gcode, params.s_in, g.G1, g.G2, 0.0, g.D_min, g.D_max,
            0.0, params.s_in,
            ic.s, ic.b, controller.state0[0], controller.sbar,
            cfg.dt, cfg.n_steps, cfg.sample_every, 0, ncode, t0,
        )
        if status:
            raise NumericalAbort(t_bad, Trajectory(traj))
        return Trajectory(traj)

    if gcode is not None and isinstance(controller, SingleParamController) \
            and controller.s_in == params.s_in:
        c = controller
        s_arr, b_arr, y_arr, u_arr, final, status, t_bad = backend.run_single_param(
            gcode, params.s_in, c.G1, c.D_min, c.D_max, c.vbar,
            ic.s, ic.b, cfg.dt, cfg.n_steps, ncode, t0,
        )
        rows = _single_param_rows(
            c, s_arr, b_arr, y_arr, u_arr, final, cfg, noise, t0,
            include_final=not status,
        )
        if status:
            raise NumericalAbort(t_bad, Trajectory(rows))
        return Trajectory(rows)

    return _integrate_hook(params, ic, controller, cfg, noise, t0)


def _single_param_rows(c, s_arr, b_arr, y_arr, u_arr, final, cfg, noise, t0,
                       include_final):
    nan = float("nan")
    se = cfg.sample_every
    idx = np.arange(0, s_arr.size, se)
    n_final = 1 if include_final and cfg.n_steps % se == 0 else 0
    rows = np.empty((idx.size + n_final, 8))
    rows[: idx.size, 0] = t0 + idx * cfg.dt
    rows[: idx.size, 1] = s_arr[idx]
    rows[: idx.size, 2] = b_arr[idx]
    rows[: idx.size, 3] = y_arr[idx]
    rows[: idx.size, 4] = u_arr[idx]
    rows[: idx.size, 5] = c.vbar
    rows[: idx.size, 6] = nan
    rows[: idx.size, 7] = u_arr[idx] * (c.s_in - y_arr[idx])
    if n_final:
        t = t0 + cfg.n_steps * cfg.dt
        s, b = final
        y = s * (1.0 + noise_mod.square_wave(noise, t))
        u = saturate(c.vbar - c.G1 * y, c.D_min, c.D_max)
        rows[-1] = (t, s, b, y, u, c.vbar, nan, u * (c.s_in - y))
    return rows


def _integrate_hook(params, ic, hook, cfg, noise, t0):
    """Generic RK4 loop over an arbitrary controller hook."""
    mu = params.growth.mu_raw
    s_in = params.s_in
    dt = cfg.dt
    h2 = 0.5 * dt
    h6 = dt / 6.0
    n_steps = cfg.n_steps
    se = cfg.sample_every

    c = tuple(hook.state0)
    hist = HistoryBuffer(c, cfg.delay_steps)
    s, b = ic.s, ic.b
    rows = []

    def stage(ts, ss, bs, cs, delayed):
        y = ss * (1.0 + noise_mod.square_wave(noise, ts))
        u = hook.control(ts, y, cs)
        m = mu(ss)
        ds = -m * bs + u * (s_in - ss)
        db = m * bs - u * bs
        dc = hook.rhs(ts, y, cs, delayed)
        return ds, db, dc, y, u

    for k in range(n_steps):
        t = t0 + k * dt
        delayed = hist.delayed()

        d1s, d1b, d1c, y, u = stage(t, s, b, c, delayed)
        if k % se == 0:
            rows.append((t, s, b, y, u) + tuple(hook.trace(t, y, c)))
        c1 = tuple(ci + h2 * di for ci, di in zip(c, d1c))
        d2s, d2b, d2c, _, _ = stage(t + h2, s + h2 * d1s, b + h2 * d1b, c1, delayed)
        c2 = tuple(ci + h2 * di for ci, di in zip(c, d2c))
        d3s, d3b, d3c, _, _ = stage(t + h2, s + h2 * d2s, b + h2 * d2b, c2, delayed)
        c3 = tuple(ci + dt * di for ci, di in zip(c, d3c))
        d4s, d4b, d4c, _, _ = stage(t + dt, s + dt * d3s, b + dt * d3b, c3, delayed)

        s = s + h6 * (d1s + 2.0 * d2s + 2.0 * d3s + d4s)
        b = b + h6 * (d1b + 2.0 * d2b + 2.0 * d3b + d4b)
        c = tuple(
            ci + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            for ci, k1, k2, k3, k4 in zip(c, d1c, d2c, d3c, d4c)
        )

        if not all(map(math.isfinite, (s, b, *c))):
            raise NumericalAbort(t0 + (k + 1) * dt, Trajectory(np.array(rows)))
        hist.push(c)

    if n_steps % se == 0:
        t = t0 + n_steps * dt
        _, _, _, y, u = stage(t, s, b, c, hist.delayed())
        rows.append((t, s, b, y, u) + tuple(hook.trace(t, y, c)))

    return Trajectory(np.array(rows))


@dataclass(frozen=True)
class SettleCriterion:
    """Settled when the per-window output deviation stops decreasing
    (current >= rho * previous) or drops below an absolute floor."""

    rho: float = 0.9
    floor: float = 1e-6
    max_windows: int = 40


@dataclass
class SettleResult:
    s_ss: float          # mean measured output over the final window
    u_ss: float          # mean input over the final window
    t_start: float
    t_end: float
    windows: int
    state: tuple         # plant state (s, b) at the end of the final window

    @property
    def t_used(self):
        return self.t_end - self.t_start


def settle(params, ic, vbar, G1, D_min=0.0, D_max=1.0, window=25.0, dt=1e-2,
           noise=None, criterion=None, t0=0.0, on_window=None):
    """Act-and-wait: run u = sat(vbar - G1*y) until transients settle.

    Simulates in windows of length `window`; a minimum of two windows is
    always used because the first one has no deviation to compare against.
    Returns the window means of output and input. Raises SettleTimeout
    after `criterion.max_windows` windows.
    """
    crit = criterion or SettleCriterion()
    gcode = encode_growth(params.growth)
    if gcode is None:
        raise ValueError("settle requires a kernel-encodable growth model")
    ncode = noise_mod.kernel_code(noise)
    n = int(round(window / dt))
    s, b = ic.s, ic.b
    prev_std = None
    std = mean_y = 0.0
    for w in range(crit.max_windows):
        t_w = t0 + w * window
        s_arr, b_arr, y_arr, u_arr, final, status, t_bad = backend.run_single_param(
            gcode, params.s_in, G1, D_min, D_max, vbar, s, b, dt, n, ncode, t_w,
        )
        if status:
            raise NumericalAbort(t_bad)
        if on_window is not None:
            on_window(s_arr, b_arr, y_arr, u_arr, t_w)
        s, b = final
        std = float(y_arr.std())
        mean_y = float(y_arr.mean())
        if prev_std is not None and (std >= crit.rho * prev_std or std <= crit.floor):
            return SettleResult(
                s_ss=mean_y,
                u_ss=float(u_arr.mean()),
                t_start=t0,
                t_end=t0 + (w + 1) * window,
                windows=w + 1,
                state=final,
            )
        prev_std = std
    raise SettleTimeout(vbar, crit.max_windows, std, mean_y)


class ActAndWaitHarness:
    """Sequential act-and-wait experiment on one continuing plant.

    Each `settle_at` episode resumes the plant from where the previous one
    left it, mirroring a physical reactor. Only window means of (y, u)
    leave this object; the optimizer on the other side never sees the
    plant state or the growth model. Per-step samples are folded into one
    concatenated trajectory for later analysis.
    """

    def __init__(self, params, ic, G1, D_min=0.0, D_max=1.0, dt=1e-2,
                 noise=None, criterion=None, sample_every=10, record=True):
        self.params = params
        self.G1 = G1
        self.D_min = D_min
        self.D_max = D_max
        self.dt = dt
        self.noise = noise
        self.criterion = criterion or SettleCriterion()
        self.sample_every = sample_every
        self.record = record
        self.state = (ic.s, ic.b)
        self.t = 0.0
        self._k0 = 0
        self._rows = []
        self._last_vbar = None

    @property
    def s_in(self):
        return self.params.s_in

    def settle_at(self, vbar, window):
        """Freeze vbar, wait for settling, return the SettleResult."""
        self._last_vbar = vbar

        def on_window(s_arr, b_arr, y_arr, u_arr, t_w):
            if not self.record:
                self._k0 += s_arr.size
                return
            se = self.sample_every
            k0 = self._k0
            first = (-k0) % se
            idx = np.arange(first, s_arr.size, se)
            f_col = u_arr[idx] * (self.params.s_in - y_arr[idx])
            for i, fi in zip(idx, f_col):
                self._rows.append(
                    (t_w + i * self.dt, s_arr[i], b_arr[i], y_arr[i],
                     u_arr[i], vbar, float("nan"), fi)
                )
            self._k0 = k0 + s_arr.size

        res = settle(
            self.params, PlantState(*self.state), vbar, self.G1,
            self.D_min, self.D_max, window, self.dt, self.noise,
            self.criterion, t0=self.t, on_window=on_window,
        )
        self.state = res.state
        self.t = res.t_end
        return res

    def trajectory(self):
        """Concatenated trajectory over all episodes run so far."""
        rows = list(self._rows)
        if self.record and self._k0 % self.sample_every == 0 and self._last_vbar is not None:
            s, b = self.state
            y = s * (1.0 + noise_mod.square_wave(self.noise, self.t))
            u = saturate(self._last_vbar - self.G1 * y, self.D_min, self.D_max)
            rows.append(
                (self.t, s, b, y, u, self._last_vbar, float("nan"),
                 u * (self.params.s_in - y))
            )
        return Trajectory(np.array(rows) if rows else np.empty((0, 8)))
