"""Discrete-time extremum seeking: golden-section bracketing plus a
parabola-interpolation Newton step over the settled objective F(vbar).

Everything here is plain derivative-free optimization over an evaluate
callable; the plant is reached only through a harness object exposing
`settle_at(vbar, window) -> (s_ss, u_ss, ...)` window means and the known
feed concentration `s_in`. The objective of one act-and-wait episode is

    F(vbar) = u_ss * (s_in - s_ss)

which at equilibrium equals the production rate. This module must not
import the plant, growth or oracle modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

GOLDEN_FRAC = (3.0 - math.sqrt(5.0)) / 2.0   # interior-point fraction
SHRINK = (math.sqrt(5.0) - 1.0) / 2.0        # per-step bracket width ratio


@dataclass(frozen=True)
class EvalRecord:
    """One act-and-wait evaluation of F (a 'full circle' in the plots)."""

    phase: str        # golden | newton | final
    vbar: float
    F: float
    t_start: float
    t_end: float
    windows: int
    s_ss: float = float("nan")
    u_ss: float = float("nan")


@dataclass
class GoldenState:
    """Bracketing triple v1 < v2 < v3 with objective values."""

    v1: float
    v2: float
    v3: float
    F1: float
    F2: float
    F3: float

    @property
    def width(self):
        return self.v3 - self.v1


@dataclass(frozen=True)
class NewtonState:
    """Center point and finite-difference step of one Newton iteration."""

    vbar: float
    h: float

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("finite-difference step h must be > 0")


@dataclass(frozen=True)
class NewtonResult:
    vbar_new: float
    concave: bool     # False means the parabola had no interior maximum
    F_minus: float
    F_center: float
    F_plus: float


@dataclass(frozen=True)
class OptimizeSchedule:
    """Stopping tolerance and the act-and-wait accuracy schedule."""

    tol: float = 0.2
    newton_h: float = 0.05
    window_golden: float = 25.0
    window_newton: float = 100.0
    newton_iters: int = 1
    final_settle: bool = True

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("golden tolerance must be > 0")


@dataclass
class OptimizeResult:
    vbar_star: float
    F_star: float
    log: list = field(default_factory=list)
    newton_concave: list = field(default_factory=list)
    golden_state: GoldenState = None
    trajectory: object = None

    def evals(self, phase):
        return [r for r in self.log if r.phase == phase]


def admissible_vbar_range(G1, D_min, D_max, s_in, s_min=None):
    """Range of vbar for which the line Dbar + G1*sbar = vbar meets the
    admissible reference box [s_min, s_in) x [D_min, D_max]."""
    if s_min is None:
        s_min = 0.01 * s_in
    return D_min + G1 * s_min, D_max + G1 * s_in


def check_bracket(v1, v3, G1, D_min, D_max, s_in, s_min=None):
    if not v1 < v3:
        raise ValueError(f"invalid bracket: need v1 < v3, got [{v1}, {v3}]")
    lo, hi = admissible_vbar_range(G1, D_min, D_max, s_in, s_min)
    if v1 < lo or v3 >= hi:
        raise ValueError(
            f"bracket [{v1}, {v3}] leaves the admissible range [{lo}, {hi})"
        )


def eval_F(vbar, harness, window=25.0):
    """One act-and-wait objective evaluation from settled window means."""
    res = harness.settle_at(vbar, window)
    return res.u_ss * (harness.s_in - res.s_ss)


def golden_init(v1, v3, evaluate):
    """Initial triple with v2 at the golden interior point (3 evaluations)."""
    if not v1 < v3:
        raise ValueError(f"invalid bracket: need v1 < v3, got [{v1}, {v3}]")
    v2 = v1 + (v3 - v1) * GOLDEN_FRAC
    return GoldenState(v1, v2, v3, evaluate(v1), evaluate(v2), evaluate(v3))


def golden_step(state, evaluate):
    """Probe the golden point of the larger sub-interval (1 evaluation).

    The bracket width shrinks by exactly (sqrt(5)-1)/2 regardless of the
    objective values; with a unimodal objective the interior point keeps
    the largest value of the triple.
    """
    v1, v2, v3 = state.v1, state.v2, state.v3
    F1, F2, F3 = state.F1, state.F2, state.F3
    v4 = v1 + v3 - v2
    F4 = evaluate(v4)
    if v4 >= v2:
        if F4 > F2:
            return GoldenState(v2, v4, v3, F2, F4, F3)
        return GoldenState(v1, v2, v4, F1, F2, F4)
    if F4 > F2:
        return GoldenState(v1, v4, v2, F1, F4, F2)
    return GoldenState(v4, v2, v3, F4, F2, F3)


def golden_eval_count(width, tol):
    """Total evaluations used by the golden phase (3 init + steps)."""
    if tol > width:
        return 3
    return 3 + max(0, math.ceil(math.log(tol / width) / math.log(SHRINK)))


def newton_step(state, evaluate):
    """Fit a parabola through (v-h, v, v+h) and jump to its maximum.

    If the second difference is non-negative the parabola has no interior
    maximum; the center is returned unchanged with concave=False rather
    than dividing by ~0.
    """
    v, h = state.vbar, state.h
    F_minus = evaluate(v - h)
    F_center = evaluate(v)
    F_plus = evaluate(v + h)
    denom = F_plus - 2.0 * F_center + F_minus
    if denom >= 0.0:
        return NewtonResult(v, False, F_minus, F_center, F_plus)
    v_new = v - h * (F_plus - F_minus) / (2.0 * denom)
    return NewtonResult(v_new, True, F_minus, F_center, F_plus)


def optimize(harness, v1, v3, schedule=None, s_min=None):
    """Golden-section phase to `tol`, then Newton step(s), on one plant.

    Returns the final parameter, its objective, the evaluation log and
    (when the harness records one) the concatenated trajectory. With
    `final_settle` the plant is driven to the final parameter in a last
    logged episode, so the reported F is a measured value.
    """
    sched = schedule or OptimizeSchedule()
    check_bracket(v1, v3, harness.G1, harness.D_min, harness.D_max,
                  harness.s_in, s_min)
    log = []

    def make_eval(phase, window):
        def evaluate(vbar):
            res = harness.settle_at(vbar, window)
            F = res.u_ss * (harness.s_in - res.s_ss)
            log.append(EvalRecord(phase, vbar, F, res.t_start, res.t_end,
                                  res.windows, res.s_ss, res.u_ss))
            return F

        return evaluate

    ev_golden = make_eval("golden", sched.window_golden)
    state = golden_init(v1, v3, ev_golden)
    while state.width >= sched.tol:
        state = golden_step(state, ev_golden)

    ev_newton = make_eval("newton", sched.window_newton)
    vbar = state.v2
    concave = []
    for _ in range(sched.newton_iters):
        res = newton_step(NewtonState(vbar, sched.newton_h), ev_newton)
        concave.append(res.concave)
        vbar = res.vbar_new

    if sched.final_settle:
        F_star = make_eval("final", sched.window_newton)(vbar)
    else:
        F_star = max(r.F for r in log)

    traj = harness.trajectory() if hasattr(harness, "trajectory") else None
    return OptimizeResult(
        vbar_star=vbar,
        F_star=F_star,
        log=log,
        newton_concave=concave,
        golden_state=state,
        trajectory=traj,
    )
