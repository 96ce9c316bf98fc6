"""Output-feedback laws that see only the measured substrate.

This module deliberately imports nothing from the plant, growth or oracle
modules: every law is a function of the measurement y and the controller's
own references. Three layers make up the continuous-time extremum seeker:

  u       = sat(Dbar - G1*(y - sbar))                    saturated proportional
  dDbar   = -G2*(y - sbar)*(Dbar - D_min)*(D_max - Dbar)  reference adaptation
  dsbar   = eps * sgn[(Fhat - Fhat_tau)*(sbar - sbar_tau)] delayed-sign continuation

where Fhat = Dbar*(s_in - sbar) is the quasi-steady estimate of the
production objective and the `_tau` values are the references one delay
ago. The discrete scheme reuses only the first layer with the references
collapsed into a single parameter vbar = Dbar + G1*sbar.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class FeedbackGains:
    """Gains and input bounds of the continuous scheme."""

    G1: float = 1.0
    G2: float = 1.0
    epsilon: float = 1e-3
    D_min: float = 0.0
    D_max: float = 1.0

    def __post_init__(self):
        if self.G1 <= 0 or self.G2 <= 0:
            raise ValueError("gains G1, G2 must be > 0")
        if not 0 < self.epsilon < 1:
            raise ValueError("timescale ratio epsilon must be in (0, 1)")
        if not 0 <= self.D_min < self.D_max:
            raise ValueError("need 0 <= D_min < D_max")


def saturate(xi, D_min, D_max):
    """Clamp the raw dilution command to the admissible range."""
    if D_min > D_max:
        raise ValueError("saturation bounds must satisfy D_min <= D_max")
    if xi > D_max:
        return D_max
    if xi < D_min:
        return D_min
    return xi


def control_u(y, Dbar, sbar, gains):
    """Saturated proportional law u = sat(Dbar - G1*(y - sbar)).

    Non-invasive: feeding back y = sbar returns exactly Dbar whenever
    Dbar lies inside the saturation bounds.
    """
    return saturate(Dbar - gains.G1 * (y - sbar), gains.D_min, gains.D_max)


def dbar_rhs(y, Dbar, sbar, gains):
    """Adaptation of the reference dilution; [D_min, D_max] is invariant
    because both boundary values are roots of the product."""
    return -gains.G2 * (y - sbar) * (Dbar - gains.D_min) * (gains.D_max - Dbar)


def sbar_rhs(Dbar, sbar, Dbar_tau, sbar_tau, s_in, gains, s_lo=None, s_hi=None):
    """Delayed-sign continuation of the reference substrate.

    Compares the current quasi-steady objective estimate with its value one
    delay ago and keeps moving sbar in the direction that improved it.
    sgn(0) is taken as +1 so the adaptation never stalls on an exact tie.
    The result is zeroed at the confinement bounds so sbar cannot leave
    [s_lo, s_hi] (defaults: 1% and 99% of s_in).
    """
    if s_lo is None:
        s_lo = 0.01 * s_in
    if s_hi is None:
        s_hi = 0.99 * s_in
    fhat = Dbar * (s_in - sbar)
    fhat_tau = Dbar_tau * (s_in - sbar_tau)
    arg = (fhat - fhat_tau) * (sbar - sbar_tau)
    d = gains.epsilon if arg >= 0.0 else -gains.epsilon
    if (sbar >= s_hi and d > 0.0) or (sbar <= s_lo and d < 0.0):
        return 0.0
    return d


def quasi_objective(Dbar, sbar, s_in):
    """Production estimate Dbar*(s_in - sbar), exact at quasi-steady state."""
    return Dbar * (s_in - sbar)


class ContinuousSeeker:
    """Engine hook bundling the three continuous-scheme layers.

    Internal state is (Dbar, sbar); the engine integrates it alongside the
    plant and supplies the delayed pair from its history buffer.
    """

    def __init__(self, gains, s_in, Dbar0=0.5, sbar0=None, s_lo=None, s_hi=None):
        self.gains = gains
        self.s_in = s_in
        self.s_lo = 0.01 * s_in if s_lo is None else s_lo
        self.s_hi = 0.99 * s_in if s_hi is None else s_hi
        sbar0 = 0.5 * s_in if sbar0 is None else sbar0
        self.state0 = (Dbar0, sbar0)

    def control(self, t, y, c):
        return control_u(y, c[0], c[1], self.gains)

    def rhs(self, t, y, c, delayed):
        dD = dbar_rhs(y, c[0], c[1], self.gains)
        dsb = sbar_rhs(
            c[0], c[1], delayed[0], delayed[1], self.s_in, self.gains,
            self.s_lo, self.s_hi,
        )
        return (dD, dsb)

    def trace(self, t, y, c):
        return (c[0], c[1], quasi_objective(c[0], c[1], self.s_in))


class AdaptiveDilution:
    """Fast layers only: proportional law plus Dbar adaptation with the
    reference substrate held fixed (the loop whose limit is mu(sbar))."""

    def __init__(self, gains, s_in, sbar, Dbar0=0.5):
        self.gains = gains
        self.s_in = s_in
        self.sbar = sbar
        self.state0 = (Dbar0,)

    def control(self, t, y, c):
        return control_u(y, c[0], self.sbar, self.gains)

    def rhs(self, t, y, c, delayed):
        return (dbar_rhs(y, c[0], self.sbar, self.gains),)

    def trace(self, t, y, c):
        return (c[0], self.sbar, quasi_objective(c[0], self.sbar, self.s_in))


class SingleParamController:
    """Act-and-wait feedback u = sat(vbar - G1*y) with frozen vbar.

    The trajectory trace reports vbar in the Dbar column; the sbar column
    is not meaningful for this law and records NaN.
    """

    def __init__(self, vbar, G1, D_min, D_max, s_in):
        self.vbar = vbar
        self.G1 = G1
        self.D_min = D_min
        self.D_max = D_max
        self.s_in = s_in
        self.state0 = ()

    def control(self, t, y, c):
        return saturate(self.vbar - self.G1 * y, self.D_min, self.D_max)

    def rhs(self, t, y, c, delayed):
        return ()

    def trace(self, t, y, c):
        u = self.control(t, y, c)
        return (self.vbar, float("nan"), u * (self.s_in - y))


class ConstantController:
    """Open-loop hook u(t) = const, for plant-level tests."""

    def __init__(self, u):
        self.u = u
        self.state0 = ()

    def control(self, t, y, c):
        return self.u

    def rhs(self, t, y, c, delayed):
        return ()

    def trace(self, t, y, c):
        return (float("nan"), float("nan"), float("nan"))
