"""Extremum-seeking control of the chemostat with substrate-only output.

Two schemes drive the reactor to the steady state maximizing the
production rate u*(s_in - s) without knowing the growth law: a
continuous-time slow-fast continuation with a delayed-sign update of the
reference substrate, and a discrete-time act-and-wait loop combining
golden-section search with a Newton parabola step.
"""

from ._backend import HAVE_COMPILED, backend_name
from .controller import (
    AdaptiveDilution,
    ConstantController,
    ContinuousSeeker,
    FeedbackGains,
    SingleParamController,
    control_u,
    dbar_rhs,
    quasi_objective,
    saturate,
    sbar_rhs,
)
from .engine import (
    ActAndWaitHarness,
    HistoryBuffer,
    NumericalAbort,
    SettleCriterion,
    SettleResult,
    SettleTimeout,
    SimConfig,
    Trajectory,
    integrate,
    settle,
)
from .growth import Haldane, Monod, Tabulated
from .noise import NoiseParams, constant_bias, square_wave, zero_noise
from .optimizer import (
    GoldenState,
    NewtonState,
    OptimizeResult,
    OptimizeSchedule,
    eval_F,
    golden_init,
    golden_step,
    newton_step,
    optimize,
)
from .plant import PlantParams, PlantState, measure, plant_rhs

__version__ = "0.1.0"
