"""Continuous-time random walks observed at arbitrary times.

Renewal functions and excess-life laws of Gamma-family waiting times,
propagators of walks with bi-exponential jumps, mean exit times off an
interval, and a Monte Carlo oracle for all of them.
"""

__version__ = "0.1.0"

from .errors import (
    ConditioningError,
    ConfigError,
    DomainError,
    InversionError,
    NumericalError,
    PathCapError,
    PoleError,
    SolverError,
    StabilityError,
)
from .models import (
    BiExponential,
    CtrwProcess,
    Erlang,
    Exponential,
    GammaRational,
    JumpModel,
    OneSidedExponential,
)
from .numerics import BromwichContour, FourierGrid, fourier_invert, laplace_invert, residue_invert
from .renewal import ExcessLifeLaw, RenewalFunction, StationaryExcess, excess_law
from .propagator import (
    Numerics,
    PropagatorResult,
    accumulated_distribution,
    after_jump_propagator,
    conditioned_propagator,
    general_propagator,
    stationary_propagator,
)
from .exit_times import ExitProblem, ExitTimeSolution, mean_exit_time, met_correction, solve_after_jump_met
