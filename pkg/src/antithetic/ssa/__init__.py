"""Exact stochastic simulation and ensemble statistics."""

from .engine import Observables, SeedPlan, TimeGrid, Trajectory, run_ensemble, simulate
from .stats import (
    EnsembleStats,
    InvariantRow,
    StationaryStats,
    estimate_beta,
    invariant_report,
    linear_growth,
    settling_time,
    stationary_stats,
)
