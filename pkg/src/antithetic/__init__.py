"""Stochastic simulation and moment analysis of antithetic integral feedback
combined with proportional (ON/OFF or Hill) feedback on reaction networks."""

from .controller import (
    ClosedLoopConfig,
    ClosedLoopNetwork,
    Feedback,
    attach_antithetic,
    attach_feedback,
    closed_loop,
    ergodicity_guard,
    nominal_input,
)
from .crn import (
    Hill,
    LinearPropensityStructure,
    MassAction,
    Network,
    OnOffProportional,
    Reaction,
    State,
    is_unimolecular,
    linearize_propensities,
    propensities,
    propensity,
    reaction,
    stoichiometric_matrix,
)
from .errors import (
    AnalysisError,
    AntitheticError,
    ConfigError,
    DomainError,
    EstimationError,
    NumericError,
    StructuralError,
    UnsupportedStructureError,
)
from .mean_ode import integrate_mean, linear_closed_loop, settling_time_ode, steady_state
from .moment import analysis_matrices, build_R_Q, is_hurwitz, solve_lyapunov
from .presets import PRESETS, preset
from .ssa import SeedPlan, TimeGrid, run_ensemble, simulate

__version__ = "0.1.0"
