"""ruinflow: exact upward-hitting (ruin) probabilities for Markov additive
processes with signed linear drift and upward jumps, their exponential decay
asymptotics, and an independent Monte Carlo cross-check."""

from .errors import RuinFlowError, ValidationError
from .kernel import Gbar_at, H_at, H_density, H_hat, make_context
from .ladder import (
    LadderSolution,
    ladder_height,
    ladder_height_matrix,
    solve_descent,
    solve_ladder,
)
from .mixtures import Atom, Erlang, Exponential, JumpMixture
from .model import MapModel, Partition, load_model, model_from_dict, validate
from .renewal import (
    AsymptoticResult,
    FluidTail,
    HittingTable,
    asymptote_match,
    asymptotics,
    fluid_tail,
    solve_hitting,
)
from .report import invariant_report
from .simulator import (
    Estimate,
    Estimator,
    PathEvent,
    check_duality_nojump,
    estimate_fluid_tail,
    estimate_hitting,
    estimate_ladder,
    simulate_path,
)
from .spectral import decay_rate, kappa_prime, perron

__version__ = "0.1.0"

__all__ = [
    "RuinFlowError",
    "ValidationError",
    "MapModel",
    "Partition",
    "JumpMixture",
    "Atom",
    "Exponential",
    "Erlang",
    "load_model",
    "model_from_dict",
    "validate",
    "LadderSolution",
    "solve_ladder",
    "solve_descent",
    "ladder_height",
    "ladder_height_matrix",
    "decay_rate",
    "perron",
    "kappa_prime",
    "make_context",
    "H_at",
    "H_density",
    "H_hat",
    "Gbar_at",
    "HittingTable",
    "AsymptoticResult",
    "FluidTail",
    "solve_hitting",
    "asymptotics",
    "asymptote_match",
    "fluid_tail",
    "invariant_report",
    "Estimate",
    "Estimator",
    "PathEvent",
    "simulate_path",
    "estimate_hitting",
    "estimate_ladder",
    "check_duality_nojump",
    "estimate_fluid_tail",
    "__version__",
]
