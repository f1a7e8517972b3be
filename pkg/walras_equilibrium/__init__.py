"""
Walras Equilibrium Solver

Computes equilibrium prices of exchange, two-stage deterministic and two-stage
stochastic economies by maximizing an augmented Walrasian with a dual vertex
step and a trust-region price step. Agents have Cobb-Douglas or CES
utilities; stochastic transfers are found by Progressive Hedging.
"""

__version__ = "1.0.0"

from .config import Phase2Options, SolverConfig, load_configuration
from .economy_io import EconomyFileError, list_fixtures, load_fixture, parse_economy, serialize_economy
from .hedging import HedgingOptions, MaxIterExceeded, ph_solve
from .models import CES, Agent, CobbDouglas, Economy, ModelClass, ModelError, PriceSystem
from .solver import SolveStatus, SolveTrace, multistart_solve, solve, solve_sequence
from .validation import check_recourse, validate
from .walrasian import augmented_walrasian, excess_supply, residual, walrasian_value

__all__ = [
    "Agent",
    "CES",
    "CobbDouglas",
    "Economy",
    "EconomyFileError",
    "HedgingOptions",
    "MaxIterExceeded",
    "ModelClass",
    "ModelError",
    "Phase2Options",
    "PriceSystem",
    "SolveStatus",
    "SolveTrace",
    "SolverConfig",
    "augmented_walrasian",
    "check_recourse",
    "excess_supply",
    "list_fixtures",
    "load_configuration",
    "load_fixture",
    "multistart_solve",
    "parse_economy",
    "ph_solve",
    "residual",
    "serialize_economy",
    "solve",
    "solve_sequence",
    "validate",
    "walrasian_value",
]
