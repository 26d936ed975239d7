"""Consensus-value bounds for opinion dynamics with bounded, time-varying gains."""
from .bounds import BoundsResult, conservative_bounds, extremal_gamma, solve_bounds, vertex_oracle
from .control import (AllocationPlan, ControlProblem, allocate, allocate_baseline,
                      allocate_bruteforce, allocate_corollary1, apply_control,
                      evaluate_allocation, influence_power)
from .dynamics import GammaSpec, NotConverged, TrajectoryRecord, simulate, step
from .harness import ScenarioConfig, preset, run_bounds_scenario, run_control_experiment
from .linprog import LinearProgram, LpSolution, Status, solve_lp
from .netgraph import Network, generate_ba, directify, load_network, random_network, save_network
from .spectral import left_null_eigenvector, scaled_eigenvector

__all__ = [
    "AllocationPlan", "BoundsResult", "ControlProblem", "GammaSpec", "LinearProgram",
    "LpSolution", "Network", "NotConverged", "ScenarioConfig", "Status", "TrajectoryRecord",
    "allocate", "allocate_baseline", "allocate_bruteforce", "allocate_corollary1",
    "apply_control", "conservative_bounds", "directify", "evaluate_allocation",
    "extremal_gamma", "generate_ba", "influence_power", "left_null_eigenvector",
    "load_network", "preset", "random_network", "run_bounds_scenario",
    "run_control_experiment", "save_network", "scaled_eigenvector", "simulate",
    "solve_bounds", "solve_lp", "step", "vertex_oracle",
]
