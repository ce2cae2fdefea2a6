"""Multi-robot target tracking with verified LLM-in-the-loop adaptation.

A deterministic 2D world of robots tracking moving targets through
probabilistic danger zones; per-target Kalman estimation; a per-robot
one-step control solver; and a hierarchical pair of language-model loops
(task reassignment, objective-weight tuning) whose outputs pass format and
constraint verification before they touch the optimizer. A live gateway
exposes the run to a supervisor console.
"""

__version__ = "0.1.0"

from .allocation import Assignment, accept_assignment, greedy_assign, verify_assignment
from .estimation import SensorModel, TargetBelief, tracking_cost
from .runner import RunMetrics, run_scenario
from .scenario import Scenario, load_scenario
from .solver import SolveReport, WeightVector, solve_step
from .world import DangerZone, RobotState, TargetTruth, World, WorldConfig, Workspace

__all__ = [
    "__version__",
    "Assignment",
    "accept_assignment",
    "greedy_assign",
    "verify_assignment",
    "SensorModel",
    "TargetBelief",
    "tracking_cost",
    "RunMetrics",
    "run_scenario",
    "Scenario",
    "load_scenario",
    "SolveReport",
    "WeightVector",
    "solve_step",
    "DangerZone",
    "RobotState",
    "TargetTruth",
    "World",
    "WorldConfig",
    "Workspace",
]
