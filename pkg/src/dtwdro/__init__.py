"""Distributionally robust placement and selection of digital-twin models on edge servers."""
from ._kernels import BACKEND, HAS_NUMBA
from .ambiguity import WassersteinBall, tolerance_theta, wasserstein_distance, worst_case_dual, worst_case_expectation
from .config import DEFAULT_TOLERANCES, SolverTolerances
from .lp import LinearProgram, MixedIntegerProgram, SolveResult, Status, solve_lp, solve_mip
from .network import CLOUD, EdgeServer, PhysicalTwin, Scenario, utility_gain
from .planner import Plan, PlannerConfig, plan_from_history, prepare_inputs, solve_plan
from .requestlog import Request, SampleSpace, class_features, empirical_distribution

__version__ = "0.1.0"
