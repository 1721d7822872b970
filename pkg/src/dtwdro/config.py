"""Solver tolerances and limits, kept in one place."""
from dataclasses import dataclass


@dataclass(frozen=True)
class SolverTolerances:
    # simplex
    pivot: float = 1e-9            # smallest |tableau entry| accepted as pivot
    optimality: float = 1e-9       # reduced-cost threshold
    feasibility: float = 1e-7      # primal residual accepted at the end
    phase1: float = 1e-8           # max artificial sum treated as feasible
    max_iterations: int = 50_000
    bland_after: int = 50          # consecutive degenerate pivots before Bland's rule
    perturbation: float = 1e-6     # relative size of anti-degeneracy bound shifts; 0 disables
    # branch and bound
    integrality: float = 1e-6
    abs_gap: float = 1e-9
    rel_gap: float = 1e-6
    max_nodes: int = 200_000


DEFAULT_TOLERANCES = SolverTolerances()
