"""Solvers for quadratic objectives over weighted one-norm balls."""

from .ball import FaceId, face_of, in_self_projection_cone, max_step_on_face, project, prox_weighted_l1
from .model import DenseOperator, Iterate, LassoProblem, LinearOperator, SolverOptions, evaluate
from .rootfind import RootReport, solve_bpdn
from .solver import SolverReport, hybrid_solve, spg_solve

__all__ = [
    "DenseOperator",
    "FaceId",
    "Iterate",
    "LassoProblem",
    "LinearOperator",
    "RootReport",
    "SolverOptions",
    "SolverReport",
    "evaluate",
    "face_of",
    "hybrid_solve",
    "in_self_projection_cone",
    "max_step_on_face",
    "project",
    "prox_weighted_l1",
    "solve_bpdn",
    "spg_solve",
]

__version__ = "0.1.0"
