"""Exact certificates of isolated calmness for ``0 ∈ f(x,y) + N_D(g(x,y))``."""
from .calculus import SCDerivativeCollection, extend_to_F, sc_derivative_H, sc_derivative_Q
from .checks import StabilityReport, Verdict, run_checks
from .oracle import SolutionGraph, build_solution_graph, verify_isolated_calmness_around
from .polyhedra import PolyhedralCone, PolyhedralSet, enumerate_faces
from .problem import GEProblem, ProblemError, load_problem
from .subspace import Subspace, adjoint, distance

__all__ = [
    "GEProblem", "PolyhedralCone", "PolyhedralSet", "ProblemError", "SCDerivativeCollection",
    "SolutionGraph", "StabilityReport", "Subspace", "Verdict", "adjoint", "build_solution_graph",
    "distance", "enumerate_faces", "extend_to_F", "load_problem", "run_checks", "sc_derivative_H",
    "sc_derivative_Q", "verify_isolated_calmness_around",
]
__version__ = "0.1.0"
