"""
Deterministic test-problem generators.
"""

from blockminres.problems.base import GeneratedProblem, ProblemCollection, ProblemGenerator, default_collection
from blockminres.problems.random_systems import (
    LeastNormGenerator,
    LeastSquaresGenerator,
    gen_least_norm,
    gen_least_squares,
)
from blockminres.problems.stokes_mac import StokesMacGenerator, gen_stokes_mac

__all__ = [
    "GeneratedProblem",
    "ProblemCollection",
    "ProblemGenerator",
    "default_collection",
    "LeastNormGenerator",
    "LeastSquaresGenerator",
    "gen_least_norm",
    "gen_least_squares",
    "StokesMacGenerator",
    "gen_stokes_mac",
]
