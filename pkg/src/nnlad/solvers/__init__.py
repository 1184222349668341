"""Decoders for non-negative sparse recovery and their building blocks."""

from nnlad.solvers._common import (CERTIFIED, MAX_ITERS, STALLED, SolveResult,
                                   SolverParams, TraceSample)
from nnlad.solvers.baselines import (eiht_solve, hard_threshold, median_neighbors,
                                     nnls_solve, subgradient_solve)
from nnlad.solvers.nnlad import (default_steps, nnlad_certificate, nnlad_solve,
                                 rate_bound_averages)
from nnlad.solvers.prox import prox_f, prox_fstar, prox_fstar_moreau, prox_nonneg

SOLVERS = ("nnlad", "nnls", "subgrad", "eiht")

__all__ = [
    "CERTIFIED", "MAX_ITERS", "STALLED", "SOLVERS", "SolveResult", "SolverParams",
    "TraceSample", "default_steps", "eiht_solve", "hard_threshold", "median_neighbors",
    "nnlad_certificate", "nnlad_solve", "nnls_solve", "prox_f", "prox_fstar",
    "prox_fstar_moreau", "prox_nonneg", "rate_bound_averages", "subgradient_solve",
]
