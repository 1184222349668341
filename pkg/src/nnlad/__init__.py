"""Non-negative least absolute deviation recovery over expander walk matrices."""

from nnlad.linalg import (DenseMatrix, SparseWalkMatrix, compressibility, matvec,
                          matvec_transpose, norm, operator_norm_2)
from nnlad.expander import (expansion_theta, generate_bernoulli, generate_dlrbg,
                            mplus_evaluate)
from nnlad.solvers import SolverParams, nnlad_solve

__version__ = "0.1.0"

__all__ = [
    "DenseMatrix", "SparseWalkMatrix", "SolverParams", "compressibility",
    "expansion_theta", "generate_bernoulli", "generate_dlrbg", "matvec",
    "matvec_transpose", "mplus_evaluate", "nnlad_solve", "norm", "operator_norm_2",
]
